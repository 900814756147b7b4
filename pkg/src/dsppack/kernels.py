"""Backend selection for the enumeration kernel.

The compiled ``_ckernel`` extension is preferred; the numpy version in
``_pykernel`` is used when the extension is missing or when the
``DSPPACK_PURE`` environment variable is set to a non-empty value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernel
from .correction import Scheme
from .packing import PackingConfig

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

_SCHEME_CODES = {Scheme.NONE: 0, Scheme.FULL: 1, Scheme.APPROX: 2, Scheme.MR: 3}

BACKENDS = {"numpy": _pykernel}
if _ckernel is not None:
    BACKENDS["cython"] = _ckernel

DEFAULT_BACKEND = "numpy" if (_ckernel is None or os.environ.get("DSPPACK_PURE")) else "cython"

# stats columns
ERRORS, ABS_SUM, WCE, MIN_ERR, MAX_ERR = range(5)
INT64_BITS = 62


def _factor_bits(widths, offsets, signed) -> int:
    """Bits needed for the magnitude of a packed factor."""
    bound = sum(((1 << (w - 1)) if signed else ((1 << w) - 1)) << off for w, off in zip(widths, offsets))
    return bound.bit_length()


def fits_int64(config: PackingConfig, extra_bits: int = 0) -> bool:
    """Whether every intermediate of the kernel stays inside int64."""
    fa = _factor_bits(config.a_widths, config.a_offsets, config.a_signed)
    fw = _factor_bits(config.w_widths, config.w_offsets, config.w_signed)
    return fa + fw + 1 + extra_bits <= INT64_BITS and config.out_width <= INT64_BITS


@dataclass(frozen=True)
class KernelPlan:
    a_off: np.ndarray
    w_off: np.ndarray
    r_off: np.ndarray
    r_wdth: np.ndarray
    lane_a: np.ndarray
    lane_w: np.ndarray
    scheme: int
    out_width: int
    signed_lanes: bool
    mr_k: int

    @classmethod
    def build(cls, config: PackingConfig, scheme: Scheme) -> "KernelPlan":
        lanes = config.lanes
        arr = lambda xs: np.ascontiguousarray(xs, dtype=np.int64)  # noqa: E731
        return cls(
            a_off=arr(config.a_offsets),
            w_off=arr(config.w_offsets),
            r_off=arr([ln.offset for ln in lanes]),
            r_wdth=arr([ln.width for ln in lanes]),
            lane_a=arr([ln.a_index for ln in lanes]),
            lane_w=arr([ln.w_index for ln in lanes]),
            scheme=_SCHEME_CODES[scheme],
            out_width=config.out_width,
            signed_lanes=config.lane_signed,
            mr_k=-config.delta if scheme is Scheme.MR else 0,
        )

    @property
    def lane_count(self) -> int:
        return len(self.r_off)


def empty_stats(n_lanes: int) -> np.ndarray:
    out = np.zeros((n_lanes, 5), dtype=np.int64)
    out[:, MIN_ERR] = np.iinfo(np.int64).max
    out[:, MAX_ERR] = np.iinfo(np.int64).min
    return out


def merge_stats(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[:, ERRORS] += y[:, ERRORS]
    out[:, ABS_SUM] += y[:, ABS_SUM]
    out[:, WCE] = np.maximum(x[:, WCE], y[:, WCE])
    out[:, MIN_ERR] = np.minimum(x[:, MIN_ERR], y[:, MIN_ERR])
    out[:, MAX_ERR] = np.maximum(x[:, MAX_ERR], y[:, MAX_ERR])
    return out


def lane_errors(plan: KernelPlan, a_ops: np.ndarray, w_ops: np.ndarray,
                backend: str | None = None) -> np.ndarray:
    """Per-lane error statistics over a block of operand tuples."""
    impl = BACKENDS[backend or DEFAULT_BACKEND]
    out = empty_stats(plan.lane_count)
    impl.lane_errors(np.ascontiguousarray(a_ops, dtype=np.int64),
                     np.ascontiguousarray(w_ops, dtype=np.int64),
                     plan.a_off, plan.w_off, plan.r_off, plan.r_wdth, plan.lane_a, plan.lane_w,
                     plan.scheme, plan.out_width, plan.signed_lanes, plan.mr_k, out)
    return out


def lane_errors_range(plan: KernelPlan, ranges, start: int, stop: int,
                      backend: str | None = None) -> np.ndarray:
    """Statistics over flat indices [start, stop) of the exhaustive domain.

    The compiled backend decodes operands itself, so no operand array is
    ever materialised.
    """
    impl = BACKENDS[backend or DEFAULT_BACKEND]
    lo = np.ascontiguousarray([r[0] for r in ranges], dtype=np.int64)
    radix = np.ascontiguousarray([r[1] - r[0] + 1 for r in ranges], dtype=np.int64)
    out = empty_stats(plan.lane_count)
    impl.lane_errors_range(lo, radix, start, stop, plan.a_off, plan.w_off, plan.r_off, plan.r_wdth,
                           plan.lane_a, plan.lane_w, plan.scheme, plan.out_width, plan.signed_lanes,
                           plan.mr_k, out)
    return out
