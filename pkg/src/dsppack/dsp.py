"""Functional model of a DSP48E2-style multiply-accumulate block.

Computes ``P = B * (A + D) + C + P_in`` combinationally, with every port
checked against its signed width and the result wrapped to the P width.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PortOverflow, PreadderOverflow
from .words import IntLike, Word, signed_range, wrap_signed


@dataclass(frozen=True)
class PortSpec:
    width_a: int = 27
    width_b: int = 18
    width_c: int = 48
    width_d: int = 27
    width_p: int = 48
    preadder_width: int = 27
    mult_shape: tuple[int, int] = (18, 27)

    def port_width(self, port: str) -> int:
        return {
            "a": self.width_a,
            "b": self.width_b,
            "c": self.width_c,
            "d": self.width_d,
            "p_in": self.width_p,
        }[port]


DSP48E2 = PortSpec()


@dataclass(frozen=True)
class DspInputs:
    a: Word
    b: Word
    c: Word
    d: Word
    p_in: Word

    @classmethod
    def from_ints(cls, a: IntLike = 0, b: IntLike = 0, c: IntLike = 0, d: IntLike = 0,
                  p_in: IntLike = 0, spec: PortSpec = DSP48E2) -> "DspInputs":
        words = {}
        for port, v in (("a", a), ("b", b), ("c", c), ("d", d), ("p_in", p_in)):
            if isinstance(v, Word):
                words[port] = v
                continue
            width = spec.port_width(port)
            lo, hi = signed_range(width)
            if not lo <= int(v) <= hi:
                raise PortOverflow(port, int(v), width)
            words[port] = Word(int(v), width)
        return cls(**words)

    def with_p_in(self, p_in: IntLike, spec: PortSpec = DSP48E2) -> "DspInputs":
        return DspInputs(self.a, self.b, self.c, self.d, Word(int(p_in), spec.width_p))


def _check_port(port: str, value: int, width: int, stage: int | None = None) -> None:
    lo, hi = signed_range(width)
    if not lo <= value <= hi:
        raise PortOverflow(port, value, width, stage)


def eval(inputs: DspInputs, spec: PortSpec = DSP48E2) -> Word:  # noqa: A001
    a, b, c, d, p_in = (int(inputs.a), int(inputs.b), int(inputs.c), int(inputs.d), int(inputs.p_in))
    for port, v in (("a", a), ("b", b), ("c", c), ("d", d), ("p_in", p_in)):
        _check_port(port, v, spec.port_width(port))
    pre = a + d
    lo, hi = signed_range(spec.preadder_width)
    if not lo <= pre <= hi:
        raise PreadderOverflow(pre, spec.preadder_width)
    return wrap_signed(b * pre + c + p_in, spec.width_p)


evaluate = eval


def chain_accumulate(stages: Sequence[DspInputs], spec: PortSpec = DSP48E2) -> Word:
    """Cascade blocks through their carry ports; returns the last block's P."""
    p = Word(0, spec.width_p)
    for idx, stage in enumerate(stages):
        if int(stage.p_in) != 0:
            raise ValueError(f"stage {idx}: P_in is supplied by the chain and must be zero")
        try:
            p = eval(stage.with_p_in(p, spec), spec)
        except (PortOverflow, PreadderOverflow) as exc:
            exc.stage = idx
            exc.args = (f"{exc.args[0]} (stage {idx})",)
            raise
    return p


def eval_batch(a, b, c, d, p_in, spec: PortSpec = DSP48E2) -> np.ndarray:
    """Vectorised :func:`eval` over int64 arrays.

    Port and pre-adder ranges are checked element-wise; the first violation
    raises just like the scalar model.
    """
    arrs = {k: np.asarray(v, dtype=np.int64) for k, v in
            (("a", a), ("b", b), ("c", c), ("d", d), ("p_in", p_in))}
    for port, arr in arrs.items():
        lo, hi = signed_range(spec.port_width(port))
        bad = (arr < lo) | (arr > hi)
        if bad.any():
            raise PortOverflow(port, int(arr[bad].flat[0]), spec.port_width(port))
    pre = arrs["a"] + arrs["d"]
    lo, hi = signed_range(spec.preadder_width)
    bad = (pre < lo) | (pre > hi)
    if bad.any():
        raise PreadderOverflow(int(pre[bad].flat[0]), spec.preadder_width)
    if spec.width_p > 62:
        raise ValueError("eval_batch supports P widths up to 62 bits")
    # 27x18 product plus two 48-bit addends stays well inside int64
    raw = arrs["b"] * pre + arrs["c"] + arrs["p_in"]
    return wrap_array(raw, spec.width_p)


def wrap_array(v: np.ndarray, width: int) -> np.ndarray:
    half = np.int64(1) << np.int64(width - 1)
    mask = (np.int64(1) << np.int64(width)) - np.int64(1)
    return ((v + half) & mask) - half
