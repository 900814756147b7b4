"""Error statistics, enumeration and report rendering.

Error metrics per result lane over ``N`` operand tuples:

* EP  -- percentage of tuples whose lane value differs from the product
* MAE -- mean absolute difference
* WCE -- largest absolute difference

The ``*_bar`` aggregates are the mean (EP, MAE) or maximum (WCE) over lanes.
All values are kept as exact fractions; rounding happens only on display.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _pykernel, kernels
from .correction import Scheme, check_scheme, run_scheme
from .dsp import wrap_array
from .errors import DomainTooLarge, InvariantViolation
from .packing import PackingConfig, packing_density, require_feasible

DEFAULT_CEILING = 1 << 26
CHUNK = 1 << 16

# Fig. 9 comparison bar for a method that is not modelled here
LITERATURE_DENSITIES = {"Huang et al.": Fraction(56, 100)}


def oracle(a: Sequence[int], w: Sequence[int]) -> list[int]:
    """Outer product ``a_i * w_j`` in ``j * len(a) + i`` order."""
    return [ai * wj for wj in w for ai in a]


@dataclass(frozen=True)
class LaneStats:
    name: str
    n: int
    errors: int
    abs_sum: int
    wce: int
    min_error: int = 0
    max_error: int = 0

    @property
    def ep(self) -> Fraction:
        """Error probability in percent."""
        return Fraction(100 * self.errors, self.n) if self.n else Fraction(0)

    @property
    def mae(self) -> Fraction:
        return Fraction(self.abs_sum, self.n) if self.n else Fraction(0)

    def merge(self, other: "LaneStats") -> "LaneStats":
        if other.name != self.name:
            raise ValueError(f"cannot merge lane {other.name} into {self.name}")
        if not self.n:
            return other
        if not other.n:
            return self
        return LaneStats(self.name, self.n + other.n, self.errors + other.errors,
                         self.abs_sum + other.abs_sum, max(self.wce, other.wce),
                         min(self.min_error, other.min_error), max(self.max_error, other.max_error))


@dataclass(frozen=True)
class ErrorStats:
    lanes: tuple[LaneStats, ...] = ()
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.lanes[0].n if self.lanes else 0

    @property
    def ep_bar(self) -> Fraction:
        return sum((ln.ep for ln in self.lanes), Fraction(0)) / len(self.lanes) if self.lanes else Fraction(0)

    @property
    def mae_bar(self) -> Fraction:
        return sum((ln.mae for ln in self.lanes), Fraction(0)) / len(self.lanes) if self.lanes else Fraction(0)

    @property
    def wce_bar(self) -> int:
        return max((ln.wce for ln in self.lanes), default=0)

    def lane(self, name: str) -> LaneStats:
        for ln in self.lanes:
            if ln.name == name:
                return ln
        raise KeyError(name)

    def merge(self, other: "ErrorStats") -> "ErrorStats":
        if not self.lanes:
            return other
        if not other.lanes:
            return self
        if [ln.name for ln in self.lanes] != [ln.name for ln in other.lanes]:
            raise ValueError("cannot merge statistics over different lane sets")
        return ErrorStats(tuple(x.merge(y) for x, y in zip(self.lanes, other.lanes)), self.meta)

    @classmethod
    def from_array(cls, names: Sequence[str], n: int, arr: np.ndarray,
                   meta: Mapping[str, Any] | None = None) -> "ErrorStats":
        lanes = []
        for name, row in zip(names, arr):
            lo, hi = (int(row[kernels.MIN_ERR]), int(row[kernels.MAX_ERR])) if n else (0, 0)
            lanes.append(LaneStats(name, n, int(row[kernels.ERRORS]), int(row[kernels.ABS_SUM]),
                                   int(row[kernels.WCE]), lo, hi))
        return cls(tuple(lanes), dict(meta or {}))


@dataclass(frozen=True)
class EnumerationSpec:
    mode: str = "exhaustive"  # or "sample"
    count: int = 0
    seed: int = 0
    ceiling: int = DEFAULT_CEILING

    @classmethod
    def exhaustive(cls, ceiling: int = DEFAULT_CEILING) -> "EnumerationSpec":
        return cls("exhaustive", ceiling=ceiling)

    @classmethod
    def sample(cls, count: int, seed: int = 0) -> "EnumerationSpec":
        if count < 1:
            raise ValueError("sample count must be positive")
        return cls("sample", count=count, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        if self.mode == "exhaustive":
            return {"mode": "exhaustive"}
        return {"mode": "sample", "count": self.count, "seed": self.seed}


# -- enumeration --------------------------------------------------------------


@dataclass(frozen=True)
class _Block:
    index: int
    start: int
    stop: int


def _blocks(total: int, chunk: int) -> list[_Block]:
    return [_Block(k, s, min(s + chunk, total)) for k, s in enumerate(range(0, total, chunk))]


def _decode(ranges: Sequence[tuple[int, int]], start: int, stop: int) -> np.ndarray:
    """Operand tuples for flat indices in [start, stop); last operand varies fastest."""
    return _pykernel.decode([lo for lo, _ in ranges], [hi - lo + 1 for lo, hi in ranges], start, stop)


def _sample(ranges: Sequence[tuple[int, int]], seed: int, block: _Block) -> np.ndarray:
    # one generator per block keeps samples independent of the worker count
    rng = np.random.default_rng([seed, block.index])
    size = block.stop - block.start
    cols = np.empty((size, len(ranges)), dtype=np.int64)
    for k, (lo, hi) in enumerate(ranges):
        cols[:, k] = rng.integers(lo, hi, size=size, endpoint=True, dtype=np.int64)
    return cols


def operand_blocks(config: PackingConfig, enum: EnumerationSpec,
                   chunk: int = CHUNK) -> tuple[int, list[_Block], Any]:
    """Plan the enumeration; returns (N, blocks, block -> operand array)."""
    ranges = config.operand_ranges()
    if enum.mode == "exhaustive":
        total = config.domain_size()
        if total > enum.ceiling:
            raise DomainTooLarge(total, enum.ceiling)
        return total, _blocks(total, chunk), lambda b: _decode(ranges, b.start, b.stop)
    if enum.mode == "sample":
        return enum.count, _blocks(enum.count, chunk), lambda b: _sample(ranges, enum.seed, b)
    raise ValueError(f"unknown enumeration mode {enum.mode!r}")


def iter_operands(config: PackingConfig, enum: EnumerationSpec) -> Iterator[tuple[list[int], list[int]]]:
    """Operand tuples one at a time, in enumeration order."""
    _, blocks, make = operand_blocks(config, enum)
    na = len(config.a_widths)
    for b in blocks:
        for row in make(b).tolist():
            yield row[:na], row[na:]


def default_workers() -> int:
    cap = os.environ.get("DSPPACK_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def error_stats(config: PackingConfig, scheme: Scheme | str = Scheme.NONE,
                enum: EnumerationSpec | None = None, workers: int | None = None,
                backend: str | None = None, chunk: int = CHUNK) -> ErrorStats:
    """Per-lane error statistics of ``scheme`` on ``config``.

    ``backend`` selects the kernel (``"cython"``, ``"numpy"``) or
    ``"reference"``, which runs every tuple through the scalar
    multiply/extract/correct path with unbounded ints.
    """
    scheme = check_scheme(config, scheme)
    enum = enum or EnumerationSpec.exhaustive()
    if config.physical:
        require_feasible(config)
    n, blocks, make = operand_blocks(config, enum, chunk)
    lanes = config.lanes
    na = len(config.a_widths)

    if backend == "reference" or not kernels.fits_int64(config):
        def run(block):
            out = kernels.empty_stats(len(lanes))
            for row in make(block).tolist():
                ev = run_scheme(config, row[:na], row[na:], scheme)
                for k, err in enumerate(ev.errors):
                    ae = abs(err)
                    out[k, kernels.ERRORS] += err != 0
                    out[k, kernels.ABS_SUM] += ae
                    out[k, kernels.WCE] = max(out[k, kernels.WCE], ae)
                    out[k, kernels.MIN_ERR] = min(out[k, kernels.MIN_ERR], err)
                    out[k, kernels.MAX_ERR] = max(out[k, kernels.MAX_ERR], err)
            return out
        used = "reference"
    else:
        plan = kernels.KernelPlan.build(config, scheme)
        ranges = config.operand_ranges()

        if enum.mode == "exhaustive":
            def run(block):
                return kernels.lane_errors_range(plan, ranges, block.start, block.stop, backend)
        else:
            def run(block):
                ops = make(block)
                return kernels.lane_errors(plan, ops[:, :na], ops[:, na:], backend)
        used = backend or kernels.DEFAULT_BACKEND

    workers = workers or default_workers()
    total = kernels.empty_stats(len(lanes))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    for part in parts:
        total = kernels.merge_stats(total, part)

    meta = {
        "config": config.to_dict(),
        "scheme": str(scheme),
        "enumeration": enum.to_dict(),
        "n": n,
        "backend": used,
    }
    stats = ErrorStats.from_array([ln.name for ln in lanes], n, total, meta)
    if scheme is Scheme.NONE and config.delta >= 0 and n:
        for ln in stats.lanes:
            if ln.min_error < -1 or ln.max_error > 0:
                raise InvariantViolation(
                    f"lane {ln.name}: error range [{ln.min_error}, {ln.max_error}] leaves the floor-bias bound")
    return stats


def accumulation_stats(config: PackingConfig, chain_length: int, trials: int, seed: int = 0) -> ErrorStats:
    """Naive-extraction error of ``chain_length`` accumulated products.

    Every lane is read ``delta`` bits wider, into its padding, and compared
    with the summed per-lane products.
    """
    if config.delta < 0:
        raise ValueError("accumulation needs non-negative padding")
    lanes = config.lanes
    ranges = config.operand_ranges()
    na = len(config.a_widths)
    rng = np.random.default_rng([seed, chain_length])
    ops = np.stack([rng.integers(lo, hi, size=(trials, chain_length), endpoint=True, dtype=np.int64)
                    for lo, hi in ranges], axis=-1)
    if not kernels.fits_int64(config, extra_bits=chain_length.bit_length()):
        raise ValueError("accumulated products do not fit int64")
    a_ops, w_ops = ops[..., :na], ops[..., na:]
    fa = sum(a_ops[..., i] * (1 << off) for i, off in enumerate(config.a_offsets))
    fw = sum(w_ops[..., j] * (1 << off) for j, off in enumerate(config.w_offsets))
    p = wrap_array((fa * fw).sum(axis=1), config.out_width)
    out = kernels.empty_stats(len(lanes))
    for n, ln in enumerate(lanes):
        width = ln.width + config.delta
        v = (p >> ln.offset) & ((1 << width) - 1)
        if config.lane_signed:
            v = ((v + (1 << (width - 1))) & ((1 << width) - 1)) - (1 << (width - 1))
        expected = (a_ops[..., ln.a_index] * w_ops[..., ln.w_index]).sum(axis=1)
        err = v - expected
        out[n] = [np.count_nonzero(err), np.abs(err).sum(), np.abs(err).max(), err.min(), err.max()]
    meta = {"config": config.to_dict(), "chain_length": chain_length, "trials": trials, "seed": seed,
            "n": trials}
    return ErrorStats.from_array([ln.name for ln in lanes], trials, out, meta)


# -- density ------------------------------------------------------------------


@dataclass(frozen=True)
class DensityRow:
    name: str
    used_bits: int | None
    total_bits: int | None
    rho: Fraction
    source: str  # "computed" or "literature"


def density_report(configs: Mapping[str, PackingConfig] | Iterable[PackingConfig],
                   literature: bool = False, total_bits: int | None = None) -> list[DensityRow]:
    items = list(configs.items()) if isinstance(configs, Mapping) else \
        [(c.name or f"config{k}", c) for k, c in enumerate(configs)]
    rows = []
    for name, cfg in items:
        rho = packing_density(cfg, total_bits)
        rows.append(DensityRow(name, sum(ln.width for ln in cfg.lanes),
                               total_bits or cfg.out_width, rho, "computed"))
    if literature and rows:
        rows += [DensityRow(name, None, None, rho, "literature")
                 for name, rho in LITERATURE_DENSITIES.items()]
    return rows


# -- rendering ----------------------------------------------------------------


def display(x: Fraction | int, places: int = 2) -> str:
    """Round half to even at ``places`` decimals, computed exactly."""
    q = round(Fraction(x), places)
    return f"{float(q):.{places}f}"


def display_rho(x: Fraction) -> str:
    """Density at two decimals, ties rounded up as in published bar charts."""
    q = Fraction(floor(Fraction(x) * 100 + Fraction(1, 2)), 100)
    return f"{float(q):.2f}"


def exact_decimal(x: Fraction, max_places: int = 6) -> str:
    """Terminating decimal expansion if short enough, else ``p/q``."""
    x = Fraction(x)
    for places in range(max_places + 1):
        if (x * 10 ** places).denominator == 1:
            return f"{float(x):.{places}f}" if places else str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _frac(num: int, den: int) -> dict[str, Any]:
    return {"numerator": num, "denominator": den, "display": display(Fraction(num, den)) if den else "0.00"}


def _stats_json(stats: ErrorStats) -> dict[str, Any]:
    # the kernel backend is provenance, not a result; reports stay byte-identical across backends
    doc: dict[str, Any] = {k: v for k, v in stats.meta.items() if k != "backend"}
    doc["lanes"] = [
        {
            "result": ln.name,
            "n": ln.n,
            "errors": ln.errors,
            "abs_error_sum": ln.abs_sum,
            "min_error": ln.min_error,
            "max_error": ln.max_error,
            "mae": _frac(ln.abs_sum, ln.n),
            "ep_percent": _frac(100 * ln.errors, ln.n),
            "wce": ln.wce,
        }
        for ln in stats.lanes
    ]
    if stats.lanes:
        k, n = len(stats.lanes), stats.n
        doc["all"] = {
            "result": "all",
            "n": n,
            "lanes": k,
            "mae": _frac(sum(ln.abs_sum for ln in stats.lanes), k * n),
            "ep_percent": _frac(100 * sum(ln.errors for ln in stats.lanes), k * n),
            "wce": stats.wce_bar,
        }
    return doc


def _stats_rows(stats: ErrorStats) -> list[list[str]]:
    rows = [[ln.name, display(ln.mae), display(ln.ep), str(ln.wce)] for ln in stats.lanes]
    if stats.lanes:
        rows.append(["all", display(stats.mae_bar), display(stats.ep_bar), str(stats.wce_bar)])
    return rows


def _density_rows(rows: Sequence[DensityRow]) -> list[list[str]]:
    return [[r.name, "" if r.used_bits is None else str(r.used_bits),
             "" if r.total_bits is None else str(r.total_bits), display_rho(r.rho), exact_decimal(r.rho),
             r.source]
            for r in rows]


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


STATS_HEADER = ("result", "mae", "ep_percent", "wce")
DENSITY_HEADER = ("config", "used_bits", "total_bits", "rho", "rho_exact", "source")


def render(obj: ErrorStats | Sequence[DensityRow], fmt: str = "csv") -> str:
    if fmt not in ("csv", "json", "markdown"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(obj, ErrorStats):
        if fmt == "json":
            return json.dumps(_stats_json(obj), indent=2, sort_keys=False) + "\n"
        rows = _stats_rows(obj)
        return (_csv if fmt == "csv" else _markdown)(STATS_HEADER, rows)
    rows_in = list(obj)
    if fmt == "json":
        doc = {"densities": [
            {"config": r.name, "used_bits": r.used_bits, "total_bits": r.total_bits,
             "rho": {"numerator": r.rho.numerator, "denominator": r.rho.denominator,
                     "display": display_rho(r.rho), "exact": exact_decimal(r.rho)},
             "source": r.source}
            for r in rows_in]}
        return json.dumps(doc, indent=2) + "\n"
    return (_csv if fmt == "csv" else _markdown)(DENSITY_HEADER, _density_rows(rows_in))


def summary_line(stats: ErrorStats) -> str:
    meta = stats.meta
    head = f"scheme={meta['scheme']} " if "scheme" in meta else ""
    return (f"{head}n={stats.n} mae_bar={display(stats.mae_bar)} "
            f"ep_bar={display(stats.ep_bar)}% wce_bar={stats.wce_bar}")
