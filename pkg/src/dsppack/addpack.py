"""Several narrow unsigned additions sharing one wide adder.

Lane ``i`` sits at ``off_i = off_{i-1} + width_{i-1} + guard_{i-1}``.  The
only cross-lane effect is a carry out of the lanes below, which adds one
to the receiving lane modulo its width.  A zero guard bit above a lane
absorbs that carry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .analysis import EnumerationSpec, ErrorStats, LaneStats
from .errors import ConfigError, ConfigOverflow, DomainTooLarge, OperandRange
from .words import extract_field


@dataclass(frozen=True)
class AdditionPackConfig:
    lane_widths: tuple[int, ...]
    guard_bits: int | tuple[int, ...] = 0
    total_width: int = 48

    def __post_init__(self):
        object.__setattr__(self, "lane_widths", tuple(int(w) for w in self.lane_widths))
        if not self.lane_widths or min(self.lane_widths) < 1:
            raise ConfigError("lane widths must be positive and non-empty")
        if isinstance(self.guard_bits, int):
            guards = (self.guard_bits,) * (len(self.lane_widths) - 1)
        else:
            guards = tuple(int(g) for g in self.guard_bits)
            if len(guards) != len(self.lane_widths) - 1:
                raise ConfigError("give one guard count per lane boundary")
        if guards and min(guards) < 0:
            raise ConfigError("guard bits cannot be negative")
        if not isinstance(self.guard_bits, int):
            object.__setattr__(self, "guard_bits", guards)
        used = sum(self.lane_widths) + sum(guards)
        if used > self.total_width:
            raise ConfigOverflow(f"lanes need {used} bits but the adder has {self.total_width}")

    @property
    def guards(self) -> tuple[int, ...]:
        if isinstance(self.guard_bits, int):
            return (self.guard_bits,) * (len(self.lane_widths) - 1)
        return self.guard_bits

    @property
    def offsets(self) -> tuple[int, ...]:
        offs = [0]
        for w, g in zip(self.lane_widths, self.guards):
            offs.append(offs[-1] + w + g)
        return tuple(offs)

    @property
    def lane_names(self) -> list[str]:
        return [f"add{i}" for i in range(len(self.lane_widths))]

    def to_dict(self) -> dict[str, Any]:
        guard = self.guard_bits if isinstance(self.guard_bits, int) else list(self.guard_bits)
        return {"lane_widths": list(self.lane_widths), "guard_bits": guard, "total_width": self.total_width}


def config_from_dict(doc: dict[str, Any]) -> AdditionPackConfig:
    try:
        return AdditionPackConfig(tuple(doc["lane_widths"]), doc.get("guard_bits", 0),
                                  doc.get("total_width", 48))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad addition-packing config: {exc}") from None


@dataclass(frozen=True)
class AdditionResult:
    lane: int
    actual: int
    expected: int
    carry_in: int
    width: int

    @property
    def error(self) -> int:
        """Difference modulo the lane width, taken in (-2^(w-1), 2^(w-1)].

        The half-open range keeps a leaked carry at +1 even for 1-bit lanes.
        """
        d = (self.actual - self.expected) % (1 << self.width)
        return d if d <= (1 << (self.width - 1)) else d - (1 << self.width)


def _check(config: AdditionPackConfig, x: Sequence[int], y: Sequence[int]) -> None:
    for name, vals in (("x", x), ("y", y)):
        if len(vals) != len(config.lane_widths):
            raise OperandRange(name, len(vals), len(vals), 0, len(config.lane_widths))
        for i, (v, w) in enumerate(zip(vals, config.lane_widths)):
            if not 0 <= v < (1 << w):
                raise OperandRange(name, i, v, 0, (1 << w) - 1)


def add_packed(config: AdditionPackConfig, x: Sequence[int], y: Sequence[int]) -> list[AdditionResult]:
    _check(config, x, y)
    offs = config.offsets
    big_x = sum(v << o for v, o in zip(x, offs))
    big_y = sum(v << o for v, o in zip(y, offs))
    s = (big_x + big_y) % (1 << config.total_width)
    out = []
    for i, (w, o) in enumerate(zip(config.lane_widths, offs)):
        low_mask = (1 << o) - 1
        carry = ((big_x & low_mask) + (big_y & low_mask)) >> o
        actual = extract_field(s, o, w, signed=False).value
        out.append(AdditionResult(i, actual, (x[i] + y[i]) % (1 << w), carry, w))
    return out


def accumulate_packed(config: AdditionPackConfig, addends: Sequence[Sequence[int]]) -> list[int]:
    """Experimental: feed the packed sum back as the next X operand.

    Guard bits are not cleared between steps, so carries parked there
    survive into later additions.
    """
    offs = config.offsets
    s = 0
    for vals in addends:
        _check(config, vals, [0] * len(vals))
        s = (s + sum(v << o for v, o in zip(vals, offs))) % (1 << config.total_width)
    return [extract_field(s, o, w, signed=False).value for w, o in zip(config.lane_widths, offs)]


@dataclass(frozen=True)
class LayoutReport:
    lane_widths: tuple[int, ...]
    total_width: int
    spare_bits: int
    guarded_boundaries: int
    approximate_lanes: int

    @property
    def lane_count(self) -> int:
        return len(self.lane_widths)

    @property
    def fits(self) -> bool:
        return self.lane_count > 0


def feasible_layouts(total_width: int, lane_widths: int | Sequence[int]) -> LayoutReport:
    """How many lanes fit, and how many boundaries the spare bits can guard."""
    if isinstance(lane_widths, int):
        count = total_width // lane_widths if lane_widths > 0 else 0
        widths = (lane_widths,) * count
    else:
        widths = tuple(lane_widths)
        if sum(widths) > total_width:
            widths = ()
    spare = total_width - sum(widths)
    boundaries = max(len(widths) - 1, 0)
    guarded = min(spare, boundaries)
    return LayoutReport(widths, total_width, spare, guarded, boundaries - guarded)


# -- statistics -------------------------------------------------------------


def _stats_from_ops(config: AdditionPackConfig, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    offs = config.offsets
    if config.total_width > 62:
        raise ValueError("vectorised addition model supports adders up to 62 bits")
    big_x = sum(xs[:, i] << np.int64(o) for i, o in enumerate(offs))
    big_y = sum(ys[:, i] << np.int64(o) for i, o in enumerate(offs))
    s = (big_x + big_y) & np.int64((1 << config.total_width) - 1)
    rows = []
    for i, (w, o) in enumerate(zip(config.lane_widths, offs)):
        mask = np.int64((1 << w) - 1)
        actual = (s >> np.int64(o)) & mask
        expected = (xs[:, i] + ys[:, i]) & mask
        d = (actual - expected) & mask
        err = np.where(d <= (1 << (w - 1)), d, d - (1 << w))
        ae = np.abs(err)
        rows.append([np.count_nonzero(err), int(ae.sum()), int(ae.max()),
                     int(err.min()), int(err.max())])
    return np.array(rows, dtype=np.int64)


def addpack_stats(config: AdditionPackConfig, enum: EnumerationSpec | None = None,
                  chunk: int = 1 << 18) -> ErrorStats:
    """Per-lane error statistics of packed addition.

    Exhaustive mode enumerates the operands of every lane except the
    topmost one: a lane's error depends only on the lanes below it, so the
    top operands are held at zero.
    """
    enum = enum or EnumerationSpec.exhaustive()
    widths = config.lane_widths
    k = len(widths)
    if enum.mode == "exhaustive":
        radices = [1 << w for w in widths[:-1] for _ in range(2)]
        total = int(np.prod(radices, dtype=object)) if radices else 1
        if total > enum.ceiling:
            raise DomainTooLarge(total, enum.ceiling)
    else:
        total = enum.count
    acc = None
    for index, start in enumerate(range(0, total, chunk)):
        stop = min(start + chunk, total)
        size = stop - start
        xs = np.zeros((size, k), dtype=np.int64)
        ys = np.zeros((size, k), dtype=np.int64)
        if enum.mode == "exhaustive":
            idx = np.arange(start, stop, dtype=np.int64)
            for i in range(k - 2, -1, -1):
                ys[:, i] = idx & ((1 << widths[i]) - 1)
                idx >>= widths[i]
                xs[:, i] = idx & ((1 << widths[i]) - 1)
                idx >>= widths[i]
        else:
            rng = np.random.default_rng([enum.seed, index])
            for i, w in enumerate(widths):
                xs[:, i] = rng.integers(0, 1 << w, size=size, dtype=np.int64)
                ys[:, i] = rng.integers(0, 1 << w, size=size, dtype=np.int64)
        part = _stats_from_ops(config, xs, ys)
        if acc is None:
            acc = part
        else:
            acc[:, 0] += part[:, 0]
            acc[:, 1] += part[:, 1]
            acc[:, 2] = np.maximum(acc[:, 2], part[:, 2])
            acc[:, 3] = np.minimum(acc[:, 3], part[:, 3])
            acc[:, 4] = np.maximum(acc[:, 4], part[:, 4])
    lanes = tuple(LaneStats(name, total, *(int(v) for v in row))
                  for name, row in zip(config.lane_names, acc))
    meta = {"config": config.to_dict(), "enumeration": enum.to_dict(), "n": total}
    return ErrorStats(lanes, meta)
