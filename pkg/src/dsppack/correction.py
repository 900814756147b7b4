"""Error correction for packed multiplication.

``full``
    Round-half-up after extraction: add the bit just below each lane.
``approx``
    Predict that bit from the operand signs and feed the prediction into the
    accumulator port, so no logic follows the DSP.
``mr``
    For overlapping lanes, recompute the low product bits of the upper
    neighbour and subtract them from the contaminated MSBs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .errors import SchemeMismatch
from .packing import LaneSet, PackingConfig, extract_naive, multiply_packed
from .words import IntLike, Word, test_bit, wrap_signed, wrap_unsigned


class Scheme(str, enum.Enum):
    NONE = "none"
    FULL = "full"
    APPROX = "approx"
    MR = "mr"

    def __str__(self) -> str:
        return self.value


def parse_scheme(name: str | Scheme) -> Scheme:
    try:
        return Scheme(str(name).lower())
    except ValueError:
        raise SchemeMismatch(f"unknown correction scheme {name!r}; expected none|full|approx|mr") from None


def check_scheme(config: PackingConfig, scheme: Scheme | str) -> Scheme:
    scheme = parse_scheme(scheme)
    if scheme in (Scheme.FULL, Scheme.APPROX) and config.delta < 0:
        raise SchemeMismatch(f"{scheme} correction needs delta >= 0, got {config.delta}")
    if scheme is Scheme.APPROX and (config.a_signed or not config.w_signed):
        raise SchemeMismatch("approx correction assumes unsigned a and signed w")
    if scheme is Scheme.MR:
        if config.delta >= 0:
            raise SchemeMismatch(f"mr correction needs delta < 0, got {config.delta}")
        if config.uniform_stride() is None:
            raise SchemeMismatch("mr correction needs a uniform lane layout")
    return scheme


def _wrap(v: int, width: int, signed: bool) -> int:
    return (wrap_signed(v, width) if signed else wrap_unsigned(v, width)).value


def correct_full(p: IntLike, config: PackingConfig, lanes: LaneSet) -> LaneSet:
    if config.delta < 0:
        raise SchemeMismatch("full correction needs delta >= 0")
    if not config.lane_signed:
        # nothing below an unsigned lane is negative, so extraction is exact
        return lanes
    values = [lanes[0].value]
    for ln in lanes.lanes[1:]:
        values.append(wrap_signed(ln.value + test_bit(p, ln.offset - 1), ln.width).value)
    return lanes.with_values(values)


def build_approx_correction(config: PackingConfig, w: Sequence[int]) -> Word:
    """C-port addend holding the predicted sign of each lane's lower neighbour."""
    check_scheme(config, Scheme.APPROX)
    lanes = config.lanes
    c = 0
    for below, ln in zip(lanes, lanes[1:]):
        if w[below.w_index] < 0:
            c += 1 << ln.offset
    return Word(c, config.out_width)


def low_bits_product(a: int, w: int, k: int) -> Word:
    """The ``k`` least significant bits of ``a * w``.

    Only the low ``k`` bits of each operand can influence them, which keeps
    the hardware version small for ``k`` of one or two.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    mask = (1 << k) - 1
    return Word(((a & mask) * (w & mask)) & mask, k, False)


def correct_mr(lanes: LaneSet, config: PackingConfig, a: Sequence[int], w: Sequence[int]) -> LaneSet:
    check_scheme(config, Scheme.MR)
    k = -config.delta
    layout = config.lanes
    values = []
    for n, ln in enumerate(lanes):
        if n == len(lanes) - 1:
            values.append(ln.value)
            continue
        above = layout[n + 1]
        lsb = low_bits_product(a[above.a_index], w[above.w_index], k).value
        values.append(_wrap(ln.value - (lsb << (ln.width - k)), ln.width, config.lane_signed))
    return lanes.with_values(values)


@dataclass(frozen=True)
class Evaluation:
    p: Word
    c: Word
    naive: LaneSet
    corrected: LaneSet
    expected: list[int]

    @property
    def errors(self) -> list[int]:
        return [v - e for v, e in zip(self.corrected.values, self.expected)]


def run_scheme(config: PackingConfig, a: Sequence[int], w: Sequence[int],
               scheme: Scheme | str = Scheme.NONE) -> Evaluation:
    """Multiply, extract and correct one operand tuple."""
    scheme = check_scheme(config, scheme)
    expected = [a[ln.a_index] * w[ln.w_index] for ln in config.lanes]
    c = Word(0, config.out_width)
    p = multiply_packed(config, a, w)
    naive = extract_naive(p, config)
    if scheme is Scheme.FULL:
        corrected = correct_full(p, config, naive)
    elif scheme is Scheme.APPROX:
        c = build_approx_correction(config, w)
        p = multiply_packed(config, a, w, c)
        corrected = extract_naive(p, config)
    elif scheme is Scheme.MR:
        corrected = correct_mr(naive, config, a, w)
    else:
        corrected = naive
    return Evaluation(p, c, naive, corrected, expected)
