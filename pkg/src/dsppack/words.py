"""Two's-complement words of arbitrary width and bit-field helpers.

Values are carried as unbounded Python ints; a width is only enforced when
a :class:`Word` is constructed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .errors import OverlapError

MAX_WIDTH = 128


def signed_range(width: int) -> tuple[int, int]:
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def unsigned_range(width: int) -> tuple[int, int]:
    return 0, (1 << width) - 1


@dataclass(frozen=True)
class Word:
    """An integer together with its bit width and signedness."""

    value: int
    width: int
    signed: bool = True

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} outside 1..{MAX_WIDTH}")
        lo, hi = signed_range(self.width) if self.signed else unsigned_range(self.width)
        if not lo <= self.value <= hi:
            kind = "signed" if self.signed else "unsigned"
            raise ValueError(f"{self.value} does not fit {self.width}-bit {kind}")

    @property
    def bits(self) -> int:
        """Raw two's-complement bit pattern as a non-negative int."""
        return self.value & ((1 << self.width) - 1)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def binary(self, group: int = 4) -> str:
        s = format(self.bits, f"0{self.width}b")
        if not group:
            return s
        head = len(s) % group
        parts = [s[:head]] if head else []
        parts += [s[i:i + group] for i in range(head, len(s), group)]
        return " ".join(parts)


IntLike = Union[int, Word]


def wrap_signed(v: IntLike, width: int) -> Word:
    half = 1 << (width - 1)
    return Word(((int(v) + half) % (1 << width)) - half, width, True)


def wrap_unsigned(v: IntLike, width: int) -> Word:
    return Word(int(v) % (1 << width), width, False)


def extract_field(v: IntLike, offset: int, width: int, signed: bool = True) -> Word:
    """Arithmetic-shift ``v`` right by ``offset`` and keep ``width`` bits.

    The shift floors toward negative infinity, which is exactly what a
    hardware bit-select of a two's-complement word does.
    """
    if offset < 0:
        raise ValueError("offset must be non-negative")
    shifted = int(v) >> offset
    return wrap_signed(shifted, width) if signed else wrap_unsigned(shifted, width)


def test_bit(v: IntLike, index: int) -> int:
    if index < 0:
        raise ValueError("bit index must be non-negative")
    return (int(v) >> index) & 1


# keep pytest from collecting test_bit when imported into a test module
test_bit.__test__ = False  # type: ignore[attr-defined]


def or_pack(fields: Iterable[tuple[Word, int]], width: int = 48) -> Word:
    """Place each field at its offset inside a ``width``-bit container.

    Unsigned fields occupy ``[offset, offset + field.width)``; signed fields
    additionally occupy their sign extension up to the container's top bit.
    Any intersection raises :class:`OverlapError`.
    """
    fields = list(fields)
    spans = []
    for idx, (f, off) in enumerate(fields):
        if off < 0 or off + f.width > width:
            raise ValueError(f"field {idx} at offset {off} does not fit a {width}-bit container")
        spans.append((off, width if f.signed else off + f.width))
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (lo1, hi1), (lo2, hi2) = spans[i], spans[j]
            if lo1 < hi2 and lo2 < hi1:
                raise OverlapError(i, j)
    total = sum(f.value << off for f, off in fields)
    if any(f.signed for f, _ in fields):
        return wrap_signed(total, width)
    return Word(total, width, False)
