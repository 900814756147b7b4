"""Multiplication packing: layouts, feasibility, operand packing and extraction.

A packing places the entries of two small vectors ``a`` and ``w`` at bit
offsets inside two wide factors so that one wide multiplication yields the
whole outer product ``a * w^T``.  Product ``a_i * w_j`` lands at offset
``a_off[i] + w_off[j]`` with width ``a_wdth[i] + w_wdth[j]``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterator, Mapping, Sequence

from . import dsp
from .dsp import DSP48E2, DspInputs, PortSpec
from .errors import ConfigError, InfeasibleConfig, NonuniformWidths, OperandRange, OverlapError
from .words import IntLike, Word, extract_field, or_pack, signed_range, unsigned_range, wrap_signed

TARGETS = ("ideal", "dsp48e2")


@dataclass(frozen=True)
class Lane:
    index: int
    a_index: int
    w_index: int
    offset: int
    width: int

    @property
    def name(self) -> str:
        return f"a{self.a_index}w{self.w_index}"


@dataclass(frozen=True)
class PackingConfig:
    a_widths: tuple[int, ...]
    w_widths: tuple[int, ...]
    a_offsets: tuple[int, ...]
    w_offsets: tuple[int, ...]
    delta: int
    a_signed: bool = False
    w_signed: bool = True
    target: str = "ideal"
    ports: PortSpec = DSP48E2
    output_width: int = 48
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("a_widths", "w_widths", "a_offsets", "w_offsets"):
            object.__setattr__(self, attr, tuple(int(x) for x in getattr(self, attr)))
        if not self.a_widths or len(self.a_widths) != len(self.a_offsets):
            raise ConfigError("a_widths and a_offsets must be non-empty and of equal length")
        if not self.w_widths or len(self.w_widths) != len(self.w_offsets):
            raise ConfigError("w_widths and w_offsets must be non-empty and of equal length")
        if min(self.a_widths + self.w_widths) < 1:
            raise ConfigError("operand widths must be at least 1 bit")
        for label, offs in (("a_offsets", self.a_offsets), ("w_offsets", self.w_offsets)):
            if offs[0] < 0 or any(o2 <= o1 for o1, o2 in zip(offs, offs[1:])):
                raise ConfigError(f"{label} must be non-negative and strictly increasing")
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        if not 2 <= self.out_width <= 128:
            raise ConfigError("output width must lie in 2..128")

    @property
    def physical(self) -> bool:
        return self.target == "dsp48e2"

    @property
    def out_width(self) -> int:
        return self.ports.width_p if self.physical else self.output_width

    @property
    def lane_signed(self) -> bool:
        return self.a_signed or self.w_signed

    @property
    def lanes(self) -> tuple[Lane, ...]:
        """Result lanes sorted by offset (ties broken by the a*w index order)."""
        raw = []
        for j, (wo, ww) in enumerate(zip(self.w_offsets, self.w_widths)):
            for i, (ao, aw) in enumerate(zip(self.a_offsets, self.a_widths)):
                raw.append((ao + wo, j * len(self.a_offsets) + i, i, j, aw + ww))
        raw.sort()
        return tuple(Lane(n, i, j, off, width) for n, (off, _, i, j, width) in enumerate(raw))

    @property
    def lane_count(self) -> int:
        return len(self.a_offsets) * len(self.w_offsets)

    def effective_padding(self) -> list[int]:
        lanes = self.lanes
        return [nxt.offset - (cur.offset + cur.width) for cur, nxt in zip(lanes, lanes[1:])]

    def uniform_stride(self) -> int | None:
        """Common lane stride if every lane has the same width and spacing."""
        lanes = self.lanes
        if len({ln.width for ln in lanes}) != 1:
            return None
        if len(lanes) == 1:
            return lanes[0].width + self.delta
        strides = {b.offset - a.offset for a, b in zip(lanes, lanes[1:])}
        return strides.pop() if len(strides) == 1 else None

    def a_range(self, i: int) -> tuple[int, int]:
        w = self.a_widths[i]
        return signed_range(w) if self.a_signed else unsigned_range(w)

    def w_range(self, j: int) -> tuple[int, int]:
        w = self.w_widths[j]
        return signed_range(w) if self.w_signed else unsigned_range(w)

    def operand_ranges(self) -> list[tuple[int, int]]:
        return [self.a_range(i) for i in range(len(self.a_widths))] + \
               [self.w_range(j) for j in range(len(self.w_widths))]

    def domain_size(self) -> int:
        n = 1
        for lo, hi in self.operand_ranges():
            n *= hi - lo + 1
        return n

    def to_dict(self) -> dict[str, Any]:
        d = {
            "a_widths": list(self.a_widths),
            "w_widths": list(self.w_widths),
            "delta": self.delta,
            "a_offsets": list(self.a_offsets),
            "w_offsets": list(self.w_offsets),
            "a_signed": self.a_signed,
            "w_signed": self.w_signed,
            "target": self.target,
            "output_width": self.out_width,
        }
        if self.ports != DSP48E2:
            ports = asdict(self.ports)
            ports["mult_shape"] = list(ports["mult_shape"])
            d["ports"] = ports
        if self.name:
            d["name"] = self.name
        return d


def derive_layout(a_widths: Sequence[int], w_widths: Sequence[int], delta: int,
                  **kwargs) -> PackingConfig:
    """Build the regular layout with stride ``r_width + delta``.

    ``a`` entries are spaced one stride apart; ``w`` entries one full row
    of ``a`` strides apart, so lanes tile the output without gaps.
    """
    widths = {aw + ww for aw in a_widths for ww in w_widths}
    if len(widths) != 1:
        raise NonuniformWidths(
            f"auto-layout needs a uniform result width, got {sorted(widths)}; give explicit offsets")
    stride = widths.pop() + delta
    if stride < 1:
        raise ConfigError(f"padding {delta} leaves a non-positive lane stride")
    a_offsets = [i * stride for i in range(len(a_widths))]
    w_offsets = [j * stride * len(a_widths) for j in range(len(w_widths))]
    return PackingConfig(tuple(a_widths), tuple(w_widths), tuple(a_offsets), tuple(w_offsets),
                         delta, **kwargs)


def make_config(a_widths: Sequence[int], w_widths: Sequence[int], delta: int | None = None,
                a_offsets: Sequence[int] | None = None, w_offsets: Sequence[int] | None = None,
                **kwargs) -> PackingConfig:
    """Auto-layout when offsets are absent, otherwise take them verbatim."""
    if a_offsets is None and w_offsets is None:
        if delta is None:
            raise ConfigError("delta is required when offsets are not given")
        return derive_layout(a_widths, w_widths, delta, **kwargs)
    if a_offsets is None or w_offsets is None:
        raise ConfigError("give both a_offsets and w_offsets, or neither")
    if delta is None:
        probe = PackingConfig(tuple(a_widths), tuple(w_widths), tuple(a_offsets), tuple(w_offsets),
                              0, **kwargs)
        pads = probe.effective_padding()
        delta = min(pads) if pads else 0
    return PackingConfig(tuple(a_widths), tuple(w_widths), tuple(a_offsets), tuple(w_offsets),
                         delta, **kwargs)


_CONFIG_KEYS = {"a_widths", "w_widths", "delta", "a_offsets", "w_offsets", "a_signed",
                "w_signed", "target", "output_width", "ports", "name"}


def config_from_dict(doc: Mapping[str, Any]) -> PackingConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    for key in ("a_widths", "w_widths"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}")
        if not isinstance(doc[key], list) or not all(isinstance(x, int) for x in doc[key]):
            raise ConfigError(f"{key} must be a list of integers")
    kwargs: dict[str, Any] = {}
    for key in ("a_signed", "w_signed"):
        if key in doc:
            if not isinstance(doc[key], bool):
                raise ConfigError(f"{key} must be a boolean")
            kwargs[key] = doc[key]
    if "target" in doc:
        kwargs["target"] = doc["target"]
    if "output_width" in doc:
        kwargs["output_width"] = int(doc["output_width"])
    if "ports" in doc:
        ports = dict(doc["ports"])
        if "mult_shape" in ports:
            ports["mult_shape"] = tuple(ports["mult_shape"])
        try:
            kwargs["ports"] = PortSpec(**ports)
        except TypeError as exc:
            raise ConfigError(f"bad ports block: {exc}") from None
    if "name" in doc:
        kwargs["name"] = str(doc["name"])
    if kwargs.get("target") == "dsp48e2" and "output_width" in kwargs:
        width_p = kwargs.get("ports", DSP48E2).width_p
        if kwargs.pop("output_width") != width_p:
            raise ConfigError(f"output_width must equal the P width ({width_p}) on a physical target")
    delta = doc.get("delta")
    if delta is not None and not isinstance(delta, int):
        raise ConfigError("delta must be an integer")
    return make_config(doc["a_widths"], doc["w_widths"], delta,
                       doc.get("a_offsets"), doc.get("w_offsets"), **kwargs)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str


@dataclass(frozen=True)
class Diagnostics:
    items: tuple[Diagnostic, ...]
    padding: tuple[int, ...]

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.items if d.severity == "warning"]

    @property
    def feasible(self) -> bool:
        return not self.errors

    @property
    def overlaps(self) -> list[tuple[int, int]]:
        """(boundary index, overlapping bit count) for every negative padding."""
        return [(n, -p) for n, p in enumerate(self.padding) if p < 0]

    def __iter__(self) -> Iterator[Diagnostic]:
        return iter(self.items)


def _factor_extremes(widths, offsets, signed) -> tuple[int, int]:
    lo = hi = 0
    for w, off in zip(widths, offsets):
        flo, fhi = signed_range(w) if signed else unsigned_range(w)
        lo += flo << off
        hi += fhi << off
    return lo, hi


def validate(config: PackingConfig) -> Diagnostics:
    items: list[Diagnostic] = []

    def add(sev, code, msg):
        items.append(Diagnostic(sev, code, msg))

    lanes = config.lanes
    offsets = [ln.offset for ln in lanes]
    if len(set(offsets)) != len(offsets):
        add("error", "duplicate-lane", "two results share the same offset; products are not separable")
    padding = config.effective_padding()
    for n, p in enumerate(padding):
        if p < 0:
            add("warning", "overlap",
                f"{lanes[n + 1].name} overlaps {lanes[n].name} by {-p} bit(s)")
    if padding and min(padding) != config.delta:
        add("warning", "delta-mismatch",
            f"declared delta {config.delta} differs from the smallest effective padding {min(padding)}")

    top = lanes[-1]
    if top.offset + top.width > config.out_width:
        add("error", "output-overflow",
            f"topmost result {top.name} ends at bit {top.offset + top.width}, beyond the "
            f"{config.out_width}-bit output")

    if config.physical:
        _validate_physical(config, add)

    return Diagnostics(tuple(items), tuple(padding))


def _validate_physical(config: PackingConfig, add) -> None:
    ports = config.ports
    if config.a_signed:
        add("error", "signed-a", "signed a entries cannot share the B port without sign-extension overlap")
    else:
        ends = [o + w for o, w in zip(config.a_offsets, config.a_widths)]
        for i in range(len(ends) - 1):
            if ends[i] > config.a_offsets[i + 1]:
                add("error", "b-overlap", f"a{i} and a{i + 1} overlap on the B port")
        if ends[-1] > ports.width_b - 1:
            add("error", "b-width",
                f"a fields reach bit {ends[-1] - 1}; the {ports.width_b}-bit signed B port holds "
                f"unsigned data only up to bit {ports.width_b - 2}")

    if config.w_signed and len(config.w_widths) > 2:
        add("error", "w-ports",
            f"{len(config.w_widths)} signed w entries but only two pre-adder ports (A, D)")
    else:
        # A gets w0, D gets the rest; both are 27-bit signed words
        for port, idxs in (("A", [0]), ("D", list(range(1, len(config.w_widths))))):
            if not idxs:
                continue
            lo, hi = _factor_extremes([config.w_widths[j] for j in idxs],
                                      [config.w_offsets[j] for j in idxs], config.w_signed)
            width = ports.width_a if port == "A" else ports.width_d
            plo, phi = signed_range(width)
            if lo < plo or hi > phi:
                add("error", f"{port.lower()}-width", f"w entries on port {port} exceed {width}-bit signed")
            if not config.w_signed and len(idxs) > 1:
                ends = [config.w_offsets[j] + config.w_widths[j] for j in idxs]
                for k in range(len(idxs) - 1):
                    if ends[k] > config.w_offsets[idxs[k + 1]]:
                        add("error", "d-overlap", f"w entries overlap on port {port}")
        wlo, whi = _factor_extremes(config.w_widths, config.w_offsets, config.w_signed)
        plo, phi = signed_range(ports.preadder_width)
        if wlo < plo or whi > phi:
            add("error", "preadder", f"A + D spans [{wlo}, {whi}], beyond the {ports.preadder_width}-bit pre-adder")

    alo, ahi = _factor_extremes(config.a_widths, config.a_offsets, config.a_signed)
    wlo, whi = _factor_extremes(config.w_widths, config.w_offsets, config.w_signed)
    corners = [x * y for x in (alo, ahi) for y in (wlo, whi)]
    plo, phi = signed_range(ports.width_p)
    if min(corners) < plo or max(corners) > phi:
        add("warning", "p-wrap", f"the product can exceed {ports.width_p}-bit signed and will wrap")


def require_feasible(config: PackingConfig) -> Diagnostics:
    diag = validate(config)
    if not diag.feasible:
        raise InfeasibleConfig(diag)
    return diag


# -- evaluation -------------------------------------------------------------


def _check_operands(config: PackingConfig, a: Sequence[int], w: Sequence[int]) -> None:
    if len(a) != len(config.a_widths):
        raise OperandRange("a", len(a), len(a), 0, len(config.a_widths))
    if len(w) != len(config.w_widths):
        raise OperandRange("w", len(w), len(w), 0, len(config.w_widths))
    for i, v in enumerate(a):
        lo, hi = config.a_range(i)
        if not lo <= v <= hi:
            raise OperandRange("a", i, v, lo, hi)
    for j, v in enumerate(w):
        lo, hi = config.w_range(j)
        if not lo <= v <= hi:
            raise OperandRange("w", j, v, lo, hi)


def factors(config: PackingConfig, a: Sequence[int], w: Sequence[int]) -> tuple[int, int]:
    """The two wide factors of the packed product, as unbounded ints."""
    _check_operands(config, a, w)
    fa = sum(v << off for v, off in zip(a, config.a_offsets))
    fw = sum(v << off for v, off in zip(w, config.w_offsets))
    return fa, fw


def pack_operands(config: PackingConfig, a: Sequence[int], w: Sequence[int],
                  c: IntLike = 0):
    """Map operands onto DSP ports (physical target) or wide factors (ideal).

    Physical: ``B`` holds every ``a`` field, ``A`` holds ``w0`` sign-extended
    and ``D`` holds the remaining ``w`` entries.
    """
    if not config.physical:
        return factors(config, a, w)
    _check_operands(config, a, w)
    ports = config.ports
    b = or_pack([(Word(v, wd, config.a_signed), off)
                 for v, wd, off in zip(a, config.a_widths, config.a_offsets)], ports.width_b)
    a_port = or_pack([(Word(w[0], config.w_widths[0], config.w_signed), config.w_offsets[0])],
                     ports.width_a)
    d_fields = [(Word(v, wd, config.w_signed), off)
                for v, wd, off in zip(w[1:], config.w_widths[1:], config.w_offsets[1:])]
    d_port = or_pack(d_fields, ports.width_d) if d_fields else Word(0, ports.width_d)
    # the P/C ports are signed; or_pack may return unsigned containers
    return DspInputs.from_ints(int(a_port), int(b), int(c), int(d_port), 0, ports)


def pack_batch(config: PackingConfig, a_ops, w_ops):
    """Port words (A, B, D) for many operand tuples at once.

    Only valid for configurations that pass :func:`validate`; fields are
    then disjoint, so or-packing reduces to a shifted sum.
    """
    import numpy as np

    if not config.physical:
        raise ValueError("pack_batch models the physical ports only")
    a_ops = np.asarray(a_ops, dtype=np.int64)
    w_ops = np.asarray(w_ops, dtype=np.int64)
    b = sum(a_ops[:, i] * (1 << off) for i, off in enumerate(config.a_offsets))
    a_port = w_ops[:, 0] * (1 << config.w_offsets[0])
    d = np.zeros_like(a_port)
    for j in range(1, len(config.w_offsets)):
        d = d + w_ops[:, j] * (1 << config.w_offsets[j])
    return a_port, b, d


def multiply_packed(config: PackingConfig, a: Sequence[int], w: Sequence[int],
                    c: IntLike = 0) -> Word:
    """One packed multiplication; ``c`` is the accumulator addend (C port)."""
    if config.physical:
        return dsp.eval(pack_operands(config, a, w, c), config.ports)
    fa, fw = factors(config, a, w)
    return wrap_signed(fa * fw + int(c), config.out_width)


@dataclass(frozen=True)
class LaneValue:
    index: int
    name: str
    offset: int
    width: int
    raw: Word
    value: int


@dataclass(frozen=True)
class LaneSet:
    lanes: tuple[LaneValue, ...]

    def __iter__(self) -> Iterator[LaneValue]:
        return iter(self.lanes)

    def __len__(self) -> int:
        return len(self.lanes)

    def __getitem__(self, n: int) -> LaneValue:
        return self.lanes[n]

    @property
    def values(self) -> list[int]:
        return [ln.value for ln in self.lanes]

    def with_values(self, values: Sequence[int]) -> "LaneSet":
        return LaneSet(tuple(replace(ln, value=v) for ln, v in zip(self.lanes, values)))


def extract_naive(p: IntLike, config: PackingConfig, extra_bits: int = 0) -> LaneSet:
    """Cut every lane out of ``p`` by shift-and-mask.

    ``extra_bits`` widens each field upward into the padding, which is how
    accumulated results are read back.
    """
    out = []
    for ln in config.lanes:
        width = ln.width + extra_bits
        raw = extract_field(p, ln.offset, width, signed=False)
        value = extract_field(p, ln.offset, width, signed=config.lane_signed).value
        out.append(LaneValue(ln.index, ln.name, ln.offset, width, raw, value))
    return LaneSet(tuple(out))


def packing_density(config: PackingConfig, total_bits: int | None = None) -> Fraction:
    total = config.out_width if total_bits is None else total_bits
    return Fraction(sum(ln.width for ln in config.lanes), total)


def chain_multiply(config: PackingConfig, operands: Sequence[tuple[Sequence[int], Sequence[int]]]) -> Word:
    """Accumulate several packed products, cascading DSPs on a physical target."""
    if config.physical:
        stages = [pack_operands(config, a, w) for a, w in operands]
        return dsp.chain_accumulate(stages, config.ports)
    total = 0
    for a, w in operands:
        fa, fw = factors(config, a, w)
        total += fa * fw
    return wrap_signed(total, config.out_width)


def with_target(config: PackingConfig, target: str) -> PackingConfig:
    return replace(config, target=target)


__all__ = [
    "Lane", "LaneSet", "LaneValue", "PackingConfig", "Diagnostic", "Diagnostics",
    "derive_layout", "make_config", "config_from_dict", "validate", "require_feasible",
    "factors", "pack_operands", "pack_batch", "multiply_packed", "extract_naive", "packing_density",
    "chain_multiply", "with_target", "OverlapError",
]
