"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DspPackError(Exception):
    """Base class for every error raised by dsppack."""


class ConfigError(DspPackError):
    """A configuration document is malformed or inconsistent."""


class OverlapError(DspPackError):
    def __init__(self, first: int, second: int, message: str | None = None):
        self.first = first
        self.second = second
        super().__init__(message or f"fields {first} and {second} occupy overlapping bits")


class PortOverflow(DspPackError):
    def __init__(self, port: str, value: int, width: int, stage: int | None = None):
        self.port = port
        self.value = value
        self.width = width
        self.stage = stage
        where = f" (stage {stage})" if stage is not None else ""
        super().__init__(f"port {port}: {value} does not fit {width}-bit signed{where}")


class PreadderOverflow(DspPackError):
    def __init__(self, value: int, width: int, stage: int | None = None):
        self.value = value
        self.width = width
        self.stage = stage
        where = f" (stage {stage})" if stage is not None else ""
        super().__init__(f"pre-adder sum {value} exceeds {width}-bit signed range{where}")


class NonuniformWidths(ConfigError):
    """Auto-layout was requested for lanes of differing result width."""


class OperandRange(DspPackError):
    def __init__(self, operand: str, index: int, value: int, lo: int, hi: int):
        self.operand = operand
        self.index = index
        self.value = value
        super().__init__(f"{operand}[{index}] = {value} outside [{lo}, {hi}]")


class InfeasibleConfig(DspPackError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        msgs = "; ".join(d.message for d in diagnostics.errors)
        super().__init__(f"configuration infeasible for its target: {msgs}")


class SchemeMismatch(DspPackError):
    """A correction scheme was applied to a configuration it does not support."""


class ConfigOverflow(DspPackError):
    """Packed addition lanes do not fit the adder width."""


class DomainTooLarge(DspPackError):
    def __init__(self, size: int, ceiling: int):
        self.size = size
        self.ceiling = ceiling
        super().__init__(f"exhaustive domain of {size} tuples exceeds ceiling {ceiling}; use sampling")


class InvariantViolation(DspPackError):
    """An enumeration observed an error outside a proven bound."""
