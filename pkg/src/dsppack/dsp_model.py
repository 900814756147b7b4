"""Alias of :mod:`dsppack.dsp` under its longer name."""

from .dsp import DSP48E2, DspInputs, PortSpec, chain_accumulate, eval, eval_batch, wrap_array  # noqa: A004

__all__ = ["DSP48E2", "DspInputs", "PortSpec", "chain_accumulate", "eval", "eval_batch", "wrap_array"]
