"""Bit-exact modelling of packed low-precision arithmetic on FPGA DSP blocks."""

from .addpack import AdditionPackConfig, add_packed, addpack_stats, feasible_layouts
from .analysis import (EnumerationSpec, ErrorStats, LaneStats, density_report, error_stats, oracle,
                       render)
from .correction import (Scheme, build_approx_correction, correct_full, correct_mr, low_bits_product,
                         run_scheme)
from .dsp import DSP48E2, DspInputs, PortSpec, chain_accumulate
from .errors import (ConfigError, ConfigOverflow, DomainTooLarge, DspPackError, InfeasibleConfig,
                     NonuniformWidths, OperandRange, OverlapError, PortOverflow, PreadderOverflow,
                     SchemeMismatch)
from .kernels import DEFAULT_BACKEND as KERNEL_BACKEND
from .packing import (LaneSet, PackingConfig, derive_layout, extract_naive, make_config,
                      multiply_packed, pack_operands, packing_density, validate)
from .presets import PRESETS, load_config, preset
from .words import Word, extract_field, or_pack, test_bit, wrap_signed

__version__ = "0.1.0"
