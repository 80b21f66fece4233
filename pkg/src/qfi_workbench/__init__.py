"""Translation generators, quantum Fisher information and Cramer-Rao simulation
for Hamiltonians H(g) depending on a general parameter g."""

from .generator import (
    GeneratorResult,
    build_superoperator,
    compute_generator,
    cross_validate,
    generator_finite_difference,
    generator_quadrature,
    generator_short_time,
    generator_spectral,
    generator_superoperator,
)
from .kernels import BACKEND
from .model import (
    ModelSpec,
    differentiate,
    evaluate,
    load_model,
    parse_model,
    spin_amplitude,
    spin_direction,
    spin_direction_general,
)
from .operators import SpectralDecomposition, eigendecompose, evolution_operator
from .qfi import QfiReport, qfi_max, qfi_pure, qfi_report, sld_qfi, tensor_power_qfi

__version__ = "0.1.0"
