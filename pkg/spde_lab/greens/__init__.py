from .operator import (
    laplacian_operator,
    sinusoidal_operator,
    expression_operator,
    check_operator,
    constant_coefficients,
)
from .kernel import heat_kernel_eval, lattice_heat_kernel, dominating_kernel
from .propagator import PropagatorSet
from .spectral import SpectralPropagator
from .crank_nicolson import CrankNicolsonPropagator, explicit_euler_matrix
from .builder import build_propagator
from .checks import (
    MASS_TOLERANCE,
    NEGATIVITY_SLACK,
    GaussianBoundReport,
    KernelIncrementReport,
    StepDiagnostics,
    step_matrix,
    step_diagnostics,
    semigroup_residual,
    gaussian_bound_check,
    kernel_increment_check,
    kernel_increment_constant,
)

__all__ = [
    "laplacian_operator",
    "sinusoidal_operator",
    "expression_operator",
    "check_operator",
    "constant_coefficients",
    "heat_kernel_eval",
    "lattice_heat_kernel",
    "dominating_kernel",
    "PropagatorSet",
    "SpectralPropagator",
    "CrankNicolsonPropagator",
    "explicit_euler_matrix",
    "build_propagator",
    "MASS_TOLERANCE",
    "NEGATIVITY_SLACK",
    "GaussianBoundReport",
    "KernelIncrementReport",
    "StepDiagnostics",
    "step_matrix",
    "step_diagnostics",
    "semigroup_residual",
    "gaussian_bound_check",
    "kernel_increment_check",
    "kernel_increment_constant",
]
