from .coefficients import (
    COEFFICIENT_PRESETS,
    INITIAL_PRESETS,
    make_coefficients,
    check_coefficients,
    initial_datum,
)
from .euler import initial_field, initial_history, euler_march, euler_solve, mild_residual
from .picard import PICARD_MAX_STEPS, picard_iterate, picard_solve
from .moments import MomentAccumulator, moment_sup, moment_sup_with_error
from .export import export_solution, solution_rows

__all__ = [
    "COEFFICIENT_PRESETS",
    "INITIAL_PRESETS",
    "make_coefficients",
    "check_coefficients",
    "initial_datum",
    "initial_field",
    "initial_history",
    "euler_march",
    "euler_solve",
    "mild_residual",
    "PICARD_MAX_STEPS",
    "picard_iterate",
    "picard_solve",
    "MomentAccumulator",
    "moment_sup",
    "moment_sup_with_error",
    "export_solution",
    "solution_rows",
]
