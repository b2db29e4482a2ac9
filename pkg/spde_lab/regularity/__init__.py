from .increments import (
    ANCHOR_SITES,
    ANCHOR_TIMES,
    anchor_policy,
    dyadic_lags,
    lag_steps,
    path_increment_moments,
    table_from_rows,
    increment_moments,
)
from .fit import MIN_LAGS, MIN_R_SQUARED, fit_window, fit_exponents, secant_slopes, plot_table
from .oracle import theoretical_targets, linear_increment_variance

__all__ = [
    "ANCHOR_SITES",
    "ANCHOR_TIMES",
    "anchor_policy",
    "dyadic_lags",
    "lag_steps",
    "path_increment_moments",
    "table_from_rows",
    "increment_moments",
    "MIN_LAGS",
    "MIN_R_SQUARED",
    "fit_window",
    "fit_exponents",
    "secant_slopes",
    "plot_table",
    "theoretical_targets",
    "linear_increment_variance",
]
