from .beta import beta_weight, beta_quadrature
from .factorize import (
    y_delta_weights,
    product_weights,
    compute_Y_delta,
    reconstruct,
    direct_convolution,
    round_trip,
    default_config,
)

__all__ = [
    "beta_weight",
    "beta_quadrature",
    "y_delta_weights",
    "product_weights",
    "compute_Y_delta",
    "reconstruct",
    "direct_convolution",
    "round_trip",
    "default_config",
]
