from .white import WhiteCovariance
from .riesz import RieszCovariance
from .bessel import BesselCovariance, bessel_integral
from .fractional import FractionalCovariance
from .custom import CustomSpectralCovariance
from .factory import (
    create_covariance,
    spectral_density,
    covariance_density,
    spectral_constant,
    critical_eta,
    lattice_weights,
)
from .condition import (
    DEFAULT_RADII,
    decide_condition,
    dalang_condition,
    truncated_integrals,
)

__all__ = [
    "WhiteCovariance",
    "RieszCovariance",
    "BesselCovariance",
    "FractionalCovariance",
    "CustomSpectralCovariance",
    "bessel_integral",
    "create_covariance",
    "spectral_density",
    "covariance_density",
    "spectral_constant",
    "critical_eta",
    "lattice_weights",
    "DEFAULT_RADII",
    "decide_condition",
    "dalang_condition",
    "truncated_integrals",
]
