from .sampler import NoiseSampler, check_admissible, sample_increment, sample_path
from .validation import (
    IsometryResult,
    NormalityResult,
    empirical_covariance,
    periodized_covariance,
    convolution_variance,
    isometry_check,
    normality_check,
    kernel_self_consistency,
)
from .dump import MAGIC, write_noise_dump, read_noise_dump

__all__ = [
    "NoiseSampler",
    "check_admissible",
    "sample_increment",
    "sample_path",
    "IsometryResult",
    "NormalityResult",
    "empirical_covariance",
    "periodized_covariance",
    "convolution_variance",
    "isometry_check",
    "normality_check",
    "kernel_self_consistency",
    "MAGIC",
    "write_noise_dump",
    "read_noise_dump",
]
