__version__ = "0.1.0"
__author__ = "spde_lab contributors"
__license__ = "AGPL-3.0"
__copyright__ = "Copyright (c) 2025 spde_lab contributors"

from .components import ExperimentComponents, build_components, load_config
from .experiment_flow import ExperimentFlow, ExperimentResult
from .main import SPDELab, main, run_experiment

__all__ = [
    "ExperimentComponents",
    "build_components",
    "load_config",
    "ExperimentFlow",
    "ExperimentResult",
    "SPDELab",
    "main",
    "run_experiment",
]
