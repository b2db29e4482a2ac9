from .types import (
    CovarianceKind,
    AnalyticRule,
    Representation,
    Direction,
    ExperimentKind,
    RunStatus,
    CovarianceModel,
    ConditionVerdict,
    NoiseIncrementField,
    OperatorSpec,
    Coefficients,
    SolutionField,
    PicardTrace,
    FactorizationConfig,
    IncrementMomentTable,
    ExponentFit,
    RegularityReport,
    RunRecord,
    ArtifactRecord,
    LabError,
    ConfigError,
    ParameterDomainError,
    OperatorSpecError,
    NumericalError,
    NumericalIntegrationError,
    BlowUpError,
    DegenerateDataError,
    ShapeError,
    InvariantViolation,
    DBError,
)

from .grid import SpatialGrid, TimeGrid
from .config import (
    SCHEMA_PATH,
    ExperimentConfig,
    load_schema,
    validate_document,
    parse_config,
    read_config,
    covariance_from_section,
)
from .log import logger, configure_logging
from .interfaces import CovarianceBase
from .utils import (
    checked_quad,
    integration_retry,
    derive_seed,
    path_rng,
    geometric_sum,
)


__all__ = [
    "SCHEMA_PATH",
    "ExperimentConfig",
    "load_schema",
    "validate_document",
    "parse_config",
    "read_config",
    "covariance_from_section",
    "CovarianceBase",
    "CovarianceKind",
    "AnalyticRule",
    "Representation",
    "Direction",
    "ExperimentKind",
    "RunStatus",
    "CovarianceModel",
    "ConditionVerdict",
    "NoiseIncrementField",
    "OperatorSpec",
    "Coefficients",
    "SolutionField",
    "PicardTrace",
    "FactorizationConfig",
    "IncrementMomentTable",
    "ExponentFit",
    "RegularityReport",
    "RunRecord",
    "ArtifactRecord",
    "SpatialGrid",
    "TimeGrid",
    "LabError",
    "ConfigError",
    "ParameterDomainError",
    "OperatorSpecError",
    "NumericalError",
    "NumericalIntegrationError",
    "BlowUpError",
    "DegenerateDataError",
    "ShapeError",
    "InvariantViolation",
    "DBError",
    "logger",
    "configure_logging",
    "checked_quad",
    "integration_retry",
    "derive_seed",
    "path_rng",
    "geometric_sum",
]
