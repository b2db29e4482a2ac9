from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .common import (  # type: ignore
    Coefficients,
    ConfigError,
    CovarianceModel,
    ExperimentConfig,
    ExperimentKind,
    FactorizationConfig,
    OperatorSpec,
    ParameterDomainError,
    SpatialGrid,
    TimeGrid,
    covariance_from_section,
    path_rng,
    read_config,
)
from .greens import (  # type: ignore
    PropagatorSet,
    build_propagator,
    check_operator,
    expression_operator,
    laplacian_operator,
    sinusoidal_operator,
)
from .noise import check_admissible  # type: ignore
from .solver import (  # type: ignore
    COEFFICIENT_PRESETS,
    PICARD_MAX_STEPS,
    check_coefficients,
    initial_datum,
    make_coefficients,
)
from .factorization import default_config  # type: ignore

INITIAL_PARAMS = {"zero": (), "constant": ("value",), "bump": ("amplitude", "width")}
NOISE_INTEGRANDS = ("constant", "decaying", "oscillating")
CONDITION_FAMILIES = ("riesz", "bessel", "fractional")


@dataclass
class ExperimentComponents:
    """由配置构造并校验过的数值组件。"""

    config: ExperimentConfig
    model: CovarianceModel
    grid: SpatialGrid
    time_grid: TimeGrid
    operator: OperatorSpec
    coefficients: Coefficients
    u0: np.ndarray
    factorization: FactorizationConfig | None = None

    def propagator(
        self, grid: SpatialGrid | None = None, time_grid: TimeGrid | None = None, workers: int = 1
    ) -> PropagatorSet:
        return build_propagator(
            self.operator,
            grid or self.grid,
            time_grid or self.time_grid,
            monotone=self.config.section("operator")["monotone"],
            workers=workers,
        )

    def initial_on(self, grid: SpatialGrid) -> np.ndarray:
        """在另一网格上重建初值 (用于加密网格)。"""
        if grid == self.grid:
            return self.u0
        return _initial_from_section(self.config.section("initial"), grid)


def build_operator(section: dict[str, Any], grid: SpatialGrid) -> OperatorSpec:
    """由 operator 节构造算子。"""
    preset = section["preset"]
    if preset == "laplacian":
        return laplacian_operator(
            grid.k, section["diffusivity"], [float(b) for b in section["drift"]], section["decay"]
        )
    elif preset == "sinusoidal":
        return sinusoidal_operator(grid.k, grid.L, section["diffusivity"], section["amplitude"])
    elif preset == "expression":
        return expression_operator(
            grid.k,
            section["diffusion_expr"],
            section["drift_expr"],
            section["decay_expr"],
            section["rho"],
        )
    raise ConfigError(f"未知的算子预设: {preset}")


def _preset_params(section: dict[str, Any], allowed: tuple[str, ...]) -> dict[str, float]:
    return {key: section[key] for key in allowed}


def build_coefficients(section: dict[str, Any]) -> Coefficients:
    sigma, drift = section["sigma"], section["drift"]
    return make_coefficients(
        (sigma["preset"], _preset_params(sigma, COEFFICIENT_PRESETS[sigma["preset"]])),
        (drift["preset"], _preset_params(drift, COEFFICIENT_PRESETS[drift["preset"]])),
    )


def _initial_from_section(section: dict[str, Any], grid: SpatialGrid) -> np.ndarray:
    preset = section["preset"]
    return initial_datum(grid, preset, **_preset_params(section, INITIAL_PARAMS[preset]))


def _check_subset(values: list, allowed: tuple[str, ...], dotted: str) -> None:
    unknown = [v for v in values if v not in allowed]
    if unknown or not values:
        raise ConfigError(f"配置项 {dotted} 只能取 {list(allowed)} 中的值 (当前为 {values})")


def _check_kind_sections(cfg: ExperimentConfig, grid: SpatialGrid, time_grid: TimeGrid) -> None:
    kind = cfg.kind
    if kind is ExperimentKind.Picard:
        picard = cfg.section("picard")
        if picard["max_iter"] < 2:
            raise ConfigError(f"picard.max_iter 必须不小于 2 (当前 {picard['max_iter']})")
        if time_grid.steps > PICARD_MAX_STEPS:
            raise ParameterDomainError(
                f"Picard 实验的时间步数不得超过 {PICARD_MAX_STEPS} (time.M={time_grid.steps})"
            )
    elif kind is ExperimentKind.Regularity:
        section = cfg.section("regularity")
        _check_subset(section["directions"], ("time", "space"), "regularity.directions")
        if cfg.paths < 2:
            raise ConfigError("正则性估计至少需要 2 条路径")
        if not 0 < section["confidence"] < 1:
            raise ConfigError("regularity.confidence 必须位于 ]0,1[ 内")
    elif kind is ExperimentKind.NoiseValidate:
        section = cfg.section("noise")
        _check_subset(section["integrands"], NOISE_INTEGRANDS, "noise.integrands")
        if section["samples"] < 2:
            raise ConfigError("noise.samples 至少为 2")
    elif kind is ExperimentKind.ConditionCheck:
        section = cfg.section("condition")
        _check_subset(section["families"], CONDITION_FAMILIES, "condition.families")
        if section["draws"] < 1:
            raise ConfigError("condition.draws 必须为正")
        if not 0 <= section["eta"] <= 1:
            raise ConfigError("condition.eta 必须位于 [0,1] 内")


def build_components(cfg: ExperimentConfig) -> ExperimentComponents:
    """
    由配置构造协方差、网格、算子、系数与初值，并重新校验各自的不变量。

    Raises:
        ConfigError: 任何组件的参数不合法。
    """
    model = covariance_from_section(cfg.section("covariance"))
    grid_section, time_section = cfg.section("grid"), cfg.section("time")
    grid = SpatialGrid(model.k, grid_section["N"], grid_section["L"])
    time_grid = TimeGrid(time_section["T"], time_section["M"])
    operator = build_operator(cfg.section("operator"), grid)
    rng = path_rng(cfg.seed, -1)
    check_operator(operator, grid, rng, T=time_grid.T)
    if not operator.constant and time_grid.dt > grid.h * (1 + 1e-12):
        raise ParameterDomainError(
            f"变系数算子要求 dt ≤ h (dt={time_grid.dt:.4g}, h={grid.h:.4g})"
        )
    coefficients = build_coefficients(cfg.section("coefficients"))
    check_coefficients(coefficients, grid, rng, T=time_grid.T)

    u0 = _initial_from_section(cfg.section("initial"), grid)

    if cfg.kind is not ExperimentKind.ConditionCheck:
        check_admissible(model)
    _check_kind_sections(cfg, grid, time_grid)

    factorization = None
    if cfg.kind is ExperimentKind.Factorization:
        section = cfg.section("factorization")
        base = default_config(model, section["eta"] or None, section["rule"])
        delta = section["delta"] or base.delta
        factorization = FactorizationConfig(delta=delta, eta=base.eta, rule=base.rule)

    return ExperimentComponents(
        config=cfg,
        model=model,
        grid=grid,
        time_grid=time_grid,
        operator=operator,
        coefficients=coefficients,
        u0=u0,
        factorization=factorization,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """
    读取配置文件并完成全部校验。

    Raises:
        ConfigError: 解析失败、未知键或任何组件不变量被违反。
    """
    cfg = read_config(path)
    build_components(cfg)
    return cfg
