import math

import numpy as np
from scipy import stats

from ..common.log import logger  # type: ignore
from ..common.types import (  # type: ignore
    DegenerateDataError,
    ExponentFit,
    IncrementMomentTable,
    RegularityReport,
)

MIN_LAGS = 4
MIN_R_SQUARED = 0.95


def fit_window(table: IncrementMomentTable) -> tuple[float, float]:
    """默认拟合窗口 [4 · 网格单位, 区域尺度 / 8]。"""
    return 4 * table.unit, table.extent / 8


def fit_exponents(
    table: IncrementMomentTable,
    target: float | None = None,
    provenance: str = "",
    window: tuple[float, float] | None = None,
    confidence: float = 0.95,
) -> RegularityReport:
    """
    对 log(矩) 关于 log(步长) 做加权最小二乘，γ̂ = 斜率 / p。

    权重为 m/SE (log 矩的标准误差的倒数)。存在 SE = 0 的点时改为普通最小二乘，
    置信区间由残差方差与 t 分位数给出。

    Args:
        table: 增量矩表。
        target: 理论上确界，用于报告接近程度。
        provenance: 目标的来源描述。
        window: 拟合窗口，默认见 fit_window。
        confidence: 置信水平。

    Returns:
        RegularityReport: 以方向名为键的拟合结果。R² < 0.95 时报告被标记，不抛异常。

    Raises:
        DegenerateDataError: 窗口内步长不足 4 个、跨度不足 2 个倍频程或矩非正。
    """
    lo, hi = window or fit_window(table)
    tol = 1e-9 * max(hi, 1.0)
    mask = (table.lags >= lo - tol) & (table.lags <= hi + tol)
    lags = table.lags[mask]
    moments = table.moments[mask]
    se = table.standard_errors[mask]
    if len(lags) < MIN_LAGS:
        raise DegenerateDataError(
            f"拟合窗口 [{lo:.4g}, {hi:.4g}] 内只有 {len(lags)} 个步长，至少需要 {MIN_LAGS} 个"
        )
    if lags[-1] / lags[0] < 4 * (1 - 1e-9):
        raise DegenerateDataError(f"步长跨度 {lags[0]:.4g}–{lags[-1]:.4g} 不足 2 个倍频程")
    if np.any(moments <= 0):
        raise DegenerateDataError("增量矩必须为正才能取对数")

    x = np.log(lags)
    y = np.log(moments)
    weighted = bool(np.all(se > 0))
    if weighted:
        w = moments / se
        coef, cov = np.polyfit(x, y, 1, w=w, cov="unscaled")
        quantile = stats.norm.ppf(0.5 + confidence / 2)
    else:
        w = np.ones_like(x)
        coef, cov = np.polyfit(x, y, 1, cov=True)
        quantile = stats.t.ppf(0.5 + confidence / 2, len(x) - 2)
    slope, intercept = float(coef[0]), float(coef[1])
    residuals = y - (slope * x + intercept)
    w2 = w * w
    y_bar = np.sum(w2 * y) / np.sum(w2)
    ss_tot = float(np.sum(w2 * (y - y_bar) ** 2))
    ss_res = float(np.sum(w2 * residuals**2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0

    p = table.p
    gamma = slope / p
    half = quantile * math.sqrt(max(float(cov[0, 0]), 0.0)) / p
    fit = ExponentFit(
        direction=table.direction,
        p=p,
        gamma=gamma,
        ci=(gamma - half, gamma + half),
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        residuals=residuals.tolist(),
        window=(float(lo), float(hi)),
        n_lags=len(lags),
        weighted=weighted,
        target=target,
        flagged=r_squared < MIN_R_SQUARED,
    )
    if fit.flagged:
        logger.warning(f"{table.direction.value} 方向的拟合质量不足 (R²={r_squared:.3f})")
    key = table.direction.value
    return RegularityReport(
        fits={key: fit},
        targets={} if target is None else {key: target},
        provenance=provenance,
        config={
            f"{key}_window": [float(lo), float(hi)],
            f"{key}_anchors": table.anchors,
            f"{key}_n_paths": table.n_paths,
            "confidence": confidence,
        },
    )


def secant_slopes(table: IncrementMomentTable) -> tuple[np.ndarray, np.ndarray]:
    """相邻步长之间的 log-log 割线斜率 / p 及其标准误差 (delta 方法)。"""
    x = np.log(table.lags)
    y = np.log(table.moments)
    rel = table.standard_errors / table.moments
    dx = np.diff(x)
    slopes = np.diff(y) / dx / table.p
    errors = np.sqrt(rel[1:] ** 2 + rel[:-1] ** 2) / dx / table.p
    return slopes, errors


def plot_table(table: IncrementMomentTable) -> np.ndarray:
    """绘图用的 (log 步长, log 矩, 标准误差) 三列数组。"""
    with np.errstate(divide="ignore"):
        return np.column_stack(
            [np.log(table.lags), np.log(table.moments), table.standard_errors]
        )
