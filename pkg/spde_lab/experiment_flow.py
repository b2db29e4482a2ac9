import asyncio
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import AbstractAsyncContextManager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .common import (  # type: ignore
    CovarianceKind,
    CovarianceModel,
    Direction,
    ExperimentKind,
    LabError,
    NumericalError,
    Representation,
    RunStatus,
    SpatialGrid,
    TimeGrid,
    derive_seed,
    logger,
    path_rng,
)
from .components import ExperimentComponents  # type: ignore
from .covariance import decide_condition, lattice_weights  # type: ignore
from .factorization import (  # type: ignore
    beta_quadrature,
    beta_weight,
    compute_Y_delta,
    round_trip,
)
from .greens import (  # type: ignore
    gaussian_bound_check,
    semigroup_residual,
    step_diagnostics,
)
from .noise import (  # type: ignore
    NoiseSampler,
    convolution_variance,
    isometry_check,
    kernel_self_consistency,
    normality_check,
    periodized_covariance,
    sample_path,
    write_noise_dump,
)
from .regularity import (  # type: ignore
    anchor_policy,
    dyadic_lags,
    fit_exponents,
    lag_steps,
    path_increment_moments,
    plot_table,
    table_from_rows,
    theoretical_targets,
)
from .solver import (  # type: ignore
    MomentAccumulator,
    euler_march,
    euler_solve,
    export_solution,
    initial_history,
    picard_iterate,
)
from .solver.coefficients import evaluate  # type: ignore

# 每个任务处理的路径数，与线程数无关，保证合并顺序固定
PATH_CHUNK = 8
NOISE_CHUNK = 1000
NOISE_DUMP_FIELDS = 16
TIER_TOLERANCE = {"default": 0.1, "high": 0.05}
BETA_DELTAS = (0.1, 0.25, 0.3, 0.45)
BOUNDARY_MARGIN = 0.05
NUMERIC_AGREEMENT = 0.95
# 非白噪声的自洽性检查只在远离奇点的格点上进行
SELF_CONSISTENCY_SITES = (1, 2, 4, 8)


@dataclass
class ExperimentResult:
    """
    一次实验的全部数值产出。

    Args:
        kind (ExperimentKind): 实验类型。
        status (RunStatus): 完成、部分完成或失败。
        report (dict[str, Any]): 写入 JSON 报告的结果。
        tables (dict[str, tuple[list[str], np.ndarray]]): 表名 -> (列名, 数据)。
        acceptance (dict[str, bool]): 各项验收判据。
        path_seeds (list[int]): 已完成路径的种子，按路径编号排列。
        artifacts (list[Path]): 实验过程中直接写出的文件。
        error (LabError | None): 导致中断的第一个错误 (按任务顺序)。
    """

    kind: ExperimentKind
    status: RunStatus = RunStatus.Complete
    report: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, tuple[list[str], np.ndarray]] = field(default_factory=dict)
    acceptance: dict[str, bool] = field(default_factory=dict)
    path_seeds: list[int] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)
    error: LabError | None = None

    @property
    def accepted(self) -> bool:
        return all(self.acceptance.values())


def _chunks(count: int, size: int) -> list[range]:
    return [range(start, min(start + size, count)) for start in range(0, count, size)]


def _within(estimate: float, reference: float, se: float, n_se: float, rel: float = 0.0) -> bool:
    return abs(estimate - reference) <= n_se * se + rel * abs(reference)


class ExperimentFlow(AbstractAsyncContextManager):
    __slots__ = (
        "_components",
        "_out_dir",
        "_executor",
        "_error",
    )

    def __init__(self, components: ExperimentComponents, out_dir: str | Path) -> None:
        """
        初始化实验流程

        参数:
            components: 由配置构造并校验过的数值组件
            out_dir: 本次运行的输出目录，快照与噪声文件直接写入其中
        """
        self._components = components
        self._out_dir = Path(out_dir)
        self._executor: ThreadPoolExecutor | None = None
        self._error: LabError | None = None

    @property
    def components(self) -> ExperimentComponents:
        return self._components

    async def __aenter__(self) -> "ExperimentFlow":
        workers = self._components.config.workers
        self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="spde-path")
        logger.debug(f"实验线程池已启动 ({workers} 个线程)")
        return self

    async def __aexit__(self, *exc_info: Any) -> None:
        await self.close()

    async def close(self) -> None:
        if self._executor:
            self._executor.shutdown(wait=True)
            self._executor = None

    async def _map_ordered(self, func: Callable[[Any], Any], items: Sequence[Any]) -> list[Any]:
        """
        在线程池中执行任务并按提交顺序收集结果。

        遇到失败的任务时只保留它之前的结果，第一个错误记录在 self._error 中，
        因此部分结果同样与调度无关。
        """
        if self._executor is None:
            raise RuntimeError("实验流程未进入上下文，线程池不可用")
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self._executor, func, item) for item in items]
        outcomes = await asyncio.gather(*futures, return_exceptions=True)
        done = []
        for item, outcome in zip(items, outcomes):
            if isinstance(outcome, BaseException):
                if isinstance(outcome, LabError):
                    error = outcome
                else:
                    error = NumericalError(f"任务 {item} 执行失败: {outcome!s}")
                logger.error(f"任务 {item} 失败，保留之前的 {len(done)} 个结果: {error!s}")
                self._error = self._error or error
                break
            done.append(outcome)
        return done

    def _seeds(self, count: int) -> list[int]:
        return [derive_seed(self._components.config.seed, i) for i in range(count)]

    async def run(self) -> ExperimentResult:
        """按实验类型分派，失败时返回带错误的结果而不是抛出。"""
        kind = self._components.config.kind
        self._error = None
        result = ExperimentResult(kind=kind)
        try:
            if kind is ExperimentKind.ConditionCheck:
                await self._run_check(result)
            elif kind is ExperimentKind.NoiseValidate:
                await self._run_noise(result)
            elif kind is ExperimentKind.Solve:
                await self._run_solve(result)
            elif kind is ExperimentKind.Picard:
                await self._run_picard(result)
            elif kind is ExperimentKind.Factorization:
                await self._run_factorize(result)
            elif kind is ExperimentKind.Regularity:
                await self._run_regularity(result)
            else:
                raise NumericalError(f"未知的实验类型: {kind}")
        except LabError as e:
            logger.error(f"{kind.value} 实验失败: {e!s}")
            self._error = self._error or e
            result.status = RunStatus.Failed
        if self._error is not None:
            result.error = self._error
            if result.status is RunStatus.Complete:
                result.status = RunStatus.Partial
            logger.warning(f"{kind.value} 实验未完整结束: {self._error!s}")
        return result

    # ---- check -----------------------------------------------------------

    def _condition_draw(self, index: int) -> dict[str, Any]:
        cfg = self._components.config
        section = cfg.section("condition")
        family = section["families"][index // section["draws"]]
        rng = path_rng(cfg.seed, index)
        k = int(rng.integers(1, 4))
        eta = section["eta"] or float(rng.uniform(0.05, 1.0))
        if family == "riesz":
            model = CovarianceModel.riesz(float(rng.uniform(0.05, k - 0.05)), k)
            margin = min(k, 2 * eta) - model.beta
        elif family == "bessel":
            model = CovarianceModel.bessel(float(rng.uniform(0.05, 2.0 * k)), k)
            margin = model.alpha - (k - 2 * eta)
        else:
            while True:
                hurst = rng.uniform(0.501, 0.999, size=k)
                if hurst.sum() > k - 1:
                    break
            model = CovarianceModel.fractional(hurst.tolist())
            margin = sum(model.hurst) - (k - eta)
        verdict = decide_condition(
            model,
            eta,
            radii=tuple(float(r) for r in section["radii"]),
            threshold=section["threshold"],
            tail_floor=section["tail_floor"],
        )
        expected = margin > 0
        return {
            "index": index,
            "family": family,
            "model": model.describe(),
            "expected": expected,
            "margin": margin,
            "boundary": abs(margin) < BOUNDARY_MARGIN,
            "analytic_agrees": verdict.holds == expected,
            "numeric_agrees": verdict.numeric_saturates == expected,
            "verdict": verdict.to_dict(),
        }

    def _kernel_checks(self, _: int) -> dict[str, Any]:
        P = self._components.propagator()
        steps = P.time_grid.steps
        out: dict[str, Any] = {"representation": P.representation.value}
        out["semigroup_residual"] = semigroup_residual(P, 0, steps // 2, steps)
        out["gaussian_bound"] = gaussian_bound_check(P).to_dict()
        if P.grid.size <= 4096:
            diag = step_diagnostics(P)
            out["step"] = {
                "mass_min": diag.mass_min,
                "mass_max": diag.mass_max,
                "worst_negative": diag.worst_negative,
                "positivity_ok": diag.positivity_ok,
                "mass_ok": diag.mass_ok,
            }
        return out

    async def _run_check(self, result: ExperimentResult) -> None:
        section = self._components.config.section("condition")
        total = len(section["families"]) * section["draws"]
        draws = await self._map_ordered(self._condition_draw, range(total))
        kernel = await self._map_ordered(self._kernel_checks, [0])

        analytic = sum(d["analytic_agrees"] for d in draws)
        eligible = [d for d in draws if not d["boundary"]]
        numeric = sum(d["numeric_agrees"] for d in eligible)
        numeric_rate = numeric / len(eligible) if eligible else 1.0
        result.report = {
            "draws": draws,
            "analytic_agreement": analytic / total if total else 1.0,
            "numeric_agreement": numeric_rate,
            "boundary_exempt": len(draws) - len(eligible),
            "kernel": kernel[0] if kernel else None,
        }
        result.tables["condition"] = (
            ["index", "k", "eta", "expected", "holds", "numeric_saturates", "boundary"],
            np.array(
                [
                    [
                        d["index"],
                        d["model"]["k"],
                        d["verdict"]["eta"],
                        d["expected"],
                        d["verdict"]["holds"],
                        d["verdict"]["numeric_saturates"],
                        d["boundary"],
                    ]
                    for d in draws
                ],
                dtype=float,
            ).reshape(-1, 7),
        )
        result.acceptance["analytic_rule"] = len(draws) == total and analytic == total
        result.acceptance["numeric_probe"] = numeric_rate >= NUMERIC_AGREEMENT
        if kernel:
            info = kernel[0]
            if info["representation"] == Representation.SpectralMultiplier.value:
                result.acceptance["semigroup"] = info["semigroup_residual"] <= 1e-12
            elif "step" in info:
                result.acceptance["mass"] = info["step"]["mass_ok"]
                result.acceptance["positivity"] = info["step"]["positivity_ok"]
        if numeric_rate < NUMERIC_AGREEMENT:
            logger.warning(f"数值探测与解析规则的一致率只有 {numeric_rate:.1%}")

    # ---- noise -----------------------------------------------------------

    def _noise_chunk(self, chunk: range) -> dict[str, Any]:
        c = self._components
        section = c.config.section("noise")
        sampler = NoiseSampler(c.grid, c.model, c.time_grid.dt)
        fields = sampler.sample(path_rng(c.config.seed, chunk.start // NOISE_CHUNK), len(chunk))
        axes = tuple(range(1, c.grid.k + 1))
        products = {}
        for lag in section["lags"]:
            shift = [-int(lag)] + [0] * (c.grid.k - 1)
            products[int(lag)] = np.mean(fields * np.roll(fields, shift, axis=axes), axis=axes)
        return {
            "site": fields[(slice(None), *([0] * c.grid.k))].copy(),
            "products": products,
            "head": fields[:NOISE_DUMP_FIELDS].copy() if chunk.start == 0 else None,
        }

    def _isometry(self, index: int) -> dict[str, Any]:
        c = self._components
        name = c.config.section("noise")["integrands"][index]
        L = c.grid.L
        if name == "constant":
            integrand = lambda t, x: 1.0  # noqa: E731
        elif name == "decaying":
            integrand = lambda t, x: np.exp(-t) * np.exp(-((x[0] - L / 2) ** 2))  # noqa: E731
        else:
            integrand = lambda t, x: np.cos(2 * np.pi * x[0] / L) * np.sin(np.pi * (t + 0.5))  # noqa: E731
        rng = path_rng(c.config.seed, 1_000_000 + index)
        res = isometry_check(
            integrand, c.model, c.grid, c.time_grid, c.config.section("noise")["samples"], rng
        )
        return {
            "integrand": name,
            "mc_variance": res.mc_variance,
            "analytic_variance": res.analytic_variance,
            "standard_error": res.standard_error,
            "n_samples": res.n_samples,
            "passes": _within(res.mc_variance, res.analytic_variance, res.standard_error, 4.0),
        }

    async def _run_noise(self, result: ExperimentResult) -> None:
        c = self._components
        section = c.config.section("noise")
        parts = await self._map_ordered(self._noise_chunk, _chunks(section["samples"], NOISE_CHUNK))
        if not parts:
            raise NumericalError("没有完成任何噪声样本块")
        site = np.concatenate([part["site"] for part in parts])
        n = len(site)
        dt = c.time_grid.dt

        squares = site * site
        variance = float(squares.mean())
        variance_se = float(squares.std(ddof=1) / math.sqrt(n))
        oracle = periodized_covariance(c.grid, c.model, dt, [0] * c.grid.k)
        result.report["site_variance"] = {
            "estimate": variance,
            "standard_error": variance_se,
            "oracle": oracle,
            "n_samples": n,
        }
        result.acceptance["site_variance"] = _within(variance, oracle, variance_se, 3.0)

        rows = []
        for lag in section["lags"]:
            per_sample = np.concatenate([part["products"][int(lag)] for part in parts])
            estimate = float(per_sample.mean())
            se = float(per_sample.std(ddof=1) / math.sqrt(n))
            reference = periodized_covariance(c.grid, c.model, dt, [int(lag)] + [0] * (c.grid.k - 1))
            rows.append([int(lag) * c.grid.h, estimate, se, reference])
            result.acceptance[f"covariance_lag_{int(lag)}"] = _within(estimate, reference, se, 3.0)
        result.tables["covariance"] = (
            ["lag", "estimate", "standard_error", "oracle"],
            np.array(rows, dtype=float).reshape(-1, 4),
        )

        normality = normality_check(site[:, None], (0,))
        result.report["normality"] = {
            "skewness": normality.skewness,
            "excess_kurtosis": normality.excess_kurtosis,
            "se_skewness": normality.se_skewness,
            "se_kurtosis": normality.se_kurtosis,
        }
        result.acceptance["normality"] = normality.passes()

        if c.model.kind is not CovarianceKind.White:
            sites = [[s] + [0] * (c.grid.k - 1) for s in SELF_CONSISTENCY_SITES if s < c.grid.N // 2]
            result.report["self_consistency"] = kernel_self_consistency(c.model, c.grid, sites)

        isometry = await self._map_ordered(self._isometry, range(len(section["integrands"])))
        result.report["isometry"] = isometry
        for item in isometry:
            result.acceptance[f"isometry_{item['integrand']}"] = item["passes"]

        if section["dump"] and parts[0]["head"] is not None:
            path = self._out_dir / "noise.bin"
            write_noise_dump(path, parts[0]["head"], c.grid, dt)
            result.artifacts.append(path)
        result.path_seeds = [
            derive_seed(c.config.seed, i) for i in range(len(_chunks(n, NOISE_CHUNK)))
        ]

    # ---- solve -----------------------------------------------------------

    def _solve_chunk(self, chunk: range) -> dict[str, Any]:
        c = self._components
        cfg = c.config
        P = c.propagator()
        shape = (c.time_grid.steps + 1, *c.grid.shape)
        accumulators = {p: MomentAccumulator(shape, p) for p in cfg.p_values}
        terminal = []
        exported = []
        export_count = cfg.section("experiment")["export_paths"]
        snapshot = cfg.section("experiment")["snapshot_format"]
        for i in chunk:
            path = euler_solve(P, c.coefficients, c.model, c.u0, derive_seed(cfg.seed, i))
            for acc in accumulators.values():
                acc.add(path.values)
            terminal.append(float(np.mean(path.values[-1] ** 2)))
            if i < export_count:
                suffix = "csv" if snapshot == "csv" else "bin"
                exported.append(export_solution(self._out_dir / f"path_{i:05d}.{suffix}", path, snapshot))
        return {"accumulators": accumulators, "terminal": terminal, "exported": exported}

    def _linear_oracle(self) -> dict[str, float] | None:
        """σ 为常数、b ≡ 0、u0 ≡ 0 的常系数线性方程在 T 处的方差。"""
        c = self._components
        coeff = c.config.section("coefficients")
        if coeff["sigma"]["preset"] != "constant":
            return None
        if coeff["drift"]["preset"] != "constant" or coeff["drift"]["value"] != 0:
            return None
        if np.any(c.u0) or not c.operator.constant:
            return None
        P = c.propagator()
        sigma2 = coeff["sigma"]["value"] ** 2
        steps = c.time_grid.steps
        lattice = sigma2 * convolution_variance(
            lattice_weights(c.model, c.grid), P.step_gain(), P.dt, range(1, steps + 1)
        )
        out = {"lattice": lattice}
        op = c.config.section("operator")
        if (
            c.model.kind is CovarianceKind.White
            and c.grid.k == 1
            and op["preset"] == "laplacian"
            and not any(op["drift"])
            and op["decay"] == 0
        ):
            out["continuum"] = sigma2 * math.sqrt(c.time_grid.T / (2 * math.pi * op["diffusivity"]))
        return out

    async def _run_solve(self, result: ExperimentResult) -> None:
        c = self._components
        cfg = c.config
        parts = await self._map_ordered(self._solve_chunk, _chunks(cfg.paths, PATH_CHUNK))
        if not parts:
            raise NumericalError("没有完成任何路径")
        done = sum(len(part["terminal"]) for part in parts)
        result.path_seeds = self._seeds(done)
        for part in parts:
            result.artifacts.extend(part["exported"])

        columns = ["t"]
        data = [c.time_grid.times]
        spatial = tuple(range(1, c.grid.k + 1))
        sups = {}
        for p in cfg.p_values:
            merged = parts[0]["accumulators"][p]
            for part in parts[1:]:
                merged = merged.merge(part["accumulators"][p])
            moment = merged.moment()
            columns.append(f"moment_p{p:g}")
            data.append(moment.max(axis=spatial))
            if merged.count > 1:
                value, se = merged.sup()
                se_field = merged.standard_error().reshape(moment.shape[0], -1)
                flat = np.argmax(moment.reshape(moment.shape[0], -1), axis=1)
                columns.append(f"se_p{p:g}")
                data.append(se_field[np.arange(len(flat)), flat])
            else:
                value, se = float(moment.max()), math.nan
            sups[f"{p:g}"] = {"value": value, "standard_error": se}
        result.tables["moments"] = (columns, np.column_stack(data))
        result.report["moment_sup"] = sups

        terminal = np.concatenate([np.asarray(part["terminal"]) for part in parts])
        estimate = float(terminal.mean())
        se = float(terminal.std(ddof=1) / math.sqrt(len(terminal))) if len(terminal) > 1 else math.nan
        summary: dict[str, Any] = {"estimate": estimate, "standard_error": se, "n_paths": done}
        oracle = self._linear_oracle()
        if oracle is not None:
            summary["oracle"] = oracle
            reference = oracle.get("continuum", oracle["lattice"])
            result.acceptance["terminal_variance"] = (
                not math.isnan(se) and _within(estimate, reference, se, 4.0, 0.03)
            )
        result.report["terminal_second_moment"] = summary
        logger.info(f"终止时刻二阶矩 {estimate:.6g} ± {se:.2g} ({done} 条路径)")

    # ---- picard ----------------------------------------------------------

    def _picard_batch(self, count: int) -> dict[str, Any]:
        c = self._components
        section = c.config.section("picard")
        P = c.propagator()
        noise = np.stack(
            [
                sample_path(c.grid, c.model, c.time_grid, np.random.default_rng(seed))
                for seed in self._seeds(count)
            ]
        )
        values, trace = picard_iterate(
            P,
            c.coefficients,
            noise,
            c.u0,
            max_iter=section["max_iter"],
            p=c.config.p_values[0],
            tolerance=section["tolerance"],
        )
        reference = euler_march(P, c.coefficients, c.u0, noise)
        scale = max(float(np.max(np.abs(reference))), np.finfo(float).tiny)
        return {
            "trace": trace,
            "relative_difference": float(np.max(np.abs(values - reference))) / scale,
        }

    async def _run_picard(self, result: ExperimentResult) -> None:
        cfg = self._components.config
        parts = await self._map_ordered(self._picard_batch, [cfg.paths])
        if not parts:
            return
        trace = parts[0]["trace"]
        difference = parts[0]["relative_difference"]
        result.path_seeds = self._seeds(cfg.paths)
        result.report["trace"] = trace.to_dict()
        result.report["relative_difference"] = difference
        ratios = trace.ratios
        n = len(trace.differences)
        result.tables["picard"] = (
            ["iteration", "difference", "moment_sup", "ratio"],
            np.column_stack(
                [
                    np.arange(1, n + 1),
                    trace.differences,
                    trace.moment_sups[1:],
                    [math.nan, *ratios],
                ]
            ),
        )
        result.acceptance["converged"] = trace.converged
        result.acceptance["contraction"] = all(r < 1 for r in ratios[2:])
        result.acceptance["matches_euler"] = difference <= 1e-3

    # ---- factorize -------------------------------------------------------

    def _sigma_field(self, grid: SpatialGrid, time_grid: TimeGrid, values: np.ndarray) -> np.ndarray:
        sigma = self._components.coefficients.sigma
        return np.stack(
            [evaluate(sigma, float(t), grid, values[j]) for j, t in enumerate(time_grid.times)]
        )

    def _factorize_chunk(self, chunk: range) -> dict[str, Any]:
        c = self._components
        cfg = c.config
        fcfg = c.factorization
        refine = cfg.section("factorization")["refine"]
        P = c.propagator()
        fine = None
        if refine:
            fine_grid = SpatialGrid(c.grid.k, c.grid.N * 2, c.grid.L)
            fine = c.propagator(fine_grid, c.time_grid.refined(2))
            fine_u0 = c.initial_on(fine_grid)
        acc = MomentAccumulator((c.time_grid.steps + 1, *c.grid.shape), cfg.p_values[0])
        rows = []
        for i in chunk:
            rng = np.random.default_rng(derive_seed(cfg.seed, i))
            noise = sample_path(c.grid, c.model, c.time_grid, rng)
            values = euler_march(P, c.coefficients, c.u0, noise)
            Z = self._sigma_field(c.grid, c.time_grid, values)
            base = round_trip(P, Z, noise, fcfg)
            acc.add(compute_Y_delta(P, Z, noise, fcfg))
            refined = math.nan
            if fine is not None:
                fine_noise = sample_path(fine.grid, c.model, fine.time_grid, rng)
                fine_values = euler_march(fine, c.coefficients, fine_u0, fine_noise)
                fine_Z = self._sigma_field(fine.grid, fine.time_grid, fine_values)
                refined = round_trip(fine, fine_Z, fine_noise, fcfg)
            rows.append([i, base, refined])
        return {"rows": rows, "accumulator": acc}

    async def _run_factorize(self, result: ExperimentResult) -> None:
        c = self._components
        fcfg = c.factorization
        beta = {}
        for delta in sorted({*BETA_DELTAS, fcfg.delta}):
            closed, numeric = beta_weight(1.0, delta), beta_quadrature(delta)
            beta[f"{delta:g}"] = {"closed_form": closed, "quadrature": numeric}
            result.acceptance[f"beta_{delta:g}"] = abs(closed - numeric) <= 1e-6
        result.report["beta_identity"] = beta
        result.report["config"] = {"delta": fcfg.delta, "eta": fcfg.eta, "rule": fcfg.rule}

        parts = await self._map_ordered(self._factorize_chunk, _chunks(c.config.paths, PATH_CHUNK))
        if not parts:
            raise NumericalError("没有完成任何路径")
        rows = np.array([row for part in parts for row in part["rows"]], dtype=float)
        result.path_seeds = self._seeds(len(rows))
        result.tables["round_trip"] = (["path", "base_error", "refined_error"], rows)
        merged = parts[0]["accumulator"]
        for part in parts[1:]:
            merged = merged.merge(part["accumulator"])
        y_sup, y_se = merged.sup()
        base = float(rows[:, 1].mean())
        summary: dict[str, Any] = {
            "base_error": base,
            "y_moment_sup": y_sup,
            "y_moment_se": y_se,
            "grid": c.grid.describe(),
            "time": c.time_grid.describe(),
        }
        result.acceptance["round_trip"] = base <= 0.05
        if c.config.section("factorization")["refine"]:
            refined = float(rows[:, 2].mean())
            summary["refined_error"] = refined
            result.acceptance["refinement"] = refined < base
        result.report["round_trip"] = summary
        logger.info(f"因子分解往返误差 {base:.3%} (δ={fcfg.delta:.4g}, {fcfg.rule})")

    # ---- regularity ------------------------------------------------------

    def _regularity_plan(self) -> dict[Direction, dict[str, Any]]:
        c = self._components
        section = c.config.section("regularity")
        plan = {}
        for name in section["directions"]:
            direction = Direction(name)
            if direction is Direction.Time:
                unit, extent = c.time_grid.dt, c.time_grid.T
                lags = section["time_lags"] or dyadic_lags(unit, extent)
            else:
                unit, extent = c.grid.h, c.grid.L
                lags = section["space_lags"] or dyadic_lags(unit, extent)
            lags = sorted(float(lag) for lag in lags)
            steps = lag_steps(lags, direction, c.grid, c.time_grid)
            anchors = anchor_policy(
                c.time_grid.steps,
                c.time_grid.dt,
                c.grid.shape,
                max(steps),
                direction,
                burn_in=section["burn_in"] or None,
                n_times=section["anchor_times"],
                n_sites=section["anchor_sites"],
            )
            plan[direction] = {
                "lags": lags,
                "steps": steps,
                "anchors": anchors,
                "unit": unit,
                "extent": extent,
            }
        return plan

    def _regularity_chunk(self, item: tuple[range, dict, np.ndarray | None]) -> dict:
        chunk, plan, baseline = item
        c = self._components
        cfg = c.config
        P = c.propagator()
        rows: dict[tuple[Direction, float], list[np.ndarray]] = {
            (d, p): [] for d in plan for p in cfg.p_values
        }
        for i in chunk:
            path = euler_solve(P, c.coefficients, c.model, c.u0, derive_seed(cfg.seed, i))
            values = path.values[None]
            if baseline is not None:
                values = values - baseline
            for direction, info in plan.items():
                for p in cfg.p_values:
                    rows[(direction, p)].append(
                        path_increment_moments(
                            values, p, direction, info["steps"], info["anchors"], c.grid.k
                        )
                    )
        return {key: np.concatenate(value) for key, value in rows.items()}

    async def _run_regularity(self, result: ExperimentResult) -> None:
        c = self._components
        cfg = c.config
        section = cfg.section("regularity")
        plan = self._regularity_plan()
        baseline = initial_history(c.propagator(), c.u0) if np.any(c.u0) else None
        items = [(chunk, plan, baseline) for chunk in _chunks(cfg.paths, PATH_CHUNK)]
        parts = await self._map_ordered(self._regularity_chunk, items)
        if not parts:
            raise NumericalError("没有完成任何路径")

        targets, provenance = theoretical_targets(c.model)
        tolerance = TIER_TOLERANCE[cfg.tier]
        reports = {}
        n_paths = 0
        for p in cfg.p_values:
            report = None
            for direction, info in plan.items():
                per_path = np.concatenate([part[(direction, p)] for part in parts])
                n_paths = len(per_path)
                table = table_from_rows(
                    per_path,
                    p,
                    direction,
                    info["lags"],
                    info["unit"],
                    info["extent"],
                    info["anchors"],
                )
                result.tables[f"{direction.value}_p{p:g}"] = (
                    ["log_lag", "log_moment", "standard_error"],
                    plot_table(table),
                )
                fit = fit_exponents(
                    table,
                    targets.get(direction.value),
                    provenance,
                    confidence=section["confidence"],
                )
                report = fit if report is None else report.merge(fit)
                gamma = fit.fits[direction.value]
                if gamma.target is not None:
                    result.acceptance[f"{direction.value}_p{p:g}"] = (
                        abs(gamma.gamma - gamma.target) <= tolerance
                    )
                logger.info(
                    f"{direction.value} 方向 p={p:g}: γ̂={gamma.gamma:.4f} "
                    f"[{gamma.ci[0]:.4f}, {gamma.ci[1]:.4f}] (目标 {gamma.target})"
                )
            reports[f"{p:g}"] = report.to_dict()
        result.path_seeds = self._seeds(n_paths)
        result.report = {
            "reports": reports,
            "targets": targets,
            "provenance": provenance,
            "tier": cfg.tier,
            "tolerance": tolerance,
        }
