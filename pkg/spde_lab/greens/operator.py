import math
from collections.abc import Sequence

import numpy as np
import sympy

from ..common.grid import SpatialGrid  # type: ignore
from ..common.types import OperatorSpec, OperatorSpecError  # type: ignore


def _constant(value: float):
    value = float(value)

    def coefficient(t: float, coords: tuple[np.ndarray, ...]) -> float:
        return value

    return coefficient


def laplacian_operator(
    k: int,
    diffusivity: float | Sequence[Sequence[float]] = 1.0,
    drift: Sequence[float] | None = None,
    decay: float = 0.0,
) -> OperatorSpec:
    """
    常系数算子: a_ij、b_i、c 均为常数。

    Args:
        k: 空间维数。
        diffusivity: 标量 a (a_ij = a δ_ij) 或 k×k 对称矩阵。
        drift: 漂移向量 b，默认全零。
        decay: 零阶系数 c。
    """
    matrix = np.asarray(diffusivity, dtype=float)
    if matrix.ndim == 0:
        matrix = float(matrix) * np.eye(k)
    if matrix.shape != (k, k):
        raise OperatorSpecError(f"扩散矩阵形状必须为 ({k}, {k})")
    drift = [0.0] * k if drift is None or len(drift) == 0 else list(drift)
    if len(drift) != k:
        raise OperatorSpecError(f"漂移向量长度必须为 k={k}")
    rho = float(np.linalg.eigvalsh(0.5 * (matrix + matrix.T)).min())
    return OperatorSpec(
        diffusion=tuple(tuple(_constant(matrix[i, j]) for j in range(k)) for i in range(k)),
        drift=tuple(_constant(b) for b in drift),
        decay=_constant(decay),
        rho=rho,
        constant=True,
        time_independent=True,
        name="laplacian",
    )


def sinusoidal_operator(
    k: int, L: float, base: float = 1.0, amplitude: float = 0.5
) -> OperatorSpec:
    """a_ij(x) = base (1 + amplitude sin(2π x_1 / L)) δ_ij，b = c = 0。"""
    if not 0 <= abs(amplitude) < 1 or base <= 0:
        raise OperatorSpecError(f"正弦扩散系数须满足 base > 0 且 |amplitude| < 1 (amplitude={amplitude})")

    def diagonal(t: float, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        return base * (1 + amplitude * np.sin(2 * math.pi * coords[0] / L))

    zero = _constant(0.0)
    return OperatorSpec(
        diffusion=tuple(tuple(diagonal if i == j else zero for j in range(k)) for i in range(k)),
        drift=tuple(zero for _ in range(k)),
        decay=zero,
        rho=base * (1 - abs(amplitude)),
        constant=False,
        time_independent=True,
        name="sinusoidal",
    )


def _compile(expr: str, symbols: list[sympy.Symbol]):
    try:
        parsed = sympy.sympify(expr, locals={s.name: s for s in symbols})
    except (sympy.SympifyError, TypeError, SyntaxError) as e:
        raise OperatorSpecError(f"无法解析系数表达式 '{expr}': {e!s}") from e
    unknown = parsed.free_symbols - set(symbols)
    if unknown:
        raise OperatorSpecError(f"系数表达式 '{expr}' 含有未知变量: {sorted(map(str, unknown))}")
    func = sympy.lambdify(symbols, parsed, modules="numpy")

    def coefficient(t: float, coords: tuple[np.ndarray, ...]):
        return func(t, *coords)

    return coefficient, parsed.free_symbols


def expression_operator(
    k: int,
    diffusion: Sequence[Sequence[str]],
    drift: Sequence[str] | None = None,
    decay: str = "0",
    rho: float = 0.5,
) -> OperatorSpec:
    """
    由变量 t, x0, ..., x{k-1} 的表达式字符串构造算子。

    Raises:
        OperatorSpecError: 表达式无法解析或含有未知变量。
    """
    symbols = sympy.symbols(["t"] + [f"x{i}" for i in range(k)])
    t_symbol = symbols[0]
    drift = ["0"] * k if drift is None or len(drift) == 0 else list(drift)
    if len(diffusion) != k or any(len(row) != k for row in diffusion) or len(drift) != k:
        raise OperatorSpecError(f"系数表达式的个数必须与 k={k} 一致")

    used: set = set()
    rows = []
    for row in diffusion:
        compiled = []
        for expr in row:
            func, free = _compile(str(expr), symbols)
            compiled.append(func)
            used |= free
        rows.append(tuple(compiled))
    drift_funcs = []
    for expr in drift:
        func, free = _compile(str(expr), symbols)
        drift_funcs.append(func)
        used |= free
    decay_func, free = _compile(str(decay), symbols)
    used |= free

    return OperatorSpec(
        diffusion=tuple(rows),
        drift=tuple(drift_funcs),
        decay=decay_func,
        rho=float(rho),
        constant=not used,
        time_independent=t_symbol not in used,
        name="expression",
    )


def _field(coefficient, t: float, grid: SpatialGrid) -> np.ndarray:
    return np.broadcast_to(
        np.asarray(coefficient(t, grid.coordinates), dtype=float), grid.shape
    )


def diffusion_field(op: OperatorSpec, t: float, grid: SpatialGrid) -> np.ndarray:
    """返回形状为 (k, k, *grid.shape) 的 a_ij(t, x)。"""
    return np.stack([np.stack([_field(a, t, grid) for a in row]) for row in op.diffusion])


def drift_field(op: OperatorSpec, t: float, grid: SpatialGrid) -> np.ndarray:
    return np.stack([_field(b, t, grid) for b in op.drift])


def decay_field(op: OperatorSpec, t: float, grid: SpatialGrid) -> np.ndarray:
    return _field(op.decay, t, grid)


def constant_coefficients(op: OperatorSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """常系数算子的 (A, b, c)。"""
    origin = tuple(np.zeros(1) for _ in range(op.k))
    A = np.array([[float(np.squeeze(a(0.0, origin))) for a in row] for row in op.diffusion])
    b = np.array([float(np.squeeze(f(0.0, origin))) for f in op.drift])
    c = float(np.squeeze(op.decay(0.0, origin)))
    return A, b, c


def check_operator(
    op: OperatorSpec,
    grid: SpatialGrid,
    rng: np.random.Generator,
    T: float = 1.0,
    samples: int = 64,
) -> None:
    """
    抽样检验 a_ij = a_ji 与 Σ a_ij y_i y_j ≥ ρ|y|²。

    Raises:
        OperatorSpecError: 对称性或一致椭圆性不成立。
    """
    if op.k != grid.k:
        raise OperatorSpecError(f"算子维数 {op.k} 与网格维数 {grid.k} 不一致")
    if not op.rho > 0:
        raise OperatorSpecError(f"椭圆常数 ρ 必须为正 (ρ={op.rho})")
    times = [0.0] if op.time_independent else rng.uniform(0, T, size=4)
    for t in times:
        a = diffusion_field(op, float(t), grid).reshape(op.k, op.k, -1)
        if not np.all(np.isfinite(a)):
            raise OperatorSpecError(f"扩散系数在 t={t:.4g} 出现非有限值")
        sites = rng.integers(0, grid.size, size=samples)
        block = np.moveaxis(a[:, :, sites], -1, 0)
        if not np.allclose(block, np.swapaxes(block, 1, 2), rtol=1e-12, atol=1e-12):
            raise OperatorSpecError("扩散系数不对称: a_ij ≠ a_ji")
        y = rng.standard_normal((samples, op.k))
        quad = np.einsum("si,sij,sj->s", y, block, y)
        bound = op.rho * np.sum(y * y, axis=1)
        if np.any(quad < bound * (1 - 1e-12)):
            raise OperatorSpecError(f"一致椭圆条件不成立 (ρ={op.rho})")
