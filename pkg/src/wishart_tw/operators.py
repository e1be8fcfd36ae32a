#!/usr/bin/env python3
"""
積分作用素モジュール

L²([s, ∞)) 上のシフト核 K(x+y-s) を Gauss–Legendre 求積で Nyström 離散化し、
フレドホルム行列式、Hilbert–Schmidt ノルム、トレースノルム、
Airy 核のトレースノルム閉形式と二つの作用素不等式の評価を行います。

重み √w で対称化しているため、作用素の合成は行列積そのものになります。
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, linalg

from src.wishart_tw.errors import ConvergenceError, GridMismatchError
from src.wishart_tw.run_logger import get_logger
from src.wishart_tw.specfun import airy_ai, airy_ai_prime

# 打ち切り長の候補は T_MIN から係数 1.5 で伸ばし T_MAX まで
T_MIN = 8.0
T_MAX = 1e4
DECAY_RATIO = 1e-16
DEFAULT_NODES = 128
MAX_NODES = 2048

Profile = Callable[[np.ndarray], np.ndarray]


class ShiftKernel(BaseModel):
    """一変数プロファイル u ↦ K(u) で表した二変数核 K(x+y-s)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    profile: Profile
    name: str = "kernel"
    z_min: float = Field(-math.inf, description="プロファイルの有効な左端")

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.profile(np.asarray(u, dtype=float)), dtype=float)


class QuadratureGrid(BaseModel):
    """[s, s+T] 上の Gauss–Legendre 節点と重み"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s: float
    m: int = Field(..., ge=8)
    T: float = Field(..., gt=0.0)
    nodes: np.ndarray
    weights: np.ndarray


class DiscretizedOperator(BaseModel):
    """M_ij = √w_i K(x_i, x_j) √w_j の対称行列"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: QuadratureGrid
    M: np.ndarray
    name: str = "operator"


def airy_kernel() -> ShiftKernel:
    """G(u) = Ai(u)/√2（S̄ = 2G² が Airy 核）"""
    return ShiftKernel(profile=lambda u: airy_ai(u) / math.sqrt(2.0), name="airy")


def zero_kernel() -> ShiftKernel:
    return ShiftKernel(profile=np.zeros_like, name="zero")


def decay_length(kernels: Sequence[ShiftKernel], s: float) -> float:
    """
    すべての核が [s+T, s+1.5T] で最大値の 1e-16 倍以下になる最小の候補 T

    Raises:
        ConvergenceError: T ≤ 10⁴ で減衰しない核がある場合
    """
    T = T_MIN
    while T <= T_MAX:
        body = s + np.linspace(0.0, T, 801)
        tail = s + T + np.linspace(0.0, 0.5 * T, 201)
        if all(_decayed(k, body, tail) for k in kernels):
            return T
        T *= 1.5
    raise ConvergenceError(
        "核が打ち切り長 10⁴ 以内で減衰しません", {"s": s, "kernels": [k.name for k in kernels]}
    )


def _decayed(kernel: ShiftKernel, body: np.ndarray, tail: np.ndarray) -> bool:
    peak = float(np.max(np.abs(kernel(body))))
    if peak == 0.0:
        return True
    return float(np.max(np.abs(kernel(tail)))) <= DECAY_RATIO * peak


def build_grid(
    s: float, m: int = DEFAULT_NODES, kernels: Sequence[ShiftKernel] = (), T: Optional[float] = None
) -> QuadratureGrid:
    """[s, s+T] 上の m 点 Gauss–Legendre グリッド（T は核の減衰から決定）"""
    if m < 8:
        raise ValueError("節点数 m は 8 以上である必要があります")
    if T is None:
        T = decay_length(kernels, s) if kernels else T_MIN
    t, w = leggauss(m)
    nodes = s + 0.5 * T * (t + 1.0)
    weights = 0.5 * T * w
    return QuadratureGrid(s=s, m=m, T=T, nodes=nodes, weights=weights)


def discretize(kernel: ShiftKernel, grid: QuadratureGrid) -> DiscretizedOperator:
    """シフト核を対称な重み付き行列へ離散化（上三角のみ評価）"""
    m = grid.m
    iu, ju = np.triu_indices(m)
    values = kernel(grid.nodes[iu] + grid.nodes[ju] - grid.s)
    K = np.empty((m, m))
    K[iu, ju] = values
    K[ju, iu] = values
    sw = np.sqrt(grid.weights)
    return DiscretizedOperator(grid=grid, M=sw[:, None] * K * sw[None, :], name=kernel.name)


def _check_grids(*ops: DiscretizedOperator):
    first = ops[0].grid
    for op in ops[1:]:
        g = op.grid
        if g is first:
            continue
        if g.m != first.m or g.s != first.s or g.T != first.T:
            raise GridMismatchError(
                "作用素のグリッドが一致しません",
                {"grids": [(o.grid.s, o.grid.m, o.grid.T) for o in ops]},
            )


def compose_S_tau(G: DiscretizedOperator, H: DiscretizedOperator) -> DiscretizedOperator:
    """S_τ = H_τG_τ + G_τH_τ の行列表現 H̃G̃ + G̃H̃"""
    _check_grids(G, H)
    A = H.M @ G.M
    return DiscretizedOperator(grid=G.grid, M=A + A.T, name=f"S[{G.name},{H.name}]")


def fredholm_det(op: DiscretizedOperator) -> float:
    """det(I - M)（部分ピボット付き LU 分解）"""
    m = op.M.shape[0]
    lu, piv = linalg.lu_factor(np.eye(m) - op.M, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(m)))
    det = float(np.prod(np.diag(lu)))
    return -det if swaps % 2 else det


def det_with_refinement(
    build: Callable[[int], DiscretizedOperator],
    target_tol: float = 1e-10,
    m0: int = DEFAULT_NODES,
    m_max: int = MAX_NODES,
) -> float:
    """
    節点数を倍にしながら行列式を計算し、連続する値の差が target_tol 未満で返す

    Args:
        build: 節点数 m から離散化作用素を作る関数
    """
    m = m0
    previous = fredholm_det(build(m))
    history: List[Tuple[int, float]] = [(m, previous)]
    while m < m_max:
        m *= 2
        current = fredholm_det(build(m))
        history.append((m, current))
        if abs(current - previous) < target_tol:
            return current
        previous = current
    get_logger().error("フレドホルム行列式が収束しません", f"履歴: {history}")
    raise ConvergenceError(
        "フレドホルム行列式の細分化が m = 2048 までに収束しません",
        {"history": history, "target_tol": target_tol},
    )


def frobenius_norm(op: DiscretizedOperator) -> float:
    """離散化した Hilbert–Schmidt ノルム"""
    return float(np.linalg.norm(op.M, "fro"))


def hs_norm_shift(kernel: ShiftKernel, s: float) -> float:
    """‖A‖₂(s) = (∫_s^∞ (u - s) K(u)² du)^{1/2}（一次元への帰着）"""
    upper = s + decay_length([kernel], s)

    def integrand(u: float) -> float:
        return (u - s) * float(kernel(np.array([u]))[0]) ** 2

    value, _ = integrate.quad(integrand, s, upper, epsabs=1e-15, epsrel=1e-11, limit=500)
    if not np.isfinite(value):
        raise ConvergenceError("HSノルムの積分が発散しました", {"s": s, "kernel": kernel.name})
    return math.sqrt(max(value, 0.0))


def trace_norm(op: DiscretizedOperator) -> float:
    """対称行列の固有値の絶対値和"""
    return float(np.sum(np.abs(linalg.eigvalsh(op.M))))


def airy_trace_norm_closed(s: float) -> float:
    """‖S̄‖₁(s) = (-Ai Ai' - 2s Ai'² + 2s² Ai²)/3"""
    ai, aip = airy_ai(s), airy_ai_prime(s)
    return (-ai * aip - 2.0 * s * aip * aip + 2.0 * s * s * ai * ai) / 3.0


def airy_trace_norm_quadrature(s: float, upper: float = 25.0) -> float:
    """∫₀^∞ ∫_s^∞ Ai²(x+u) dx du の二重積分による独立評価"""
    value, _ = integrate.dblquad(
        lambda x, u: airy_ai(x + u) ** 2,
        0.0,
        upper,
        lambda u: s,
        lambda u: upper,
        epsabs=1e-13,
        epsrel=1e-11,
    )
    return value


def seiler_simon_bound(A: DiscretizedOperator, B: DiscretizedOperator) -> float:
    """‖A - B‖₁ exp(‖A‖₁ + ‖B‖₁ + 1)"""
    _check_grids(A, B)
    diff = DiscretizedOperator(grid=A.grid, M=A.M - B.M)
    return trace_norm(diff) * math.exp(trace_norm(A) + trace_norm(B) + 1.0)


def lemma2_bound(
    G_t: DiscretizedOperator, H_t: DiscretizedOperator, G: DiscretizedOperator
) -> Tuple[float, float]:
    """
    2‖S_τ - S̄‖₁ と ‖G_τ+H_τ-2G‖₂‖G_τ+H_τ+2G‖₂ + ‖G_τ-H_τ‖₂² の組
    """
    _check_grids(G_t, H_t, G)
    S_tau = compose_S_tau(G_t, H_t)
    S_bar = compose_S_tau(G, G)
    lhs = 2.0 * trace_norm(DiscretizedOperator(grid=G.grid, M=S_tau.M - S_bar.M))
    P = G_t.M + H_t.M
    rhs = (
        np.linalg.norm(P - 2.0 * G.M, "fro") * np.linalg.norm(P + 2.0 * G.M, "fro")
        + np.linalg.norm(G_t.M - H_t.M, "fro") ** 2
    )
    return float(lhs), float(rhs)
