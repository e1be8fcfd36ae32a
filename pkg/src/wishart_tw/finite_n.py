#!/usr/bin/env python3
"""
有限 (n, N) 最大固有値分布モジュール

再スケールした核 φ_τ, ψ_τ から S_τ = H_τG_τ + G_τH_τ を作り、
P((l - μ̃)/σ̃ ≤ s) = det(I - S_τ) を計算します。
独立な検証経路としてラゲール射影核（Christoffel–Darboux 核）の行列式も提供します。
"""

import math
from typing import Iterable, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.wishart_tw.errors import DomainError
from src.wishart_tw.operators import (
    DiscretizedOperator,
    ShiftKernel,
    build_grid,
    compose_S_tau,
    decay_length,
    det_with_refinement,
    discretize,
)
from src.wishart_tw.sequences import CenteringScaling
from src.wishart_tw.specfun import WishartPair, laguerre_phi_table, phi_fn, psi_fn
from src.wishart_tw.tw import F2_fredholm


class RescaledKernels(BaseModel):
    """(μ̃, σ̃) で再スケールした φ_τ, ψ_τ とその有効左端"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pair: WishartPair
    cs: CenteringScaling
    phi_tau: ShiftKernel
    psi_tau: ShiftKernel

    @property
    def z_min(self) -> float:
        return -self.cs.mu / self.cs.sigma


def _rescaled(fn, pair: WishartPair, cs: CenteringScaling):
    def profile(z: np.ndarray) -> np.ndarray:
        x = cs.mu + cs.sigma * np.asarray(z, dtype=float)
        if np.any(x <= 0.0):
            raise DomainError(
                "核の引数 μ̃ + σ̃z が正ではありません",
                {"z_min": -cs.mu / cs.sigma, "z": float(np.min(z))},
            )
        return cs.sigma * np.asarray(fn(pair, x), dtype=float)

    return profile


def make_kernels(pair: WishartPair, cs: CenteringScaling) -> RescaledKernels:
    """φ_τ(z) = σ̃ φ(μ̃ + σ̃z), ψ_τ(z) = σ̃ ψ(μ̃ + σ̃z)"""
    z_min = -cs.mu / cs.sigma
    psi_tau = ShiftKernel(profile=_rescaled(psi_fn, pair, cs), name="psi_tau", z_min=z_min)
    if pair.alpha_N == 0:
        phi_tau = psi_tau
    else:
        phi_tau = ShiftKernel(profile=_rescaled(phi_fn, pair, cs), name="phi_tau", z_min=z_min)
    return RescaledKernels(pair=pair, cs=cs, phi_tau=phi_tau, psi_tau=psi_tau)


def validity_floor(cs: CenteringScaling) -> float:
    """cdf_exact の下限 -min(8, (μ̃ - 10⁻⁶)/σ̃)"""
    return -min(8.0, (cs.mu - 1e-6) / cs.sigma)


def s_tau_builder(kernels: RescaledKernels, s: float):
    """節点数 m から (G̃_τ, H̃_τ, S̃_τ) を作る関数と打ち切り長"""
    T = decay_length([kernels.phi_tau, kernels.psi_tau], s)

    def build(m: int) -> Tuple[DiscretizedOperator, DiscretizedOperator, DiscretizedOperator]:
        grid = build_grid(s, m, T=T)
        G = discretize(kernels.phi_tau, grid)
        H = G if kernels.psi_tau is kernels.phi_tau else discretize(kernels.psi_tau, grid)
        return G, H, compose_S_tau(G, H)

    return build, T


def cdf_exact(pair: WishartPair, cs: CenteringScaling, s: float, tol: float = 1e-10) -> float:
    """
    P((l - μ̃)/σ̃ ≤ s) = det(I - S_τ)

    Raises:
        DomainError: s が有効下限より小さい場合
    """
    floor = validity_floor(cs)
    if s < floor:
        raise DomainError("s が有効範囲の下限より小さいです", {"s": s, "floor": floor})
    build, _ = s_tau_builder(make_kernels(pair, cs), s)
    value = det_with_refinement(lambda m: build(m)[2], target_tol=tol)
    return float(np.clip(value, 0.0, 1.0))


def cdf_oracle_cd(pair: WishartPair, x_raw: float, tol: float = 1e-10) -> float:
    """
    P(l ≤ x) = det(I - K_N)、K_N(x, y) = Σ_{k<N} φ_k(x; α_N) φ_k(y; α_N)

    固有値の元の尺度で (x, ∞) 上に離散化する。
    """
    if x_raw <= 0.0:
        raise DomainError("x は正である必要があります", {"x": x_raw})
    alpha = float(pair.alpha_N)

    def diagonal(u: np.ndarray) -> np.ndarray:
        table = laguerre_phi_table(pair.N - 1, alpha, u)
        return np.sqrt(np.sum(table * table, axis=0))

    T = decay_length([ShiftKernel(profile=diagonal, name="cd_diagonal")], x_raw)

    def build(m: int) -> DiscretizedOperator:
        grid = build_grid(x_raw, m, T=T)
        B = laguerre_phi_table(pair.N - 1, alpha, grid.nodes) * np.sqrt(grid.weights)[None, :]
        return DiscretizedOperator(grid=grid, M=B.T @ B, name="christoffel_darboux")

    return float(np.clip(det_with_refinement(build, target_tol=tol), 0.0, 1.0))


def distance_profile(
    pair: WishartPair, cs: CenteringScaling, s_grid: Iterable[float]
) -> List[Tuple[float, float]]:
    """(s, e^s |cdf_exact(s) - F₂(s)|) の列"""
    return [(s, math.exp(s) * abs(cdf_exact(pair, cs, s) - F2_fredholm(s))) for s in s_grid]
