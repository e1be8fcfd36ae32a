#!/usr/bin/env python3
"""
中心化・スケーリング列モジュール

素朴な列 (μ_{n,N}, σ_{n,N})、一次の偏差項を打ち消す改良列 (μ̃, σ̃)、
Liouville–Green パラメータ、正規化定数 r_N、α係数と診断量 c_N, s_N を計算します。

ずらした組 (n-1, N), (n, N-1) は n₊, N₊ を 1/2 ずつ減らした値で評価します
（N = 1 のとき N₊ - 1 = 1/2 > 0 となり特別扱いは不要）。
"""

import math
from typing import Iterable, Literal, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.wishart_tw.errors import DomainError
from src.wishart_tw.specfun import WishartPair, edge_center_scale, log_gamma

Side = Literal["phi", "psi"]


class CenteringScaling(BaseModel):
    """中心 mu とスケール sigma の組（固有値の単位）"""

    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., gt=0.0)
    sigma: float = Field(..., gt=0.0)
    kind: Literal["naive", "refined"] = "naive"


class LGParams(BaseModel):
    """ホイッテーカー方程式の Liouville–Green パラメータ"""

    model_config = ConfigDict(frozen=True)

    kappa: float
    lam: float
    omega: float = Field(..., ge=0.0, lt=2.0)
    xi1: float
    xi2: float
    gap_alpha: float
    beta_xi: float
    eta: float

    @model_validator(mode="after")
    def _turning_points(self) -> "LGParams":
        if not self.xi1 < self.xi2:
            raise ValueError("転回点は ξ₁ < ξ₂ である必要があります")
        return self


def naive_sequences(pair: WishartPair) -> CenteringScaling:
    """μ_{n,N} = (√n₊ + √N₊)², σ_{n,N} = (√n₊ + √N₊)(n₊^{-1/2} + N₊^{-1/2})^{1/3}"""
    mu, sigma = edge_center_scale(pair.n + 0.5, pair.N + 0.5)
    return CenteringScaling(mu=mu, sigma=sigma, kind="naive")


def side_center_scale(pair: WishartPair, side: Side) -> Tuple[float, float]:
    """ずらした組の (μ, σ)。phi は (n-1, N)、psi は (n, N-1)"""
    if side == "phi":
        return edge_center_scale(pair.n - 0.5, pair.N + 0.5)
    return edge_center_scale(pair.n + 0.5, pair.N - 0.5)


def side_pair(pair: WishartPair, side: Side) -> WishartPair:
    """ずらした組を WishartPair として返す（n ≥ N へ正規化される）"""
    if (side == "psi" and pair.N == 1) or (side == "phi" and pair.n == 1):
        raise DomainError("ずらした組の次元が 0 になります", {"n": pair.n, "N": pair.N})
    if side == "phi":
        return WishartPair.of(pair.n - 1, pair.N)
    return WishartPair.of(pair.n, pair.N - 1)


def refined_sequences(pair: WishartPair) -> Tuple[CenteringScaling, float]:
    """
    c_N = 0, s_N = 0 を満たす改良列 (μ̃, σ̃) と γ_{n,N}

    Returns:
        (CenteringScaling(kind="refined"), γ_{n,N})
    """
    mu1, s1 = side_center_scale(pair, "phi")
    mu2, s2 = side_center_scale(pair, "psi")
    gamma_nN = math.exp(
        math.log(mu1) + 0.5 * math.log(s2) - math.log(mu2) - 0.5 * math.log(s1)
    )
    sigma_t = (1.0 + gamma_nN) / (1.0 / s1 + gamma_nN / s2)
    mu_t = (s1**-0.5 + s2**-0.5) / (1.0 / (mu1 * math.sqrt(s1)) + 1.0 / (mu2 * math.sqrt(s2)))
    return CenteringScaling(mu=mu_t, sigma=sigma_t, kind="refined"), gamma_nN


def centering(pair: WishartPair, kind: str) -> CenteringScaling:
    """種類名から中心化・スケーリングを取得"""
    if kind == "naive":
        return naive_sequences(pair)
    cs, _ = refined_sequences(pair)
    return cs


def lg_params(pair: WishartPair) -> LGParams:
    """κ_N, λ_N, ω_N, 転回点 ξ₁, ξ₂ と η_N"""
    kappa = (pair.n + pair.N + 1) / 2.0
    lam = pair.alpha_N / 2.0
    omega = 2.0 * lam / kappa
    root = math.sqrt(4.0 - omega * omega)
    xi2 = 2.0 + root
    # ξ₁ξ₂ = ω² の形で桁落ちを避ける
    xi1 = omega * omega / xi2
    gap_alpha = 2.0 * root
    return LGParams(
        kappa=kappa,
        lam=lam,
        omega=omega,
        xi1=xi1,
        xi2=xi2,
        gap_alpha=gap_alpha,
        beta_xi=xi2,
        eta=1.0 / (2.0 * gap_alpha) - 1.0 / xi2,
    )


def r_N_exact(pair: WishartPair) -> float:
    """r_N² = 2π e^{-(n₊+N₊)} n₊^{n₊} N₊^{N₊} / (N! n!) を対数領域で計算"""
    n_plus, N_plus = pair.n + 0.5, pair.N + 0.5
    log_r2 = (
        math.log(2.0 * math.pi)
        - (n_plus + N_plus)
        + n_plus * math.log(n_plus)
        + N_plus * math.log(N_plus)
        - log_gamma(pair.N + 1.0)
        - log_gamma(pair.n + 1.0)
    )
    return math.exp(0.5 * log_r2)


def r_N_expansion(pair: WishartPair) -> float:
    """r_N の二次までの展開（係数はスターリング級数から）"""
    n, N = float(pair.n), float(pair.N)
    return (
        1.0
        + (1.0 / 48.0) * (1.0 / n + 1.0 / N)
        + 1.0 / (2304.0 * n * N)
        - (47.0 / 4608.0) * (1.0 / n**2 + 1.0 / N**2)
    )


def alpha_coefficient(pair: WishartPair, cs: CenteringScaling, which: Side) -> float:
    """α_{n-1,N} = √a_N σ_{n-1,N}^{1/2} σ̃/μ̃（psi 側は σ_{n,N-1}）"""
    _, sigma_side = side_center_scale(pair, which)
    return math.sqrt(pair.a_N) * math.sqrt(sigma_side) * cs.sigma / cs.mu


def sequence_diagnostics(
    pair: WishartPair, mu_tilde: float, sigma_tilde: float
) -> Tuple[float, float]:
    """一次の偏差係数 (c_N, s_N)"""
    mu1, s1 = side_center_scale(pair, "phi")
    mu2, s2 = side_center_scale(pair, "psi")
    root_a = math.sqrt(pair.a_N)
    c_N = (
        sigma_tilde
        * root_a
        * ((mu_tilde / mu1 - 1.0) / math.sqrt(s1) + (mu_tilde / mu2 - 1.0) / math.sqrt(s2))
    )
    s_N = (
        root_a
        * sigma_tilde
        * (
            (math.sqrt(s1) / mu1) * (sigma_tilde / s1 - 1.0)
            + (math.sqrt(s2) / mu2) * (sigma_tilde / s2 - 1.0)
        )
    )
    return c_N, s_N


def pair_for_gamma(gamma: float, N: int) -> WishartPair:
    """アスペクト比 γ = n/N の組 (round(γN), N)"""
    return WishartPair.of(max(int(round(gamma * N)), N), N)


def sequence_rate_sweep(gamma: float, N_grid: Iterable[int]) -> pd.DataFrame:
    """改良列の有界性を N のグリッド上で表にする"""
    rows = []
    for N in N_grid:
        pair = pair_for_gamma(gamma, N)
        cs, gamma_nN = refined_sequences(pair)
        mu1, s1 = side_center_scale(pair, "phi")
        naive = naive_sequences(pair)
        c_N, s_N = sequence_diagnostics(pair, cs.mu, cs.sigma)
        rows.append(
            {
                "n": pair.n,
                "N": pair.N,
                "mu": naive.mu,
                "sigma": naive.sigma,
                "mu_tilde": cs.mu,
                "sigma_tilde": cs.sigma,
                "gamma_nN": gamma_nN,
                "mu_gap": abs(cs.mu - mu1),
                "sigma_gap_scaled": pair.N * abs(cs.sigma / s1 - 1.0),
                "r_N": r_N_exact(pair),
                "c_N": c_N,
                "s_N": s_N,
            }
        )
    return pd.DataFrame(rows)
