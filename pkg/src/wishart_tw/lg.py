#!/usr/bin/env python3
"""
Liouville–Green 近似モジュール

ホイッテーカー方程式を摂動Airy方程式へ変換する変数変換 ζ(ξ)、
f̂ = f/ζ による振幅因子、F_{n,N} の Airy 近似と、
中心化の良し悪しを測る偏差量 θ, B, D, u を計算します。
"""

import math
from typing import Iterable, List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from src.wishart_tw.errors import ConvergenceError, RangeError
from src.wishart_tw.sequences import (
    CenteringScaling,
    LGParams,
    Side,
    alpha_coefficient,
    centering,
    lg_params,
    naive_sequences,
    pair_for_gamma,
    r_N_exact,
    side_pair,
)
from src.wishart_tw.specfun import F_nN, WishartPair, airy_ai

# |ε| がこれ未満では f̂ 因子を級数で評価する
SWITCH_THRESHOLD = 1e-4

DEFAULT_DEVIATION_S_GRID = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0]
DEFAULT_DEVIATION_N_GRID = [20, 40, 80, 160]


class LGFrame(BaseModel):
    """組 (n, N) ごとの Liouville–Green データ（構築後は不変）"""

    model_config = ConfigDict(frozen=True)

    params: LGParams
    pair: WishartPair
    sigma: float = Field(..., gt=0.0, description="σ_{n,N}")
    tol: float = Field(1e-12, gt=0.0)

    @property
    def kappa(self) -> float:
        return self.params.kappa


class DeviationReport(BaseModel):
    """偏差量 B, D, u とその評価点"""

    s: float
    B: float = Field(..., ge=0.0)
    D: float
    u: float
    epsilon: float
    zeta_scaled: float
    theta: float


def make_frame(pair: WishartPair, tol: float = 1e-12) -> LGFrame:
    """組から LGFrame を構築"""
    return LGFrame(params=lg_params(pair), pair=pair, sigma=naive_sequences(pair).sigma, tol=tol)


def f_of_xi(params: LGParams, xi: float) -> float:
    """f(ξ) = (ξ - ξ₁)(ξ - ξ₂) / (4ξ²)"""
    if xi <= 0.0:
        raise RangeError("ξ は正である必要があります", {"xi": xi})
    return (xi - params.xi1) * (xi - params.xi2) / (4.0 * xi * xi)


def g_of_xi(xi: float) -> float:
    """g(ξ) = -1 / (4ξ²)"""
    if xi <= 0.0:
        raise RangeError("ξ は正である必要があります", {"xi": xi})
    return -1.0 / (4.0 * xi * xi)


def zeta_of_xi(frame: LGFrame, xi: float) -> float:
    """
    符号付き変数変換 ζ(ξ)

    ξ ≥ ξ₂ では (2/3)ζ^{3/2} = ∫_{ξ₂}^{ξ} √f、ξ₁ < ξ < ξ₂ では
    (2/3)(-ζ)^{3/2} = ∫_{ξ}^{ξ₂} √(-f)。t = ξ₂ ± w² と置換して端点の平方根特異性を除く。
    """
    p = frame.params
    if xi <= p.xi1:
        raise RangeError("ξ が転回点 ξ₁ 以下です", {"xi": xi, "xi1": p.xi1})
    eps = xi - p.xi2
    if eps == 0.0:
        return 0.0
    w_max = math.sqrt(abs(eps))
    if eps > 0.0:

        def integrand(w: float) -> float:
            return w * w * math.sqrt(w * w + p.gap_alpha) / (p.xi2 + w * w)

    else:

        def integrand(w: float) -> float:
            return w * w * math.sqrt(max(p.gap_alpha - w * w, 0.0)) / (p.xi2 - w * w)

    value, abserr = integrate.quad(integrand, 0.0, w_max, epsabs=0.0, epsrel=frame.tol, limit=200)
    if not np.isfinite(value) or abserr > 1e-6 * max(abs(value), 1.0):
        raise ConvergenceError("ζ の求積が収束しません", {"xi": xi, "abserr": abserr})
    magnitude = (1.5 * value) ** (2.0 / 3.0)
    return magnitude if eps > 0.0 else -magnitude


def _fhat_series(params: LGParams, eps: float) -> float:
    a, b, eta = params.gap_alpha, params.beta_xi, params.eta
    q = -1.0 / (8.0 * a * a) - 1.0 / (2.0 * a * b) + 1.0 / (b * b)
    z1 = 0.4 * eta
    z2 = (2.0 / 7.0) * q - eta * eta / 25.0
    y1 = -1.6 * eta
    y2 = z2 - 0.5 * z1 * z1 - 1.0 / (b * b) + 1.0 / (2.0 * a * a)
    return math.exp(0.25 * (y1 * eps + y2 * eps * eps))


def fhat_quarter_factor(frame: LGFrame, xi: float) -> float:
    """
    (κ/σ³)^{1/6} f̂^{-1/4}(ξ)

    ξ₂ の近傍では 1 - (2/5)εη + O(ε²) の級数（二次まで）で 0/0 を避ける。
    """
    p = frame.params
    eps = xi - p.xi2
    if abs(eps) < SWITCH_THRESHOLD:
        return _fhat_series(p, eps)
    zeta = zeta_of_xi(frame, xi)
    fhat = f_of_xi(p, xi) / zeta
    return (p.kappa / frame.sigma**3) ** (1.0 / 6.0) * fhat ** (-0.25)


def scaled_zeta(frame: LGFrame, x: float) -> float:
    """κ^{2/3} ζ(x/κ)"""
    return frame.kappa ** (2.0 / 3.0) * zeta_of_xi(frame, x / frame.kappa)


def scaled_zeta_expansion(frame: LGFrame, x: float) -> float:
    """(εκ/σ)(1 + (2/5)εη) による κ^{2/3}ζ の近似"""
    eps = x / frame.kappa - frame.params.xi2
    return eps * frame.kappa / frame.sigma * (1.0 + 0.4 * eps * frame.params.eta)


def lg_approx_F(frame: LGFrame, x: float) -> float:
    """r_N (κ/σ³)^{1/6} f̂^{-1/4}(ξ) Ai(κ^{2/3}ζ), ξ = x/κ"""
    if x <= frame.kappa * frame.params.xi1:
        raise RangeError("x が κξ₁ 以下です", {"x": x})
    xi = x / frame.kappa
    return (
        r_N_exact(frame.pair)
        * fhat_quarter_factor(frame, xi)
        * airy_ai(frame.kappa ** (2.0 / 3.0) * zeta_of_xi(frame, xi))
    )


def deviation_report(
    pair: WishartPair, cs: CenteringScaling, side: Side, s: float
) -> DeviationReport:
    """
    x = μ̃ + σ̃s における偏差量

    phi 側は (n-1, N)、psi 側は (n, N-1) の組で θ, B, D, u を評価する。
    """
    sp = side_pair(pair, side)
    frame = make_frame(sp)
    x = cs.mu + cs.sigma * s
    if x <= frame.kappa * frame.params.xi1:
        raise RangeError("評価点が転回点 κξ₁ 以下です", {"x": x, "side": side})
    zs = scaled_zeta(frame, x)
    theta = F_nN(sp, x) * naive_sequences(sp).mu / x
    ai_z = airy_ai(zs)
    return DeviationReport(
        s=s,
        B=abs(theta - r_N_exact(sp) * ai_z),
        D=ai_z - airy_ai(s),
        u=zs - s,
        epsilon=x / frame.kappa - frame.params.xi2,
        zeta_scaled=zs,
        theta=theta,
    )


def deviation_sweep(
    gamma: float,
    N_grid: Iterable[int] = DEFAULT_DEVIATION_N_GRID,
    s_grid: Iterable[float] = DEFAULT_DEVIATION_S_GRID,
    cs_kind: str = "refined",
) -> pd.DataFrame:
    """両側の偏差量と重み付き結合 α_φu_φ + α_ψu_ψ を (N, s) ごとに表にする"""
    rows: List[dict] = []
    for N in N_grid:
        pair = pair_for_gamma(gamma, N)
        cs = centering(pair, cs_kind)
        a_phi = alpha_coefficient(pair, cs, "phi")
        a_psi = alpha_coefficient(pair, cs, "psi")
        for s in s_grid:
            rep_phi = deviation_report(pair, cs, "phi", s)
            rep_psi = deviation_report(pair, cs, "psi", s)
            rows.append(
                {
                    "n": pair.n,
                    "N": pair.N,
                    "s": s,
                    "B_phi": rep_phi.B,
                    "B_psi": rep_psi.B,
                    "D_phi": rep_phi.D,
                    "D_psi": rep_psi.D,
                    "u_phi": rep_phi.u,
                    "u_psi": rep_psi.u,
                    "alpha_phi": a_phi,
                    "alpha_psi": a_psi,
                    "combined_u": a_phi * rep_phi.u + a_psi * rep_psi.u,
                }
            )
    return pd.DataFrame(rows)


def lg_error_sweep(
    gamma: float, N_grid: Iterable[int], s_grid: Iterable[float]
) -> pd.DataFrame:
    """max_s |F_{n,N} - F_LG| を x = μ_{n,N} + σ_{n,N}s で測る"""
    rows = []
    s_values = list(s_grid)
    for N in N_grid:
        pair = pair_for_gamma(gamma, N)
        frame = make_frame(pair)
        cs = naive_sequences(pair)
        errors = [
            abs(F_nN(pair, cs.mu + cs.sigma * s) - lg_approx_F(frame, cs.mu + cs.sigma * s))
            for s in s_values
        ]
        rows.append({"n": pair.n, "N": pair.N, "kappa": frame.kappa, "max_error": max(errors)})
    return pd.DataFrame(rows)
