#!/usr/bin/env python3
"""
収束率スイープモジュール

核レベルの評価（φ_τ + ψ_τ ≈ 2G など）、HSノルム、有限N分布と F₂ の距離、
M(s₀) の経験的包絡を N の幾何グリッド上で測り、包絡と対数勾配を報告します。
すべて決定的な計算です。
"""

import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm

from src.wishart_tw.errors import DomainError
from src.wishart_tw.finite_n import RescaledKernels, cdf_exact, make_kernels, validity_floor
from src.wishart_tw.operators import (
    DEFAULT_NODES,
    DiscretizedOperator,
    ShiftKernel,
    airy_kernel,
    airy_trace_norm_closed,
    build_grid,
    compose_S_tau,
    discretize,
    fredholm_det,
    hs_norm_shift,
    lemma2_bound,
    seiler_simon_bound,
    trace_norm,
)
from src.wishart_tw.run_logger import get_logger
from src.wishart_tw.sequences import centering, naive_sequences, pair_for_gamma
from src.wishart_tw.specfun import airy_ai
from src.wishart_tw.tw import F2_fredholm

DEFAULT_S_GRID = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0]
INEQUALITY_SLACK = 1e-10
SQRT2 = math.sqrt(2.0)


class RateReport(BaseModel):
    """スイープ結果：生の量、N ごとの重み付き包絡、対数勾配"""

    label: str
    gamma: float
    N_grid: List[int]
    s_grid: List[float]
    raw: List[List[float]]
    scaled_envelope: List[float]
    fitted_slope: Optional[float] = None
    beta: float = Field(..., description="主張される指数（1/3 または 2/3）")
    weight: str = "exp(s/2)"
    cs_kind: str = "refined"
    checks: List[Dict[str, Any]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _validate(self) -> "RateReport":
        if any(b <= a for a, b in zip(self.N_grid, self.N_grid[1:])):
            raise ValueError("N_grid は狭義単調増加である必要があります")
        if not np.all(np.isfinite(np.asarray(self.raw, dtype=float))):
            raise ValueError("raw に有限でない値があります")
        return self

    def envelope_ratios(self) -> List[float]:
        """連続する N の包絡比"""
        env = self.scaled_envelope
        return [b / a for a, b in zip(env, env[1:])]

    def to_frame(self) -> pd.DataFrame:
        """(N, s) ごとの縦持ち表"""
        rows = []
        for i, N in enumerate(self.N_grid):
            for j, s in enumerate(self.s_grid):
                rows.append(
                    {
                        "label": self.label,
                        "gamma": self.gamma,
                        "N": N,
                        "s": s,
                        "raw": self.raw[i][j],
                        "scaled": self.raw[i][j] * _weight(self.weight, s) * N**self.beta,
                        "envelope": self.scaled_envelope[i],
                        "fitted_slope": self.fitted_slope,
                    }
                )
        return pd.DataFrame(rows)


def _weight(kind: str, s: float) -> float:
    # theorem2 の raw は重み込み
    if kind == "exp(s/2)":
        return math.exp(0.5 * s)
    return 1.0


def fitted_slope(N_grid: Sequence[int], maxima: Sequence[float]) -> Optional[float]:
    """log(max) 対 log N の最小二乗勾配（3点未満は None）"""
    if len(N_grid) < 3 or any(v <= 0.0 for v in maxima):
        return None
    slope, _ = np.polyfit(np.log(np.asarray(N_grid, float)), np.log(np.asarray(maxima)), 1)
    return float(slope)


def _report(
    label: str,
    gamma: float,
    N_grid: List[int],
    s_grid: List[float],
    raw: np.ndarray,
    beta: float,
    cs_kind: str,
    weight: str = "exp(s/2)",
    checks: Optional[List[Dict[str, Any]]] = None,
) -> RateReport:
    w = np.array([_weight(weight, s) for s in s_grid])
    weighted = raw * w[None, :]
    maxima = weighted.max(axis=1)
    envelope = [float(m * N**beta) for m, N in zip(maxima, N_grid)]
    return RateReport(
        label=label,
        gamma=gamma,
        N_grid=N_grid,
        s_grid=s_grid,
        raw=raw.tolist(),
        scaled_envelope=envelope,
        fitted_slope=fitted_slope(N_grid, list(maxima)),
        beta=beta,
        weight=weight,
        cs_kind=cs_kind,
        checks=checks or [],
    )


def _kernels_for(gamma: float, N: int, cs_kind: str) -> RescaledKernels:
    pair = pair_for_gamma(gamma, N)
    return make_kernels(pair, centering(pair, cs_kind))


def _progress(items: Iterable, desc: str):
    return tqdm(list(items), desc=desc, disable=None)


def fact221_sweep(
    gamma: float,
    N_grid: Iterable[int],
    s_grid: Iterable[float] = DEFAULT_S_GRID,
    cs_kind: str = "refined",
) -> Tuple[RateReport, RateReport, RateReport]:
    """
    |φ_τ + ψ_τ - √2 Ai|（N^{2/3}）、|φ_τ - Ai/√2|、|ψ_τ - Ai/√2|（N^{1/3}）を e^{z/2} 重みで測る
    """
    Ns, zs = list(N_grid), np.asarray(list(s_grid), dtype=float)
    combined, phi_dev, psi_dev = [], [], []
    G = airy_ai(zs) / SQRT2
    for N in _progress(Ns, "fact221"):
        k = _kernels_for(gamma, N, cs_kind)
        phi, psi = k.phi_tau(zs), k.psi_tau(zs)
        combined.append(np.abs(phi + psi - 2.0 * G))
        phi_dev.append(np.abs(phi - G))
        psi_dev.append(np.abs(psi - G))
    z_list = zs.tolist()
    return (
        _report("fact221_combined", gamma, Ns, z_list, np.array(combined), 2.0 / 3.0, cs_kind),
        _report("fact221_phi", gamma, Ns, z_list, np.array(phi_dev), 1.0 / 3.0, cs_kind),
        _report("fact221_psi", gamma, Ns, z_list, np.array(psi_dev), 1.0 / 3.0, cs_kind),
    )


def _difference(k: RescaledKernels, which: str) -> ShiftKernel:
    def profile(u: np.ndarray) -> np.ndarray:
        g = airy_ai(u) / SQRT2
        if which == "combined":
            return k.phi_tau(u) + k.psi_tau(u) - 2.0 * g
        if which == "phi":
            return k.phi_tau(u) - g
        return k.psi_tau(u) - g

    return ShiftKernel(profile=profile, name=f"diff_{which}", z_min=k.phi_tau.z_min)


def lemma3_sweep(
    gamma: float,
    N_grid: Iterable[int],
    s_grid: Iterable[float] = DEFAULT_S_GRID,
    cs_kind: str = "refined",
) -> Tuple[RateReport, RateReport, RateReport]:
    """‖G_τ+H_τ-2G‖₂、‖G_τ-G‖₂、‖H_τ-G‖₂ を e^{s/2} 重みで測る"""
    Ns, ss = list(N_grid), list(s_grid)
    tables = {"combined": [], "phi": [], "psi": []}
    for N in _progress(Ns, "lemma3"):
        k = _kernels_for(gamma, N, cs_kind)
        for which, rows in tables.items():
            kernel = _difference(k, which)
            rows.append([hs_norm_shift(kernel, s) for s in ss])
    return (
        _report("lemma3_P1", gamma, Ns, ss, np.array(tables["combined"]), 2.0 / 3.0, cs_kind),
        _report("lemma3_P2", gamma, Ns, ss, np.array(tables["phi"]), 1.0 / 3.0, cs_kind),
        _report("lemma3_P3", gamma, Ns, ss, np.array(tables["psi"]), 1.0 / 3.0, cs_kind),
    )


def _operators_on_common_grid(
    k: RescaledKernels, s: float, m: int = DEFAULT_NODES
) -> Tuple[DiscretizedOperator, DiscretizedOperator, DiscretizedOperator]:
    G_air = airy_kernel()
    grid = build_grid(s, m, kernels=[k.phi_tau, k.psi_tau, G_air])
    G_t = discretize(k.phi_tau, grid)
    H_t = G_t if k.psi_tau is k.phi_tau else discretize(k.psi_tau, grid)
    return G_t, H_t, discretize(G_air, grid)


def inequality_check(k: RescaledKernels, s: float) -> Dict[str, Any]:
    """Seiler–Simon 不等式と HS 分解不等式を共通グリッド上で確認"""
    G_t, H_t, G = _operators_on_common_grid(k, s)
    S_tau, S_bar = compose_S_tau(G_t, H_t), compose_S_tau(G, G)
    det_gap = abs(fredholm_det(S_tau) - fredholm_det(S_bar))
    bound = seiler_simon_bound(S_tau, S_bar)
    lhs, rhs = lemma2_bound(G_t, H_t, G)
    check = {
        "N": k.pair.N,
        "s": s,
        "det_gap": det_gap,
        "seiler_simon": bound,
        "seiler_simon_ok": det_gap <= bound + INEQUALITY_SLACK,
        "lemma2_lhs": lhs,
        "lemma2_rhs": rhs,
        "lemma2_ok": lhs <= rhs + INEQUALITY_SLACK,
        "trace_norm_diff": trace_norm(
            DiscretizedOperator(grid=S_tau.grid, M=S_tau.M - S_bar.M)
        ),
    }
    if not (check["seiler_simon_ok"] and check["lemma2_ok"]):
        get_logger().warning("作用素不等式が成り立たない点があります", f"N={k.pair.N}, s={s}")
    return check


def theorem2_sweep(
    gamma: float,
    N_grid: Iterable[int],
    s_grid: Iterable[float] = DEFAULT_S_GRID,
    cs_kind: str = "refined",
    tol: float = 1e-10,
) -> RateReport:
    """d_N(s) = e^s |cdf_exact - F₂|、包絡 max_s N^{2/3} d_N と対数勾配"""
    Ns, ss = list(N_grid), list(s_grid)
    F2 = {s: F2_fredholm(s) for s in ss}
    raw, checks = [], []
    for N in _progress(Ns, "theorem2"):
        k = _kernels_for(gamma, N, cs_kind)
        floor = validity_floor(k.cs)
        row = []
        for s in ss:
            if s < floor:
                raise DomainError("s が有効範囲の下限より小さいです", {"s": s, "N": N, "floor": floor})
            row.append(math.exp(s) * abs(cdf_exact(k.pair, k.cs, s, tol=tol) - F2[s]))
            checks.append(inequality_check(k, s))
        raw.append(row)
    return _report(
        "theorem2", gamma, Ns, ss, np.array(raw), 2.0 / 3.0, cs_kind, weight="exp(s)", checks=checks
    )


def m_envelope(
    gamma: float,
    N_grid: Iterable[int],
    s0_grid: Iterable[float],
    s_grid: Iterable[float] = DEFAULT_S_GRID,
    cs_kind: str = "refined",
) -> pd.DataFrame:
    """
    Ĉ(s₀) = max_{s ≥ s₀} e^{s/2} N^{2/3} ‖S_τ - S̄‖₁(s)、M̂(s₀) = Ĉ(s₀) e^{2 + 2‖S̄‖₁(s₀)}
    """
    s0s = sorted(s0_grid)
    ss = sorted(set(s_grid) | set(s0s))
    ss = [s for s in ss if s >= s0s[0]]
    values = []
    for N in _progress(list(N_grid), "m-envelope"):
        k = _kernels_for(gamma, N, cs_kind)
        for s in ss:
            G_t, H_t, G = _operators_on_common_grid(k, s)
            S_tau, S_bar = compose_S_tau(G_t, H_t), compose_S_tau(G, G)
            diff = trace_norm(DiscretizedOperator(grid=G.grid, M=S_tau.M - S_bar.M))
            values.append((s, math.exp(0.5 * s) * N ** (2.0 / 3.0) * diff))
    c_hat = [max(v for s, v in values if s >= s0) for s0 in s0s]
    airy_norm = [airy_trace_norm_closed(s0) for s0 in s0s]
    m_hat = [c * math.exp(2.0 + 2.0 * a) for c, a in zip(c_hat, airy_norm)]
    # 右からの累積最大で非増加にそろえる
    m_hat = np.maximum.accumulate(np.asarray(m_hat)[::-1])[::-1]
    return pd.DataFrame(
        {"s0": s0s, "C_hat": c_hat, "airy_trace_norm": airy_norm, "M_hat": m_hat.tolist()}
    )


def naive_limit_check(gamma: float, N_grid: Iterable[int], s: float) -> pd.DataFrame:
    """素朴な列での |P(l ≤ μ + σs) - F₂(s)|（N とともに 0 へ向かう）"""
    target = F2_fredholm(s)
    rows = []
    for N in N_grid:
        pair = pair_for_gamma(gamma, N)
        cs = naive_sequences(pair)
        rows.append({"n": pair.n, "N": N, "s": s, "distance": abs(cdf_exact(pair, cs, s) - target)})
    return pd.DataFrame(rows)
