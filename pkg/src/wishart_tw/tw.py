#!/usr/bin/env python3
"""
Tracy–Widom F₂ 分布モジュール

Painlevé II（Hastings–McLeod 解）の後退積分と Airy 核のフレドホルム行列式という
独立な二経路で F₂ を計算し、分位点を求めます。
"""

import math
import threading
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy import integrate, optimize

from src.wishart_tw.errors import ConvergenceError, RangeError, SolverBlowUpError
from src.wishart_tw.operators import (
    airy_kernel,
    build_grid,
    compose_S_tau,
    decay_length,
    det_with_refinement,
    discretize,
)
from src.wishart_tw.run_logger import get_logger
from src.wishart_tw.specfun import airy_ai, airy_ai_prime

# 分位点表（左2列）
TABLE_QUANTILES = [-3.73, -3.20, -2.90, -2.27, -1.81, -1.33, -0.60, -0.23, 0.48]
TABLE_TW_PROBS = [0.01, 0.05, 0.10, 0.30, 0.50, 0.70, 0.90, 0.95, 0.99]

BLOW_UP_LIMIT = 1e6
FREDHOLM_S_MIN = -10.0


class Painleve2Solution(BaseModel):
    """q'' = xq + 2q³, q ~ Ai の数値解（x_start から x_end へ降順）"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    x_start: float = 8.0
    x_end: float = -10.0
    tol: float = Field(1e-13, gt=0.0)
    _dense: object = PrivateAttr(default=None)

    def state_at(self, x: float) -> np.ndarray:
        """(q, q', ∫_x^∞ q², ∫_x^∞ (y-x) q²) の密出力"""
        if not self.x_end <= x <= self.x_start:
            raise RangeError("密出力の範囲外です", {"x": x})
        return np.asarray(self._dense(x))

    def q_at(self, x: float) -> float:
        return float(self.state_at(x)[0])


def _airy_tail(x0: float) -> tuple:
    first, _ = integrate.quad(lambda x: airy_ai(x) ** 2, x0, np.inf, epsabs=1e-30, epsrel=1e-13)
    second, _ = integrate.quad(
        lambda x: (x - x0) * airy_ai(x) ** 2, x0, np.inf, epsabs=1e-30, epsrel=1e-13
    )
    return first, second


def solve_painleve2(
    x_start: float = 8.0, x_end: float = -10.0, tol: float = 1e-13
) -> Painleve2Solution:
    """
    (q, q') = (Ai, Ai')(x_start) から DOP853 で後退積分する

    状態には ∫_x^∞ q² と ∫_x^∞ (y-x)q² も含め、F₂ を密出力から直接読めるようにする。

    Raises:
        RangeError: x_start < 6 または x_end < -12
        SolverBlowUpError: |q| > 10⁶
    """
    if x_start < 6.0:
        raise RangeError("x_start は 6 以上である必要があります", {"x_start": x_start})
    if x_end < -12.0 or x_end >= x_start:
        raise RangeError("x_end は [-12, x_start) の範囲で指定してください", {"x_end": x_end})

    tail_1, tail_2 = _airy_tail(x_start)
    y0 = [airy_ai(x_start), airy_ai_prime(x_start), tail_1, tail_2]

    def rhs(x, y):
        q, p, first, _ = y
        return [p, x * q + 2.0 * q**3, -q * q, -first]

    def blow_up(x, y):
        return abs(y[0]) - BLOW_UP_LIMIT

    blow_up.terminal = True

    sol = integrate.solve_ivp(
        rhs,
        (x_start, x_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=1e-30,
        dense_output=True,
        events=blow_up,
    )
    if sol.status == 1:
        raise SolverBlowUpError(
            "Painlevé II の解が発散しました。x_end を大きくしてください",
            {"x_blow_up": float(sol.t_events[0][0]), "x_end": x_end},
        )
    if not sol.success:
        raise ConvergenceError("Painlevé II の積分に失敗しました", {"message": sol.message})
    if np.any(sol.y[0] <= 0.0):
        get_logger().warning("Painlevé II の解が正でない節点があります", f"x_end={x_end}")

    result = Painleve2Solution(
        grid=sol.t, q=sol.y[0], dq=sol.y[1], x_start=x_start, x_end=x_end, tol=tol
    )
    result._dense = sol.sol
    return result


_lock = threading.Lock()
_cache_lock = threading.Lock()
_default_solution: Optional[Painleve2Solution] = None
_quantile_cache: Optional[tuple] = None


def default_solution() -> Painleve2Solution:
    """既定パラメータの解（初回のみ構築）"""
    global _default_solution
    if _default_solution is None:
        with _lock:
            if _default_solution is None:
                _default_solution = solve_painleve2()
    return _default_solution


def F2_painleve(s: float, solution: Optional[Painleve2Solution] = None) -> float:
    """F₂(s) = exp(-∫_s^∞ (x-s) q²(x) dx)"""
    sol = solution or default_solution()
    if s < sol.x_end:
        raise RangeError("s が Painlevé 解の範囲より小さいです", {"s": s, "x_end": sol.x_end})
    if s > sol.x_start:
        _, weighted = _airy_tail(s)
    else:
        weighted = float(sol.state_at(s)[3])
    return float(min(max(math.exp(-weighted), 0.0), 1.0))


def F2_fredholm(s: float, tol: float = 1e-12) -> float:
    """F₂(s) = det(I - S̄), S̄ = 2G², G は Airy シフト核"""
    if s < FREDHOLM_S_MIN:
        raise RangeError("F₂ のフレドホルム計算は s ≥ -10 のみ対応します", {"s": s})
    G = airy_kernel()
    T = decay_length([G], s)

    def build(m: int):
        op = discretize(G, build_grid(s, m, T=T))
        return compose_S_tau(op, op)

    return float(np.clip(det_with_refinement(build, target_tol=tol), 0.0, 1.0))


def _cache() -> tuple:
    global _quantile_cache
    if _quantile_cache is None:
        sol = default_solution()
        with _cache_lock:
            if _quantile_cache is None:
                grid = np.linspace(-10.0, 6.0, 1201)
                values = np.array([F2_painleve(s, sol) for s in grid])
                _quantile_cache = (grid, np.maximum.accumulate(values))
    return _quantile_cache


def tw_quantile(p: float) -> float:
    """
    F₂(s) = p となる s

    分位点キャッシュで挟み込み区間を求め、F2_fredholm 上で Brent 法により詰める。
    """
    if not 0.001 < p < 0.9999:
        raise RangeError("p は (0.001, 0.9999) の範囲で指定してください", {"p": p})
    grid, values = _cache()
    idx = int(np.searchsorted(values, p))
    lo_i, hi_i = max(idx - 2, 0), min(idx + 1, len(grid) - 1)

    def gap(s: float) -> float:
        return F2_fredholm(s) - p

    while gap(grid[lo_i]) > 0.0 and lo_i > 0:
        lo_i = max(lo_i - 4, 0)
    while gap(grid[hi_i]) < 0.0 and hi_i < len(grid) - 1:
        hi_i = min(hi_i + 4, len(grid) - 1)
    root = optimize.brentq(gap, grid[lo_i], grid[hi_i], xtol=1e-13, rtol=1e-14)
    if abs(gap(root)) > 1e-8:
        raise ConvergenceError("分位点の精度が不足しています", {"p": p, "s": root})
    return float(root)


def tw_density(s: float, h: float = 1e-3) -> float:
    """F₂ の中心差分による密度"""
    return (F2_painleve(s + h) - F2_painleve(s - h)) / (2.0 * h)


def tw_table(quantiles: Iterable[float] = TABLE_QUANTILES, route: str = "fredholm") -> pd.DataFrame:
    """分位点ごとの F₂ 値の表"""
    fn = F2_fredholm if route == "fredholm" else F2_painleve
    qs = list(quantiles)
    return pd.DataFrame({"quantile": qs, "tw_cdf": [fn(q) for q in qs]})
