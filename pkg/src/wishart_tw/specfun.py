#!/usr/bin/env python3
"""
特殊関数モジュール

Airy関数、対数ガンマ、正則化不完全ガンマ、重み付き正規直交ラゲール関数と、
ウィシャート最大固有値の核を構成する φ, ψ, F_{n,N} を提供します。

ラゲール関数は重み √(x^α e^{-x}) と正規化を漸化式の初期値に含めた形で直接計算し、
大きな次数・引数でもオーバーフローしないよう対数スケールを併用します。
"""

import math
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import special

from src.wishart_tw.errors import DomainError

ArrayLike = Union[float, np.ndarray]

# |p| がこれを超えたら対数スケールへ退避する
_RESCALE_LIMIT = 1e200


class LaguerreParams(BaseModel):
    """ラゲール関数 φ_k(·; α) のパラメータ"""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=0, description="次数")
    alpha: float = Field(..., description="ラゲール次数 α (> -1)")

    @field_validator("alpha")
    @classmethod
    def _alpha_domain(cls, value: float) -> float:
        if value <= -1.0:
            raise ValueError("alpha は -1 より大きい必要があります")
        return value


class WishartPair(BaseModel):
    """行列サイズの組 (n, N)。n < N で与えられた場合は入れ替えて n ≥ N に正規化する"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="行数")
    N: int = Field(..., ge=1, description="列数")

    @model_validator(mode="before")
    @classmethod
    def _canonical_order(cls, data):
        if isinstance(data, dict) and "n" in data and "N" in data and data["n"] < data["N"]:
            data = {**data, "n": data["N"], "N": data["n"]}
        return data

    @classmethod
    def of(cls, n: int, N: int) -> "WishartPair":
        return cls(n=n, N=N)

    @property
    def alpha_N(self) -> int:
        return self.n - self.N

    @property
    def a_N(self) -> float:
        return math.sqrt(self.n * self.N)


def _check_positive(x: ArrayLike, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} は正の有限値である必要があります", {name: np.ravel(arr)[:5].tolist()})
    return arr


def _same_shape(x: ArrayLike, values: np.ndarray) -> ArrayLike:
    return float(values) if np.ndim(x) == 0 else values


def airy_ai(x: ArrayLike) -> ArrayLike:
    """Airy関数 Ai(x)"""
    ai, _, _, _ = special.airy(np.asarray(x, dtype=float))
    return _same_shape(x, ai)


def airy_ai_prime(x: ArrayLike) -> ArrayLike:
    """Airy関数の導関数 Ai'(x)"""
    _, aip, _, _ = special.airy(np.asarray(x, dtype=float))
    return _same_shape(x, aip)


def log_gamma(x: ArrayLike) -> ArrayLike:
    """ln Γ(x), x > 0"""
    arr = _check_positive(x)
    return _same_shape(x, special.gammaln(arr))


def regularized_gamma_p(a: float, x: ArrayLike) -> ArrayLike:
    """正則化下側不完全ガンマ関数 P(a, x)"""
    if not a > 0:
        raise DomainError("a は正である必要があります", {"a": a})
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("x は非負である必要があります", {"x": np.ravel(arr)[:5].tolist()})
    return _same_shape(x, special.gammainc(a, arr))


def edge_center_scale(n_plus: float, N_plus: float) -> tuple:
    """(√n₊+√N₊)² と (√n₊+√N₊)(n₊^{-1/2}+N₊^{-1/2})^{1/3}"""
    root = math.sqrt(n_plus) + math.sqrt(N_plus)
    mu = root * root
    sigma = root * (1.0 / math.sqrt(n_plus) + 1.0 / math.sqrt(N_plus)) ** (1.0 / 3.0)
    return mu, sigma


def laguerre_phi_table(kmax: int, alpha: float, x: ArrayLike) -> np.ndarray:
    """
    φ_0, …, φ_kmax を一括計算

    Returns:
        形状 (kmax + 1, len(x)) の配列
    """
    return _recurrence(kmax, alpha, x, keep_all=True)


def laguerre_phi(params: LaguerreParams, x: ArrayLike) -> ArrayLike:
    """
    重み付き正規直交ラゲール関数 φ_k(x; α) = √(k!/(k+α)!) x^{α/2} e^{-x/2} L_k^α(x)

    Args:
        params: 次数とラゲール次数
        x: 評価点（正）
    """
    return _same_shape(x, _recurrence(params.k, params.alpha, x, keep_all=False))


def _recurrence(k: int, alpha: float, x: ArrayLike, keep_all: bool) -> np.ndarray:
    if alpha <= -1.0:
        raise DomainError("alpha は -1 より大きい必要があります", {"alpha": alpha})
    if k < 0:
        raise DomainError("次数 k は非負である必要があります", {"k": k})
    xs = np.atleast_1d(_check_positive(x))
    # 値は p·exp(scale) として保持する
    scale = 0.5 * alpha * np.log(xs) - 0.5 * xs - 0.5 * special.gammaln(alpha + 1.0)
    p_prev = np.zeros_like(xs)
    p = np.ones_like(xs)
    rows = [_unscale(p, scale)] if keep_all else None
    for j in range(k):
        a = (2.0 * j + 1.0 + alpha - xs) / math.sqrt((j + 1.0) * (j + alpha + 1.0))
        b = math.sqrt(j * (j + alpha) / ((j + 1.0) * (j + alpha + 1.0))) if j > 0 else 0.0
        p_prev, p = p, a * p - b * p_prev
        big = np.abs(p) > _RESCALE_LIMIT
        if np.any(big):
            factor = np.abs(p[big])
            p[big] /= factor
            p_prev[big] /= factor
            scale[big] += np.log(factor)
        if keep_all:
            rows.append(_unscale(p, scale))
    if keep_all:
        return np.vstack(rows)
    values = _unscale(p, scale)
    return values if np.ndim(x) else values[0]


def _unscale(p: np.ndarray, scale: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    nz = p != 0.0
    out[nz] = np.sign(p[nz]) * np.exp(scale[nz] + np.log(np.abs(p[nz])))
    return out


def phi_fn(pair: WishartPair, x: ArrayLike) -> ArrayLike:
    """
    φ(x) = (-1)^N √(a_N/2) φ_N(x; α_N - 1) x^{-1/2}

    α_N = 0 のときは φ = ψ となるため psi_fn を返す。
    """
    if pair.alpha_N == 0:
        return psi_fn(pair, x)
    xs = _check_positive(x)
    sign = -1.0 if pair.N % 2 else 1.0
    values = _recurrence(pair.N, pair.alpha_N - 1.0, xs, keep_all=False)
    return _same_shape(x, sign * math.sqrt(pair.a_N / 2.0) * values / np.sqrt(xs))


def psi_fn(pair: WishartPair, x: ArrayLike) -> ArrayLike:
    """ψ(x) = (-1)^{N-1} √(a_N/2) φ_{N-1}(x; α_N + 1) x^{-1/2}"""
    xs = _check_positive(x)
    sign = 1.0 if pair.N % 2 else -1.0
    values = _recurrence(pair.N - 1, pair.alpha_N + 1.0, xs, keep_all=False)
    return _same_shape(x, sign * math.sqrt(pair.a_N / 2.0) * values / np.sqrt(xs))


def F_nN(pair: WishartPair, z: ArrayLike) -> ArrayLike:
    """
    F_{n,N}(z) = (-1)^N σ_{n,N}^{-1/2} √(N!/n!) z^{(α_N+1)/2} e^{-z/2} L_N^{α_N}(z)

    φ_N(z; α_N) = (-1)^N σ^{1/2} z^{-1/2} F_{n,N}(z) を用いてラゲール漸化式から計算する。
    """
    zs = _check_positive(z, "z")
    _, sigma = edge_center_scale(pair.n + 0.5, pair.N + 0.5)
    sign = -1.0 if pair.N % 2 else 1.0
    values = _recurrence(pair.N, float(pair.alpha_N), zs, keep_all=False)
    return _same_shape(z, sign * np.sqrt(zs) * values / math.sqrt(sigma))
