#!/usr/bin/env python3
"""
モンテカルロシミュレーションモジュール

複素ホワイト・ウィシャート行列を生成して最大固有値を取り出し、
(l - μ̃)/σ̃ の経験分布関数を Tracy–Widom 分位点で表にします。

乱数は (seed, 反復番号) から導いたカウンタ型ストリーム（Philox）を反復ごとに用いるため、
結果はスレッド数やスケジューリングに依存しません。
"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from src.wishart_tw.errors import DomainError, EigenSolverError
from src.wishart_tw.run_logger import get_logger
from src.wishart_tw.sequences import CenteringScaling
from src.wishart_tw.specfun import WishartPair
from src.wishart_tw.tw import TABLE_QUANTILES, F2_painleve

Method = Literal["dense", "bidiagonal"]

NORMAL_METHOD = "ziggurat"
BIT_GENERATOR = "Philox"
CHUNK_SIZE = 256


class EmpiricalTable(BaseModel):
    """分位点ごとの経験CDFと標準誤差"""

    model_config = ConfigDict(frozen=True)

    pair: WishartPair
    cs: CenteringScaling
    reps: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    quantiles: List[float]
    values: List[float]
    se: List[float]
    tw_cdf: List[float]
    method: Method = "dense"
    normal_method: str = NORMAL_METHOD
    bit_generator: str = BIT_GENERATOR

    @model_validator(mode="after")
    def _monotone(self) -> "EmpiricalTable":
        if any(v < 0.0 or v > 1.0 for v in self.values):
            raise ValueError("経験CDFは [0, 1] に含まれる必要があります")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("経験CDFは分位点に沿って非減少である必要があります")
        return self


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """反復 index 用の独立ストリーム"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _top_eigenvalue(gram: np.ndarray) -> float:
    N = gram.shape[0]
    scale = max(float(np.max(np.abs(np.diag(gram)))), 1.0)
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(3),
            retry=retry_if_exception_type(linalg.LinAlgError),
            reraise=True,
        ):
            with attempt:
                k = attempt.retry_state.attempt_number - 1
                if k:
                    get_logger().warning("固有値計算を摂動付きで再試行します", f"試行 {k + 1}")
                matrix = gram + (k * 1e-14 * scale) * np.eye(N) if k else gram
                return float(linalg.eigvalsh(matrix, subset_by_index=[N - 1, N - 1])[0])
    except linalg.LinAlgError as e:
        raise EigenSolverError("エルミート固有値ソルバーが収束しません", {"N": N}) from e
    raise EigenSolverError("エルミート固有値ソルバーが値を返しません", {"N": N})


def sample_largest_eigenvalue(
    pair: WishartPair, rng: np.random.Generator, method: Method = "dense"
) -> float:
    """
    X*X の最大固有値を1つ生成

    dense は Z = (Z₁ + iZ₂)/√2 の n×N 行列から N×N のグラム行列を作る。
    bidiagonal は χ 分布の二重対角モデル（β = 2）による高速経路。
    """
    n, N = pair.n, pair.N
    if method == "bidiagonal":
        d = np.sqrt(rng.chisquare(2.0 * (n - np.arange(N))) / 2.0)
        e = np.sqrt(rng.chisquare(2.0 * (N - 1 - np.arange(N - 1))) / 2.0)
        diag = d * d
        diag[1:] += e * e
        off = d[:-1] * e
        top = linalg.eigvalsh_tridiagonal(diag, off, select="i", select_range=(N - 1, N - 1))
        return float(top[0])
    X = (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / math.sqrt(2.0)
    return _top_eigenvalue(X.conj().T @ X)


def simulate_largest(
    pair: WishartPair,
    reps: int,
    seed: int,
    threads: int = 1,
    method: Method = "dense",
    progress: bool = True,
) -> np.ndarray:
    """反復番号順に並んだ最大固有値の配列"""
    out = np.empty(reps)

    def run(start: int, stop: int):
        for i in range(start, stop):
            out[i] = sample_largest_eigenvalue(pair, replication_rng(seed, i), method)
        return stop - start

    chunks = [(a, min(a + CHUNK_SIZE, reps)) for a in range(0, reps, CHUNK_SIZE)]
    bar = tqdm(total=reps, desc=f"MC {pair.n}x{pair.N}", disable=None if progress else True)
    try:
        if threads <= 1:
            for a, b in chunks:
                bar.update(run(a, b))
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(run, a, b) for a, b in chunks]
                for future in as_completed(futures):
                    bar.update(future.result())
    finally:
        bar.close()
    return out


def build_table(
    pair: WishartPair,
    cs: CenteringScaling,
    reps: int,
    seed: int,
    quantiles: Optional[Sequence[float]] = None,
    threads: int = 1,
    method: Method = "dense",
    progress: bool = True,
) -> EmpiricalTable:
    """(l - μ̃)/σ̃ が各分位点以下となる割合の表"""
    if reps < 100:
        raise DomainError("reps は 100 以上である必要があります", {"reps": reps})
    qs = sorted(quantiles if quantiles is not None else TABLE_QUANTILES)
    logger = get_logger()
    logger.info(f"{pair.n}x{pair.N} を {reps} 回シミュレーション中...", f"seed={seed}, method={method}")
    samples = simulate_largest(pair, reps, seed, threads, method, progress)
    z = (samples - cs.mu) / cs.sigma
    values = [float(np.mean(z <= q)) for q in qs]
    tw_cdf = [F2_painleve(q) for q in qs]
    se = [math.sqrt(p * (1.0 - p) / reps) for p in tw_cdf]
    logger.success("シミュレーション完了")
    return EmpiricalTable(
        pair=pair,
        cs=cs,
        reps=reps,
        seed=seed,
        quantiles=qs,
        values=values,
        se=se,
        tw_cdf=tw_cdf,
        method=method,
    )
