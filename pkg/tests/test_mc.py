"""モンテカルロシミュレーションのテスト"""

import math

import numpy as np
import pytest
from scipy import stats

from src.wishart_tw.errors import DomainError
from src.wishart_tw.finite_n import cdf_exact
from src.wishart_tw.mc import (
    build_table,
    replication_rng,
    sample_largest_eigenvalue,
    simulate_largest,
)
from src.wishart_tw.provenance import PUBLISHED_COLUMNS
from src.wishart_tw.sequences import refined_sequences
from src.wishart_tw.specfun import WishartPair
from src.wishart_tw.tw import TABLE_QUANTILES


def test_replication_streams_reproducible():
    a = replication_rng(42, 3).standard_normal(5)
    b = replication_rng(42, 3).standard_normal(5)
    c = replication_rng(42, 4).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_largest_eigenvalue_dominates_mean():
    pair = WishartPair.of(30, 6)
    rng = replication_rng(7, 0)
    n, N = pair.n, pair.N
    X = (rng.standard_normal((n, N)) + 1j * rng.standard_normal((n, N))) / math.sqrt(2.0)
    gram = X.conj().T @ X
    top = sample_largest_eigenvalue(pair, replication_rng(7, 0))
    assert top == pytest.approx(np.linalg.eigvalsh(gram)[-1], rel=1e-10)
    assert top >= np.trace(gram).real / N


def test_single_column_matches_gamma():
    pair = WishartPair.of(8, 1)
    samples = simulate_largest(pair, 10_000, seed=11, progress=False)
    result = stats.kstest(samples, stats.gamma(a=8).cdf)
    assert result.pvalue > 0.001


def test_bidiagonal_matches_dense():
    pair = WishartPair.of(20, 10)
    dense = simulate_largest(pair, 2000, seed=5, method="dense", progress=False)
    fast = simulate_largest(pair, 2000, seed=6, method="bidiagonal", progress=False)
    assert stats.ks_2samp(dense, fast).pvalue > 0.001


@pytest.mark.parametrize("threads", [2, 8])
def test_thread_count_does_not_change_result(threads):
    pair = WishartPair.of(12, 4)
    single = simulate_largest(pair, 600, seed=99, threads=1, progress=False)
    multi = simulate_largest(pair, 600, seed=99, threads=threads, progress=False)
    np.testing.assert_array_equal(single, multi)


def test_table_invariants():
    pair = WishartPair.of(20, 5)
    cs, _ = refined_sequences(pair)
    table = build_table(pair, cs, 300, seed=3, progress=False)
    assert table.quantiles == sorted(TABLE_QUANTILES)
    assert all(0.0 <= v <= 1.0 for v in table.values)
    assert all(b >= a for a, b in zip(table.values, table.values[1:]))
    assert table.normal_method == "ziggurat"
    assert table.bit_generator == "Philox"
    again = build_table(pair, cs, 300, seed=3, progress=False)
    assert again.values == table.values


def test_table_requires_enough_reps():
    pair = WishartPair.of(20, 5)
    cs, _ = refined_sequences(pair)
    with pytest.raises(DomainError):
        build_table(pair, cs, 99, seed=1, progress=False)


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(PUBLISHED_COLUMNS))
def test_table_matches_exact_cdf(name):
    column = PUBLISHED_COLUMNS[name]
    pair = WishartPair.of(column["n"], column["N"])
    cs, _ = refined_sequences(pair)
    table = build_table(pair, cs, 10_000, seed=42, threads=4, method="bidiagonal", progress=False)
    for q, value in zip(table.quantiles, table.values):
        exact = cdf_exact(pair, cs, q)
        se = max(math.sqrt(exact * (1.0 - exact) / table.reps), 1.0 / table.reps)
        assert abs(value - exact) <= 4.0 * se, (name, q)


@pytest.mark.slow
def test_dense_sampler_matches_exact_cdf():
    pair = WishartPair.of(20, 10)
    cs, _ = refined_sequences(pair)
    table = build_table(pair, cs, 100_000, seed=42, threads=4, progress=False)
    assert table.method == "dense"
    for q, value in zip(table.quantiles, table.values):
        exact = cdf_exact(pair, cs, q)
        se = max(math.sqrt(exact * (1.0 - exact) / table.reps), 1.0 / table.reps)
        assert abs(value - exact) <= 4.0 * se, q


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(PUBLISHED_COLUMNS))
def test_table_near_published_column(name):
    column = PUBLISHED_COLUMNS[name]
    pair = WishartPair.of(column["n"], column["N"])
    cs, _ = refined_sequences(pair)
    table = build_table(pair, cs, 10_000, seed=42, threads=4, progress=False)
    assert len(table.values) == len(column["values"])
    for q, value, published, se in zip(table.quantiles, table.values, column["values"], table.se):
        assert abs(value - published) <= 3.0 * se, (name, q)
