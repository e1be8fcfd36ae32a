"""積分作用素のテスト"""

import math

import numpy as np
import pytest

from src.wishart_tw.errors import ConvergenceError, GridMismatchError
from src.wishart_tw.finite_n import make_kernels
from src.wishart_tw.operators import (
    DiscretizedOperator,
    ShiftKernel,
    airy_kernel,
    airy_trace_norm_closed,
    airy_trace_norm_quadrature,
    build_grid,
    compose_S_tau,
    decay_length,
    det_with_refinement,
    discretize,
    fredholm_det,
    frobenius_norm,
    hs_norm_shift,
    lemma2_bound,
    seiler_simon_bound,
    trace_norm,
    zero_kernel,
)
from src.wishart_tw.sequences import refined_sequences
from src.wishart_tw.specfun import WishartPair
from src.wishart_tw.tw import F2_painleve


def _airy_S_bar(s: float, m: int = 128) -> DiscretizedOperator:
    G = discretize(airy_kernel(), build_grid(s, m, [airy_kernel()]))
    return compose_S_tau(G, G)


def _exp_kernel(a: float = 1.0, rate: float = 1.0) -> ShiftKernel:
    return ShiftKernel(profile=lambda u: a * np.exp(-rate * u), name="exp")


def test_build_grid_airy_truncation():
    grid = build_grid(0.0, 64, [airy_kernel()])
    assert grid.T >= 10.0
    assert grid.nodes.min() > 0.0
    assert grid.nodes.max() < grid.T


def test_build_grid_zero_kernel_weights_sum():
    grid = build_grid(1.5, 8, [zero_kernel()])
    assert grid.weights.sum() == pytest.approx(grid.T, rel=1e-14)


def test_build_grid_same_T_for_all_m():
    assert build_grid(0.0, 64, [airy_kernel()]).T == build_grid(0.0, 256, [airy_kernel()]).T


def test_build_grid_rejects_few_nodes():
    with pytest.raises(ValueError):
        build_grid(0.0, 4)


def test_decay_length_fails_for_slow_kernel():
    slow = ShiftKernel(profile=lambda u: 1.0 / (1.0 + u * u), name="cauchy")
    with pytest.raises(ConvergenceError):
        decay_length([slow], 0.0)


def test_discretize_zero_and_symmetry():
    grid = build_grid(0.0, 32, [airy_kernel()])
    assert np.all(discretize(zero_kernel(), grid).M == 0.0)
    G = discretize(airy_kernel(), grid)
    np.testing.assert_array_equal(G.M, G.M.T)


def test_airy_operator_spectrum_in_unit_interval():
    S_bar = _airy_S_bar(0.0)
    eig = np.linalg.eigvalsh(S_bar.M)
    assert eig.max() < 1.0
    assert eig.min() > -1e-12


def test_compose_identities():
    grid = build_grid(0.0, 32, [airy_kernel()])
    G = discretize(airy_kernel(), grid)
    np.testing.assert_allclose(compose_S_tau(G, G).M, 2.0 * G.M @ G.M, atol=1e-15)
    Z = discretize(zero_kernel(), grid)
    assert np.all(compose_S_tau(G, Z).M == 0.0)


def test_compose_trace_identity():
    grid = build_grid(0.0, 48, [airy_kernel(), _exp_kernel()])
    G = discretize(airy_kernel(), grid)
    H = discretize(_exp_kernel(0.3), grid)
    S = compose_S_tau(G, H)
    assert np.trace(S.M) == pytest.approx(2.0 * np.sum(G.M * H.M), rel=1e-12)


def test_compose_rejects_grid_mismatch():
    G = discretize(airy_kernel(), build_grid(0.0, 32, [airy_kernel()]))
    H = discretize(airy_kernel(), build_grid(0.0, 64, [airy_kernel()]))
    with pytest.raises(GridMismatchError):
        compose_S_tau(G, H)


def test_fredholm_det_of_zero_is_one():
    grid = build_grid(0.0, 16)
    assert fredholm_det(discretize(zero_kernel(), grid)) == 1.0


def test_fredholm_det_rank_one():
    a = 0.7
    kernel = _exp_kernel(a)
    op = discretize(kernel, build_grid(0.0, 64, [kernel]))
    assert fredholm_det(op) == pytest.approx(1.0 - a / 2.0, abs=1e-12)


def test_fredholm_det_airy_matches_painleve():
    assert fredholm_det(_airy_S_bar(0.0)) == pytest.approx(F2_painleve(0.0), abs=1e-8)


def test_refinement_stable_airy():
    assert abs(fredholm_det(_airy_S_bar(-8.0, 128)) - fredholm_det(_airy_S_bar(-8.0, 256))) <= 1e-9


def test_refinement_stable_finite_n():
    pair = WishartPair.of(20, 20)
    cs, _ = refined_sequences(pair)
    k = make_kernels(pair, cs)
    T = decay_length([k.phi_tau, k.psi_tau], -4.0)

    def det(m: int) -> float:
        G = discretize(k.phi_tau, build_grid(-4.0, m, T=T))
        return fredholm_det(compose_S_tau(G, G))

    assert abs(det(128) - det(256)) <= 1e-9


def test_det_with_refinement_gives_up():
    calls = []

    def build(m: int):
        calls.append(m)
        grid = build_grid(0.0, 8)
        return DiscretizedOperator(grid=grid, M=np.eye(8) * (0.1 + 1e-3 * len(calls)))

    with pytest.raises(ConvergenceError):
        det_with_refinement(build, target_tol=1e-14, m0=128, m_max=512)
    assert calls == [128, 256, 512]


@pytest.mark.parametrize("s", [-2.0, 0.0, 2.0])
def test_hs_norm_airy_matches_closed_form(s):
    hs = hs_norm_shift(airy_kernel(), s)
    assert hs**2 == pytest.approx(airy_trace_norm_closed(s) / 2.0, rel=1e-8)


def test_hs_norm_simple_kernels():
    assert hs_norm_shift(_exp_kernel(1.0, 0.5), 0.0) == pytest.approx(1.0, rel=1e-10)
    assert hs_norm_shift(zero_kernel(), 0.0) == 0.0


def test_frobenius_matches_hs_norm():
    G = discretize(airy_kernel(), build_grid(0.0, 128, [airy_kernel()]))
    assert frobenius_norm(G) == pytest.approx(hs_norm_shift(airy_kernel(), 0.0), rel=1e-6)


def test_trace_norm_diagonal():
    grid = build_grid(0.0, 8)
    op = DiscretizedOperator(grid=grid, M=np.diag([1.0, -2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
    assert trace_norm(op) == pytest.approx(6.0)


def test_trace_norm_positive_operator_equals_trace():
    S_bar = _airy_S_bar(-1.0)
    assert trace_norm(S_bar) == pytest.approx(np.trace(S_bar.M), rel=1e-10)


@pytest.mark.parametrize("s", [-2.0, 0.0, 2.0])
def test_airy_trace_norm_discrete_matches_closed_form(s):
    assert trace_norm(_airy_S_bar(s)) == pytest.approx(airy_trace_norm_closed(s), rel=1e-6)


def test_airy_trace_norm_closed_values():
    assert airy_trace_norm_closed(0.0) == pytest.approx(0.0306302, abs=1e-7)
    assert 0.0 <= airy_trace_norm_closed(5.0) <= 1e-6


@pytest.mark.parametrize("s", [-2.0, -1.0, 0.0, 2.0])
def test_airy_trace_norm_double_integral(s):
    assert airy_trace_norm_quadrature(s) == pytest.approx(airy_trace_norm_closed(s), abs=1e-8)


def test_seiler_simon_identical_operators():
    S_bar = _airy_S_bar(0.0)
    assert seiler_simon_bound(S_bar, S_bar) == 0.0


def test_seiler_simon_holds_for_finite_n():
    pair = WishartPair.of(20, 20)
    cs, _ = refined_sequences(pair)
    k = make_kernels(pair, cs)
    grid = build_grid(0.0, 128, [k.phi_tau, airy_kernel()])
    G_t = discretize(k.phi_tau, grid)
    G = discretize(airy_kernel(), grid)
    S_tau, S_bar = compose_S_tau(G_t, G_t), compose_S_tau(G, G)
    gap = abs(fredholm_det(S_tau) - fredholm_det(S_bar))
    assert gap <= seiler_simon_bound(S_tau, S_bar) + 1e-10


def test_seiler_simon_rank_one_pair():
    k1, k2 = _exp_kernel(0.6), _exp_kernel(0.5)
    grid = build_grid(0.0, 64, [k1])
    A, B = discretize(k1, grid), discretize(k2, grid)
    gap = abs(fredholm_det(A) - fredholm_det(B))
    assert gap == pytest.approx(0.05, abs=1e-12)
    assert gap <= seiler_simon_bound(A, B)


def test_lemma2_identical_kernels():
    G = discretize(airy_kernel(), build_grid(0.0, 32, [airy_kernel()]))
    assert lemma2_bound(G, G, G) == (0.0, 0.0)


def test_lemma2_finite_n():
    pair = WishartPair.of(20, 20)
    cs, _ = refined_sequences(pair)
    k = make_kernels(pair, cs)
    grid = build_grid(0.0, 128, [k.phi_tau, airy_kernel()])
    G_t = discretize(k.phi_tau, grid)
    lhs, rhs = lemma2_bound(G_t, G_t, discretize(airy_kernel(), grid))
    assert lhs <= rhs + 1e-10


def test_lemma2_random_perturbations(rng):
    grid = build_grid(0.0, 32, [airy_kernel()])
    G = discretize(airy_kernel(), grid)
    for _ in range(100):
        E1 = rng.normal(scale=1e-2, size=(32, 32))
        E2 = rng.normal(scale=1e-2, size=(32, 32))
        G_t = DiscretizedOperator(grid=grid, M=G.M + 0.5 * (E1 + E1.T))
        H_t = DiscretizedOperator(grid=grid, M=G.M + 0.5 * (E2 + E2.T))
        lhs, rhs = lemma2_bound(G_t, H_t, G)
        assert lhs <= rhs + 1e-10
        assert math.isfinite(lhs)
