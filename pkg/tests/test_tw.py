"""Tracy–Widom F₂ のテスト"""

import numpy as np
import pytest

from src.wishart_tw import tw
from src.wishart_tw.errors import RangeError
from src.wishart_tw.specfun import airy_ai
from src.wishart_tw.tw import (
    TABLE_QUANTILES,
    TABLE_TW_PROBS,
    F2_fredholm,
    F2_painleve,
    default_solution,
    solve_painleve2,
    tw_density,
    tw_quantile,
    tw_table,
)


def test_initial_value_is_airy():
    sol = default_solution()
    assert sol.q_at(sol.x_start) == pytest.approx(airy_ai(sol.x_start), rel=1e-14)


def test_hastings_mcleod_positive():
    sol = default_solution()
    assert np.all(sol.q > 0.0)


def test_painleve_residual(rng):
    sol = default_solution()
    h = 4e-3
    for x in rng.uniform(-9.0, 7.0, size=20):
        dq = [sol.state_at(x + k * h)[1] for k in (-2, -1, 1, 2)]
        second = (dq[0] - 8.0 * dq[1] + 8.0 * dq[2] - dq[3]) / (12.0 * h)
        q = sol.q_at(x)
        assert abs(second - (x * q + 2.0 * q**3)) <= 1e-7


def test_painleve_richardson_tolerance():
    coarse = solve_painleve2(tol=1e-11)
    fine = solve_painleve2(tol=1e-13)
    for s in (-8.0, -4.0, 0.0):
        assert abs(F2_painleve(s, coarse) - F2_painleve(s, fine)) <= 1e-8


def test_painleve_rejects_bad_range():
    with pytest.raises(RangeError):
        solve_painleve2(x_start=4.0)
    with pytest.raises(RangeError):
        solve_painleve2(x_end=-13.0)
    with pytest.raises(RangeError):
        F2_painleve(-11.0)


@pytest.mark.parametrize("s,p", list(zip(TABLE_QUANTILES, TABLE_TW_PROBS)))
def test_table_values(s, p):
    assert F2_painleve(s) == pytest.approx(p, abs=0.005)


def test_fredholm_known_points():
    assert F2_fredholm(6.0) == pytest.approx(1.0, abs=1e-9)
    assert F2_fredholm(-3.20) == pytest.approx(0.05, abs=0.005)
    assert F2_fredholm(0.0) == pytest.approx(F2_painleve(0.0), abs=1e-6)


def test_fredholm_range():
    with pytest.raises(RangeError):
        F2_fredholm(-10.5)


def test_two_routes_agree():
    for s in np.linspace(-8.0, 6.0, 57):
        assert abs(F2_painleve(s) - F2_fredholm(s)) <= 1e-6


def test_cdf_monotone_and_bounded():
    values = [F2_painleve(s) for s in np.linspace(-10.0, 8.0, 181)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_right_tail_beyond_solution():
    assert F2_painleve(9.0) == pytest.approx(1.0, abs=1e-12)


def test_density_positive():
    assert all(tw_density(s) > 0.0 for s in np.linspace(-6.0, 3.0, 19))


def test_quantiles():
    assert tw_quantile(0.5) == pytest.approx(-1.81, abs=0.01)
    assert tw_quantile(0.95) == pytest.approx(-0.23, abs=0.01)
    assert tw_quantile(F2_fredholm(0.0)) == pytest.approx(0.0, abs=1e-6)


def test_quantile_cache_reuses_default_solution(monkeypatch):
    calls = []
    original = tw.solve_painleve2

    def counting(*args, **kwargs):
        calls.append(args)
        return original(*args, **kwargs)

    monkeypatch.setattr(tw, "solve_painleve2", counting)
    monkeypatch.setattr(tw, "_default_solution", None)
    monkeypatch.setattr(tw, "_quantile_cache", None)
    assert tw_quantile(0.5) == pytest.approx(-1.81, abs=0.01)
    assert tw_density(-1.8) > 0.0
    assert len(calls) == 1


def test_quantile_range():
    with pytest.raises(RangeError):
        tw_quantile(0.0005)
    with pytest.raises(RangeError):
        tw_quantile(1.0)


def test_tw_table_frame():
    frame = tw_table(route="painleve")
    assert list(frame.columns) == ["quantile", "tw_cdf"]
    np.testing.assert_allclose(frame["tw_cdf"], TABLE_TW_PROBS, atol=0.005)
