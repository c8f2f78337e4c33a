import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elasticflow.constants import (
    C_hat,
    Q_poly,
    Q_target,
    c_one_at,
    constants_table,
    delta_star,
    eps_one,
    eps_star,
    eps_star_bisection,
    eps_star_quadratic,
    eps_two,
    eps_two_lhs,
    theory_constants,
)

PI = math.pi


def naive_eps_star(w):
    # direct float evaluation of the closed form, cancellation is mild for small w
    A = 11 * w**3 + 5 * w
    return 8 * PI**3 / 25 * (math.sqrt(A * A + 5 / 16) - A) ** 2


# -- eps_star ------------------------------------------------------------------


def test_eps_star_w1_value():
    assert eps_star(1) == pytest.approx(9.46e-4, rel=1e-3)
    assert eps_star(1) == pytest.approx(naive_eps_star(1), rel=1e-12)


@pytest.mark.parametrize("w", range(1, 11))
def test_eps_star_matches_independent_root(w):
    assert eps_star_bisection(w) == pytest.approx(eps_star(w), rel=1e-12)


def test_eps_star_root_residual():
    for w in (1, 2, 5):
        x = math.sqrt(eps_star(w))
        assert abs(eps_star_quadratic(x, w)) <= 1e-14 * (1 / 16)


def test_eps_star_strictly_decreasing():
    vals = [eps_star(w) for w in range(1, 11)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_eps_star_large_omega_is_cancellation_free():
    # A ~ 1.1e10 at w = 1000; the naive difference loses every digit
    w = 1000
    A = 11 * w**3 + 5 * w
    asymptotic = 8 * PI**3 / 25 * (5 / 32 / A) ** 2
    assert eps_star(w) == pytest.approx(asymptotic, rel=1e-9)


def test_omega_validation():
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            eps_star(bad)


# -- C_hat, delta_star, Q_poly ---------------------------------------------------


def test_C_hat_values():
    assert C_hat(0, 1) == 16
    assert C_hat(0, 2) == 52
    s = PI**3
    assert C_hat(s, 1) == pytest.approx(4 + 1 / 4 + math.sqrt(8) + 12, rel=1e-15)
    with pytest.raises(ValueError):
        C_hat(-1e-3, 1)


@given(st.floats(0, 100), st.floats(0, 100), st.integers(1, 6))
def test_C_hat_monotone(a, b, w):
    lo, hi = sorted((a, b))
    assert C_hat(lo, w) <= C_hat(hi, w)


def test_delta_star_boundary_and_exact_ratio():
    d = delta_star(1e-3, 1e-3, 1, full=True)
    assert d.value == 0 and d.boundary
    sigma, eps = 8e-4, 1e-4
    D = sigma * C_hat(sigma, 1) + 32 * PI**4
    assert delta_star(eps, sigma, 1) * D == pytest.approx(15.0, rel=1e-13)
    with pytest.raises(ValueError):
        delta_star(2e-3, 1e-3, 1)
    with pytest.raises(ValueError):
        delta_star(0.0, 1e-3, 1)


def test_delta_star_root_residual_at_eps_two():
    tc = theory_constants(1)
    d = delta_star(tc.eps_two, tc.eps_one, 1, full=True)
    assert d.residual <= 1e-12


@given(st.floats(1e-12, 1e-4), st.floats(1e-12, 1e-4))
def test_delta_star_decreasing_in_eps(a, b):
    sigma = 2e-4
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9 * hi:
        return
    assert delta_star(lo, sigma, 1) > delta_star(hi, sigma, 1)


def test_delta_star_blows_up_as_eps_vanishes():
    vals = [delta_star(10.0**-k, 1e-2, 1) for k in (3, 6, 9, 12)]
    assert all(b > 10 * a for a, b in zip(vals, vals[1:]))


def test_Q_poly_basics():
    assert Q_poly(0, 1) == 0
    with pytest.raises(ValueError):
        Q_poly(-1, 1)
    target = Q_target(1)
    lo, hi = 0.0, PI**4 / 6
    assert Q_poly(lo, 1) < target < Q_poly(hi, 1)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if Q_poly(mid, 1) < target else (lo, mid)
    assert 0 < lo < PI**4 / 6
    assert eps_one(1).candidates["Q root"] == pytest.approx(lo, rel=1e-12)


@given(st.floats(0, 50), st.floats(0, 50), st.integers(1, 5))
def test_Q_poly_increasing(a, b, w):
    lo, hi = sorted((a, b))
    assert Q_poly(lo, w) <= Q_poly(hi, w)


# -- eps_one, eps_two, c_one, c_two -------------------------------------------------


def test_eps_one_w1():
    e1 = eps_one(1)
    assert e1.binding == "eps_star"
    assert e1.value <= PI**4 / 6
    assert Q_poly(e1.value, 1) <= Q_target(1)
    assert set(e1.candidates) == {"eps_star", "pi^4/6", "Q root"}


def test_eps_one_w3_below_eps_star():
    assert eps_one(3).value <= eps_star(3)


def test_eps_two_certificate_w1():
    e2 = eps_two(1)
    e1 = eps_one(1).value
    assert 0 < e2.value < e1
    assert eps_two_lhs(e2.value, 1) - 1 <= 1e-15
    assert eps_two_lhs(1.01 * e2.value, 1) - 1 > 0
    assert e2.width / e2.value < 1e-12


def test_eps_two_closed_form():
    # independent float evaluation of the inverted inequality
    tc = theory_constants(1)
    e1, c1, c2 = tc.eps_one, tc.c_one, tc.c_two
    K = (e1 / (8 * PI**2) + 2 * PI**2) ** 3 / (8 * PI**6)
    closed = e1 * (1 + c2 * c2 * (K ** (1 / c1) - 1)) ** -0.75
    assert tc.eps_two == pytest.approx(closed, rel=1e-9)
    assert tc.prefactor == pytest.approx(K, rel=1e-14)
    assert tc.c_three == pytest.approx(K * tc.eps_two, rel=1e-14)


@pytest.mark.parametrize("w", range(1, 11))
def test_invariant_chain(w):
    tc = theory_constants(w)
    assert tc.invariant_violations() == []
    assert 0 < tc.eps_two < tc.eps_one <= tc.eps_star
    assert tc.c_one < 0.3
    assert tc.eps_one * tc.C_hat(tc.eps_one) <= 16 * w**4 * PI**4


def test_c_one_tends_to_three_tenths():
    gaps = [0.3 - c_one_at(e, 1) for e in (1e-3, 1e-6, 1e-9)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[1] < 1e-6


def test_c_two_definition():
    tc = theory_constants(2)
    assert tc.c_two == pytest.approx(tc.eps_one * C_hat(tc.eps_one, 2) + 32 * 16 * PI**4, rel=1e-14)
    assert tc.c_one == pytest.approx(48 * 16 * PI**4 / (5 * tc.c_two), rel=1e-14)


def test_frozen_values_w1():
    # regression values; eps_star cross-checked above, eps_two via the closed form
    tc = theory_constants(1)
    assert tc.eps_star == pytest.approx(9.45659374297399e-4, rel=1e-13)
    assert tc.eps_two == pytest.approx(4.388992997363572e-05, rel=1e-10)
    assert tc.c_two == pytest.approx(3117.1060584166985, rel=1e-13)


def test_envelopes():
    tc = theory_constants(1)
    t = np.array([0.0, 1.0, 100.0])
    q = tc.Q_envelope(2.0, t, 2 * PI)
    assert q[0] == 2.0 and np.all(np.diff(q) < 0)
    e = tc.eps_envelope(1e-5, t, 2 * PI)
    assert e[0] == pytest.approx(tc.prefactor * 1e-5)


def test_table_is_fast_and_ordered():
    import time

    theory_constants.cache_clear()
    t0 = time.perf_counter()
    table = constants_table(5)
    assert time.perf_counter() - t0 < 1.0
    assert [tc.omega for tc in table] == [1, 2, 3, 4, 5]
    assert all(b.eps_star < a.eps_star for a, b in zip(table, table[1:]))
    for tc in table:
        assert all(abs(v) <= 1e-12 for k, v in tc.residuals.items() if k != "eps_two_lhs_above")
        assert tc.residuals["eps_two_lhs_above"] > 0
