import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elasticflow.constants import C_hat, theory_constants
from elasticflow.curve import ClosedCurve, compute_geometry, scalar_diagnostics
from elasticflow.diagnostics import (
    DiagnosticsRecord,
    circle_deviation,
    decay_report,
    evolution_residuals,
    fit_power_law,
    image_deviation,
    kbar_bound_ratio,
    ks_identity_residual,
    ks_monotone_violation,
    length_law_residual,
    make_record,
    rescaled_curve,
    series_array,
)
from elasticflow.exact import (
    CircleSolution,
    LemniscateSolution,
    circle_at,
    lemniscate_at,
    perturbed_circle,
)
from elasticflow.flow import FlowConfig

PI = math.pi


# -- rescaling and circle deviation ----------------------------------------------


@pytest.mark.parametrize("omega,rho,R", [(1, 3.0, 1 / (2 * PI)), (2, 0.7, 1 / (4 * PI))])
def test_rescaled_circle_radius(omega, rho, R):
    eta = rescaled_curve(circle_at(CircleSolution(omega, rho), 0.0, 128))
    assert np.allclose(np.linalg.norm(eta.points, axis=1), R, rtol=1e-13)


def test_rescaled_curve_has_unit_length():
    c = perturbed_circle(1, [(2, 0.2), (5, 0.05)], N=256).curve.scaled(4.2)
    assert compute_geometry(rescaled_curve(c)).L == pytest.approx(1.0, abs=1e-10)


def test_circle_deviation_exact_and_translated():
    eta = rescaled_curve(circle_at(CircleSolution(2, 1.3), 0.0, 256))
    cd, od = circle_deviation(eta, 2)
    assert cd < 1e-10 and od < 1e-10
    cd, od = circle_deviation(eta.translated((0.1, 0.0)), 2)
    assert cd < 1e-10
    assert od == pytest.approx(0.1, abs=1e-4)


def test_circle_deviation_errors():
    c = circle_at(CircleSolution(), 0.0, 64)
    with pytest.raises(ValueError):
        circle_deviation(c, 1)  # length 2 pi
    with pytest.raises(ValueError):
        circle_deviation(rescaled_curve(c), 0)


def test_image_deviation_ignores_parametrisation():
    c = perturbed_circle(1, [(3, 0.1)], N=128).curve
    shifted = ClosedCurve(np.roll(c.points, 17, axis=0))
    assert image_deviation(c, shifted) < 1e-12
    assert image_deviation(c, c.reversed()) < 1e-12
    assert image_deviation(c, c.translated((0.01, 0))) == pytest.approx(0.01, rel=0.05)


# -- records ----------------------------------------------------------------------


def test_record_columns_and_row():
    cols = DiagnosticsRecord.columns()
    assert cols[:3] == ["t", "dt", "L"]
    assert cols == [f.name for f in dataclasses.fields(DiagnosticsRecord)]
    r = make_record(circle_at(CircleSolution(), 0.0, 64), 0.0)
    assert len(r.as_row()) == len(cols)
    assert r.is_finite()


def test_record_eps_consistent_with_curve_core():
    c = perturbed_circle(1, [(2, 0.03)], N=256).curve
    r = make_record(c, 0.0)
    d = scalar_diagnostics(c)
    assert r.eps == pytest.approx(d.eps, rel=1e-10)
    g = compute_geometry(c)
    assert r.eps == pytest.approx(g.L**3 * g.norm2_sq(g.k_s), rel=1e-10)
    assert r.ks_max_rescaled == pytest.approx(g.L**2 * np.abs(g.k_s).max(), rel=1e-12)


def test_circle_record_values():
    r = make_record(circle_at(CircleSolution(3, 2.0), 0.0, 256), 0.0)
    assert r.omega == 3
    assert r.E == pytest.approx(3 * PI / 2.0, rel=1e-12)
    assert r.eps < 1e-20 and r.Q < 1e-20
    assert r.kbar_dev < 1e-10


def test_lemniscate_record_has_nan_deviation_but_is_finite():
    r = make_record(lemniscate_at(LemniscateSolution(), 0.0, 256), 0.0)
    assert r.omega == 0
    assert math.isnan(r.origin_dev)
    assert r.is_finite()


# -- length law --------------------------------------------------------------------


def _exact_series(curve_at, times, N=256):
    return [make_record(curve_at(t, N), t) for t in times]


def test_length_law_exact_circle():
    times = np.linspace(0, 100, 21)
    recs = _exact_series(lambda t, N: circle_at(CircleSolution(), t, N), times)
    res = length_law_residual(recs, 1)
    assert res.max_rate_error <= 1e-9 * 32 * PI**4
    assert res.C_hat == pytest.approx(16.0)
    assert abs(res.exponent - 0.25) < 0.01


def test_length_law_lemniscate_exponent():
    times = np.linspace(0, 200, 21)
    recs = _exact_series(lambda t, N: lemniscate_at(LemniscateSolution(), t, N), times, N=512)
    assert abs(length_law_residual(recs, 0).exponent - 0.25) < 0.02


def test_length_law_needs_ten_records():
    recs = _exact_series(lambda t, N: circle_at(CircleSolution(), t, N), range(9))
    with pytest.raises(ValueError):
        length_law_residual(recs, 1)


def test_length_law_residual_normalisation():
    # a synthetic series with L^4 offset exactly half the allowed band
    sigma = 1e-4
    bound = sigma * C_hat(sigma, 1)
    t = np.linspace(0, 1, 11)
    L = (16 * PI**4 + (32 * PI**4 + 0.5 * bound) * t) ** 0.25
    base = make_record(circle_at(CircleSolution(), 0.0, 64), 0.0)
    recs = [dataclasses.replace(base, t=float(ti), L=float(Li), eps=sigma) for ti, Li in zip(t, L)]
    assert length_law_residual(recs, 1).max_residual == pytest.approx(0.5, rel=1e-6)


def test_fit_power_law():
    t = np.linspace(1, 50, 60)
    assert fit_power_law(t, 3 * t**0.7) == pytest.approx(0.7, rel=1e-12)
    assert math.isnan(fit_power_law([0.0, 1.0], [0.0, 0.0]))


# -- evolution identities ----------------------------------------------------------


def test_ks_identity_on_circle():
    r = ks_identity_residual(circle_at(CircleSolution(), 0.0, 128), FlowConfig(), dt=1e-4)
    assert abs(r.lhs) <= 1e-8 and abs(r.rhs) <= 1e-8


def test_ks_identity_perturbed_circle():
    cfg = FlowConfig()
    coarse = ks_identity_residual(perturbed_circle(1, [(2, 1e-2)], N=512).curve, cfg, dt=2e-5)
    fine = ks_identity_residual(perturbed_circle(1, [(2, 1e-2)], N=1024).curve, cfg, dt=1e-5)
    assert fine.rel <= 0.1
    assert fine.rel <= 0.5 * coarse.rel or fine.rel <= 1e-6
    assert fine.rhs < 0  # below eps_star the integral dissipates


def test_evolution_residuals_energy():
    res = evolution_residuals(perturbed_circle(1, [(3, 0.02)], N=256).curve, FlowConfig(), dt=1e-5)
    assert res.energy.rhs < 0
    assert res.energy.rel <= 1e-3 and res.length.rel <= 1e-3
    assert res.N == 256 and res.dt == 1e-5


# -- bounds and decay -------------------------------------------------------------


@settings(max_examples=15)
@given(st.integers(2, 6), st.floats(1e-5, 3e-3), st.floats(0, 2 * PI))
def test_kbar_bound_property(m, a, phase):
    c = perturbed_circle(1, [(m, a, phase)], N=256).curve
    assert kbar_bound_ratio([make_record(c, 0.0)]) <= 1.02


def test_kbar_bound_flags_inconsistent_record():
    base = make_record(circle_at(CircleSolution(), 0.0, 64), 0.0)
    assert kbar_bound_ratio([dataclasses.replace(base, eps=0.0, kbar_dev=1e-3)]) == math.inf


def test_ks_monotone_violation_sign():
    base = make_record(circle_at(CircleSolution(), 0.0, 64), 0.0)
    recs = [dataclasses.replace(base, t=float(i), int_ks2=v) for i, v in enumerate([3.0, 2.0, 2.5])]
    assert ks_monotone_violation(recs) == pytest.approx(0.5)
    assert ks_monotone_violation(recs[:2]) < 0


def test_decay_report_exact_circle():
    times = np.linspace(0, 10, 11)
    recs = _exact_series(lambda t, N: circle_at(CircleSolution(), t, N), times)
    rep = decay_report(recs, theory_constants(1))
    assert not rep.informational
    assert rep.passed, rep.checks


def test_decay_report_downgrades_large_eps():
    c = perturbed_circle(1, [(2, 1e-3)], N=256).curve
    rep = decay_report([make_record(c, 0.0), make_record(c, 1.0)], theory_constants(1))
    assert rep.informational
    assert rep.eps0 > rep.eps_two


def test_decay_report_stability_run():
    from elasticflow.acceptance import _preset_run

    recs = _preset_run("stability-w1").records
    rep = decay_report(recs, theory_constants(1))
    assert not rep.informational
    assert rep.passed, {k: v for k, v in rep.checks.items() if not v[0]}
    LE = series_array(recs, "L") * series_array(recs, "E")
    assert LE[-1] < LE[0] and LE[-1] >= 2 * PI**2 * (1 - 1e-9)
    assert rep.Q_exponent < 0 and rep.eps_exponent < 0
