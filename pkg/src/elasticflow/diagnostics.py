"""Time-series observables, residuals against the evolution laws and
convergence metrics for the rescaled flow ``eta = gamma / L``."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, field, fields
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .curve import (
    DEFAULT_FILTER_TOL,
    ClosedCurve,
    compute_geometry,
    diagnostics as scalar_diagnostics,
)

PI = math.pi
TWO_PI = 2.0 * PI


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time slice of scalar observables.

    Column order is the CSV column order.  ``centered_dev`` and ``origin_dev``
    are NaN for turning number zero, where no limiting circle exists.
    """

    t: float
    dt: float
    L: float
    E: float
    omega: int
    eps: float
    Q: float
    int_ks2: float
    F_norm2: float
    kbar_dev: float  # ||L k - 2 pi omega||_inf (signed omega)
    k_max: float
    ks_max: float
    kss_max: float
    ks_max_rescaled: float  # L^2 ||k_s||_inf
    kss_max_rescaled: float  # L^3 ||k_ss||_inf
    cx: float
    cy: float
    centered_dev: float
    origin_dev: float
    mesh_ratio: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> tuple:
        return astuple(self)

    def is_finite(self) -> bool:
        vals = [v for name, v in zip(self.columns(), self.as_row())
                if not (self.omega == 0 and name in ("centered_dev", "origin_dev"))]
        return bool(np.all(np.isfinite(vals)))

    @property
    def radius(self) -> float:
        """``L / (2 pi omega)``: the radius of an omega-circle of this length."""
        return self.L / (TWO_PI * self.omega) if self.omega else float("nan")


def make_record(curve: ClosedCurve, t: float, dt: float = 0.0, config=None) -> DiagnosticsRecord:
    method = getattr(config, "method", "spectral")
    ftol = getattr(config, "geometry_tol", DEFAULT_FILTER_TOL)
    geom = compute_geometry(curve, method=method, max_mesh_ratio=None, filter_tol=ftol)
    sd = scalar_diagnostics(geom, curve)
    L = sd.L
    F = geom.k_ss + 0.5 * geom.k**3
    ks_max = float(np.abs(geom.k_s).max())
    kss_max = float(np.abs(geom.k_ss).max())
    if sd.omega:
        eta = ClosedCurve(curve.points / L)
        cdev, odev = circle_deviation(eta, sd.omega)
    else:
        cdev = odev = float("nan")
    return DiagnosticsRecord(
        t=float(t),
        dt=float(dt),
        L=L,
        E=sd.E,
        omega=sd.omega,
        eps=sd.eps,
        Q=sd.Q,
        int_ks2=sd.int_ks2,
        F_norm2=geom.norm2_sq(F),
        kbar_dev=float(np.abs(L * geom.k - TWO_PI * sd.omega_signed).max()),
        k_max=float(np.abs(geom.k).max()),
        ks_max=ks_max,
        kss_max=kss_max,
        ks_max_rescaled=L**2 * ks_max,
        kss_max_rescaled=L**3 * kss_max,
        cx=sd.centre[0],
        cy=sd.centre[1],
        centered_dev=cdev,
        origin_dev=odev,
        mesh_ratio=curve.mesh_ratio(),
    )


def series_array(records: Sequence[DiagnosticsRecord], name: str) -> np.ndarray:
    return np.array([getattr(r, name) for r in records], dtype=float)


# -- rescaled flow ------------------------------------------------------------


def rescaled_curve(curve: ClosedCurve) -> ClosedCurve:
    """``eta = gamma / L``, a curve of unit length."""
    L = compute_geometry(curve, max_mesh_ratio=None).L
    if not L > 0:
        raise ValueError("curve has non-positive length")
    return ClosedCurve(curve.points / L)


def circle_deviation(eta: ClosedCurve, omega: int, length_tol: float = 1e-8):
    """Radial sup-distance of a unit-length curve from the ``omega``-circle.

    Returns ``(centered_dev, origin_dev)``: the deviation of ``|eta - c|``
    from ``1/(2 pi omega)`` with ``c`` the centre of mass, and the gap between
    ``max |eta|`` and ``1/(2 pi omega)``.
    """
    if omega < 1:
        raise ValueError("circle deviation needs omega >= 1")
    geom = compute_geometry(eta, max_mesh_ratio=None)
    if abs(geom.L - 1.0) > length_tol:
        raise ValueError(f"curve length {geom.L:.12g} is not 1; rescale first")
    R = 1.0 / (TWO_PI * omega)
    c = geom.ds @ eta.points / geom.L
    centered = float(np.abs(np.linalg.norm(eta.points - c, axis=1) - R).max())
    origin = float(abs(np.linalg.norm(eta.points, axis=1).max() - R))
    return centered, origin


def _upsample(curve: ClosedCurve, factor: int) -> np.ndarray:
    n = curve.N
    m = n * factor
    zh = np.fft.rfft(curve.points, axis=0)
    if n % 2 == 0:
        zh[-1] *= 0.5
    pad = np.zeros((m // 2 + 1, 2), dtype=complex)
    pad[: zh.shape[0]] = zh
    return np.fft.irfft(pad, n=m, axis=0) * factor


def image_deviation(a: ClosedCurve, b: ClosedCurve, upsample: int = 8) -> float:
    """Symmetric Hausdorff-type distance between the images of two curves.

    Both curves are refined by trigonometric interpolation before the
    nearest-point search, so the result is insensitive to parametrisation.
    """
    pa, pb = _upsample(a, upsample), _upsample(b, upsample)
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


# -- fits and laws ------------------------------------------------------------


def fit_power_law(t, y, tail: float = 0.5) -> float:
    """Least-squares slope of ``log y`` against ``log t`` over the last ``tail`` of the time span."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= t.max() * (1.0 - tail)) & (t > 0) & (y > 0)
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(t[sel]), np.log(y[sel]), 1)[0])


@dataclass(frozen=True)
class LengthLawResult:
    max_residual: float
    exponent: float
    sigma: float
    C_hat: float
    worst_t: float
    max_rate_error: float  # max |L^4 - L0^4 - 32 w^4 pi^4 t| / t, unnormalised


def length_law_residual(records: Sequence[DiagnosticsRecord], omega: int,
                        sigma: float | None = None, floor: float = 1e-300) -> LengthLawResult:
    """Normalised residual of the sharp length law.

    Returns ``max_t |L^4 - L(0)^4 - 32 omega^4 pi^4 t| / max(t sigma C_hat, floor)``
    with ``sigma = max eps`` unless given, and the fitted tail exponent of
    ``L ~ t^p``.
    """
    from .constants import C_hat

    if len(records) < 10:
        raise ValueError("length law needs at least 10 records")
    t = series_array(records, "t")
    L = series_array(records, "L")
    if sigma is None:
        sigma = float(series_array(records, "eps").max())
    ch = C_hat(sigma, omega)
    res = np.abs(L**4 - L[0] ** 4 - 32.0 * omega**4 * PI**4 * t)
    pos = t > 0
    norm = res[pos] / np.maximum(t[pos] * sigma * ch, floor)
    i = int(np.argmax(norm))
    return LengthLawResult(
        max_residual=float(norm[i]),
        exponent=fit_power_law(t, L),
        sigma=sigma,
        C_hat=ch,
        worst_t=float(t[pos][i]),
        max_rate_error=float((res[pos] / t[pos]).max()),
    )


def kbar_bound_ratio(records: Sequence[DiagnosticsRecord]) -> float:
    """``max ||L k - 2 pi omega||_inf / sqrt(eps / 2 pi)`` over records with ``eps > 0``."""
    worst = 0.0
    for r in records:
        bound = math.sqrt(r.eps / TWO_PI)
        if bound > 0:
            worst = max(worst, r.kbar_dev / bound)
        elif r.kbar_dev > 1e-9:
            return math.inf
    return worst


def ks_monotone_violation(records: Sequence[DiagnosticsRecord]) -> float:
    """Largest increase of ``int k_s^2 ds`` between consecutive records (<= 0 if monotone)."""
    v = series_array(records, "int_ks2")
    if len(v) < 2:
        return 0.0
    return float(np.max(np.diff(v)))


def energy_dissipation_residual(records: Sequence[DiagnosticsRecord]) -> float:
    """``max |dE/dt + ||F||^2| / (||F||^2 + 1)`` from consecutive records (trapezoid)."""
    t = series_array(records, "t")
    E = series_array(records, "E")
    F2 = series_array(records, "F_norm2")
    dt = np.diff(t)
    ok = dt > 0
    rate = np.diff(E)[ok] / dt[ok]
    f2 = 0.5 * (F2[1:] + F2[:-1])[ok]
    return float(np.max(np.abs(rate + f2) / (f2 + 1.0))) if ok.any() else 0.0


# -- evolution identities -----------------------------------------------------


@dataclass(frozen=True)
class IdentityResidual:
    lhs: float
    rhs: float
    rel: float


@dataclass(frozen=True)
class EvolutionResiduals:
    ks: IdentityResidual  # d/dt int k_s^2 ds
    length: IdentityResidual  # dL/dt
    energy: IdentityResidual  # dE/dt = -||F||^2
    curvature: IdentityResidual  # dk/dt = -(F_ss + F k^2), discrete L^2
    dt: float
    N: int


def _ks_rhs(g) -> float:
    k, ks, kss, ksss = g.k, g.k_s, g.k_ss, g.k_sss
    return (
        -2.0 * g.integrate(ksss**2)
        + 5.0 * g.integrate(kss**2 * k**2)
        - 5.0 / 3.0 * g.integrate(ks**4)
        - 5.5 * g.integrate(ks**2 * k**4)
    )


def _rel(lhs, rhs, floor):
    return abs(lhs - rhs) / max(abs(rhs), floor)


def evolution_residuals(state, config, dt: float | None = None,
                        floor: float = 1e-300) -> EvolutionResiduals:
    """Centred time differences over two steps against the evolution laws at the middle step."""
    from .flow import advance

    curve = getattr(state, "curve", state)
    dt = config.dt if dt is None else dt
    c0, c1, c2 = advance(curve, dt, 2, config)
    kw = dict(method=config.method, max_mesh_ratio=None, filter_tol=config.geometry_tol)
    g0, g1, g2 = (compute_geometry(c, **kw) for c in (c0, c1, c2))

    def cdiff(f):
        return (f(g2) - f(g0)) / (2.0 * dt)

    ks_l = cdiff(lambda g: g.norm2_sq(g.k_s))
    ks_r = _ks_rhs(g1)
    L_l = cdiff(lambda g: g.L)
    L_r = -g1.norm2_sq(g1.k_s) + 0.5 * g1.integrate(g1.k**4)
    E_l = cdiff(lambda g: 0.5 * g.norm2_sq(g.k))
    F1 = g1.k_ss + 0.5 * g1.k**3
    E_r = -g1.norm2_sq(F1)
    kt = (g2.k - g0.k) / (2.0 * dt)
    kt_r = -(g1.d_s(g1.d_s(F1)) + F1 * g1.k**2)
    k_err = math.sqrt(g1.norm2_sq(kt - kt_r))
    k_ref = math.sqrt(g1.norm2_sq(kt_r))
    return EvolutionResiduals(
        ks=IdentityResidual(ks_l, ks_r, _rel(ks_l, ks_r, floor)),
        length=IdentityResidual(L_l, L_r, _rel(L_l, L_r, floor)),
        energy=IdentityResidual(E_l, E_r, _rel(E_l, E_r, floor)),
        curvature=IdentityResidual(math.sqrt(g1.norm2_sq(kt)), k_ref, k_err / max(k_ref, floor)),
        dt=dt,
        N=curve.N,
    )


def ks_identity_residual(state, config, dt: float | None = None) -> IdentityResidual:
    """Discrepancy between the measured rate of ``int k_s^2 ds`` and its evolution formula."""
    return evolution_residuals(state, config, dt=dt).ks


# -- decay report -------------------------------------------------------------


@dataclass
class DecayReport:
    informational: bool
    eps0: float
    eps_two: float
    checks: dict = field(default_factory=dict)  # name -> (passed, measured, bound)
    eps_exponent: float = float("nan")
    Q_exponent: float = float("nan")

    @property
    def passed(self) -> bool:
        return all(c[0] for c in self.checks.values())


def decay_report(records: Sequence[DiagnosticsRecord], constants, slack: float = 0.05) -> DecayReport:
    """Check a run against the decay envelopes for ``Q`` and ``eps``.

    ``constants`` is a :class:`elasticflow.constants.TheoryConstants` for the
    run's turning number.  If ``eps(0)`` exceeds ``eps_two`` the hypotheses do
    not hold and the report is informational only.
    """
    w = constants.omega
    r0 = records[0]
    t = series_array(records, "t")
    eps = series_array(records, "eps")
    Q = series_array(records, "Q")
    L = series_array(records, "L")
    E = series_array(records, "E")
    L0 = r0.L
    growth = (1.0 + constants.c_two * t / L0**4) ** (-constants.c_one)
    checks = {}

    checks["eps_below_eps_one"] = (bool(eps.max() <= constants.eps_one), float(eps.max()),
                                   constants.eps_one)
    # increments below 1e-12 Q(0) are round-off once Q has decayed to its floor
    dq = np.diff(Q) - 1e-9 * Q[:-1] - 1e-12 * Q[0]
    checks["Q_non_increasing"] = (bool(np.all(dq <= 0)), float(dq.max(initial=-np.inf)), 0.0)
    env = Q[0] * growth * (1.0 + slack)
    q_ratio = float(np.max(np.where(env > 0, Q / np.where(env > 0, env, 1), 0.0)))
    checks["Q_envelope"] = (bool(np.all(Q <= env)), q_ratio, 1.0)
    eps_env = constants.eps_envelope(r0.eps, t, L0) * (1.0 + slack)
    e_ratio = float(np.max(np.where(eps_env > 0, eps / np.where(eps_env > 0, eps_env, 1), 0.0)))
    checks["eps_envelope"] = (bool(np.all(eps <= eps_env)), e_ratio, 1.0)
    LE = L * E
    le_upper = eps / (8 * PI**2) + 2 * w**2 * PI**2
    checks["LE_upper"] = (bool(np.all(LE <= le_upper * (1 + slack))),
                          float(np.max(LE / le_upper)), 1.0 + slack)
    checks["LE_lower"] = (bool(np.all(LE >= 2 * PI**2 * (1 - 1e-9))), float(LE.min()), 2 * PI**2)
    dle = np.diff(LE) - 1e-12 * LE[:-1]
    checks["LE_non_increasing"] = (bool(np.all(dle <= 0)), float(dle.max(initial=-np.inf)), 0.0)
    kb = kbar_bound_ratio(records)
    checks["kbar_bound"] = (bool(kb <= 1.02), kb, 1.02)

    return DecayReport(
        informational=bool(r0.eps > constants.eps_two),
        eps0=r0.eps,
        eps_two=constants.eps_two,
        checks=checks,
        eps_exponent=fit_power_law(t, eps),
        Q_exponent=fit_power_law(t, Q),
    )
