"""Time integration of the free elastic flow ``gamma_t = -(k_ss + k^3/2) nu``.

Each base step is linearly implicit: with the curve frozen at the start of the
step we build the cyclic pentadiagonal operator ``A = alpha * D2 D2``, where
``D2`` is the three-point second arclength difference on the current chord
lengths, and solve

    (I + dt A) v = filter(F nu),        gamma_new = gamma - dt v.

Since ``(I + dt A)^{-1} = I - dt A + O(dt^2)`` this is consistent with the
flow, while ``A`` damps the stiff fourth-order modes.  ``alpha`` has to
dominate the spectral fourth derivative on the modes the exponential
velocity filter leaves intact; ``alpha = 3`` with the default filter does.
Base steps are combined by Richardson extrapolation (orders 1 to 3).

Tangential redistribution is a separate projection onto equal arclength
spacing and never changes the image.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import kernels
from .curve import (
    DEFAULT_FILTER_TOL,
    ClosedCurve,
    CurveError,
    GeometricQuantities,
    compute_geometry,
    spectral_derivative,
)
from .diagnostics import DiagnosticsRecord, make_record


class StepRejected(RuntimeError):
    pass


class FlowAborted(RuntimeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class RedistributionError(CurveError):
    pass


@dataclass
class FlowConfig:
    """Resolution, time-step policy, redistribution policy and tolerances.

    ``cfl`` caps adaptive steps at ``cfl / max|k|^4``, the curvature time scale
    of the flow.  ``record_stride`` counts accepted steps between records.
    """

    t_end: float = 1.0
    dt: float = 1e-4
    dt_policy: str = "adaptive"  # "fixed" | "adaptive"
    N: int | None = None
    cfl: float | None = 2e-3
    dt_min: float = 1e-14
    dt_growth: float = 1.2
    grow_after: int = 10
    order: int = 3
    stabilization: float = 3.0
    filter_strength: float = 36.0
    filter_order: int = 16
    method: str = "spectral"
    geometry_tol: float = DEFAULT_FILTER_TOL
    solver_tol: float = 1e-8
    error_tol: float | None = None
    redistribution: str = "threshold"  # "off" | "every" | "threshold"
    redistribution_threshold: float = 1.5
    mesh_abort_ratio: float = 10.0
    record_stride: int = 1
    max_steps: int = 5_000_000

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.dt_policy not in ("fixed", "adaptive"):
            raise ValueError(f"unknown dt_policy {self.dt_policy!r}")
        if self.redistribution not in ("off", "every", "threshold"):
            raise ValueError(f"unknown redistribution policy {self.redistribution!r}")
        if self.order not in (1, 2, 3):
            raise ValueError("order must be 1, 2 or 3")
        for name in ("stabilization", "redistribution_threshold", "mesh_abort_ratio",
                     "dt_growth", "solver_tol", "dt_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.cfl is not None and not self.cfl > 0:
            raise ValueError("cfl must be positive or None")
        if self.record_stride < 1 or self.grow_after < 1:
            raise ValueError("record_stride and grow_after must be >= 1")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> FlowConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown FlowConfig keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class FlowState:
    curve: ClosedCurve
    t: float = 0.0
    step_count: int = 0
    last_dt: float = 0.0
    dt_next: float | None = None
    accepted_since_growth: int = 0
    rejections: int = 0
    redistributions: int = 0
    history: list = field(default_factory=list, repr=False)


# -- operators ----------------------------------------------------------------


def velocity_F(geom: GeometricQuantities) -> np.ndarray:
    """Normal speed ``F = k_ss + k^3/2``; the flow velocity is ``-F nu``."""
    return geom.k_ss + 0.5 * geom.k**3


def stiff_operator_bands(points: np.ndarray, alpha: float = 1.0):
    """Cyclic pentadiagonal bands of ``alpha * D2 @ D2`` on the chord metric.

    ``D2 f_i = 2/(l_+ + l_-) ((f_{i+1} - f_i)/l_+ - (f_i - f_{i-1})/l_-)`` with
    ``l_+ = |gamma_{i+1} - gamma_i|`` and ``l_- = |gamma_i - gamma_{i-1}|``.
    Returns ``(a, b, c, d, e)`` in the layout of
    :func:`elasticflow.kernels.cyclic_penta_solve`.
    """
    lp = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
    lm = np.roll(lp, 1)
    w = 2.0 / (lp + lm)
    lo = w / lm
    di = -w * (1.0 / lp + 1.0 / lm)
    up = w / lp
    lo_prev, di_prev, up_prev = np.roll(lo, 1), np.roll(di, 1), np.roll(up, 1)
    lo_next, di_next, up_next = np.roll(lo, -1), np.roll(di, -1), np.roll(up, -1)
    a = lo * lo_prev
    b = lo * di_prev + di * lo
    c = lo * up_prev + di * di + up * lo_next
    d = di * up + up * di_next
    e = up * up_next
    return tuple(alpha * x for x in (a, b, c, d, e))


def velocity_filter(v: np.ndarray, strength: float, order: int) -> np.ndarray:
    """Exponential Fourier filter ``exp(-strength (|m|/(N/2))^order)`` along axis 0."""
    if strength <= 0:
        return v
    n = v.shape[0]
    p = np.arange(n // 2 + 1) / (n / 2.0)
    sig = np.exp(-strength * p**order)
    if v.ndim > 1:
        sig = sig[:, None]
    return np.fft.irfft(sig * np.fft.rfft(v, axis=0), n=n, axis=0)


def _euler(points: np.ndarray, dt: float, cfg: FlowConfig):
    curve = ClosedCurve(points)
    geom = compute_geometry(curve, method=cfg.method, max_mesh_ratio=None,
                            filter_tol=cfg.geometry_tol)
    V = velocity_F(geom)[:, None] * geom.nu
    V = velocity_filter(V, cfg.filter_strength, cfg.filter_order)
    a, b, c, d, e = stiff_operator_bands(points, cfg.stabilization * dt)
    c = c + 1.0
    v = kernels.cyclic_penta_solve(a, b, c, d, e, V)
    scale = max(float(np.abs(V).max()), np.finfo(float).tiny)
    resid = float(np.abs(kernels.cyclic_penta_matvec(a, b, c, d, e, v) - V).max()) / scale
    return points - dt * v, resid


def _chain(points, dt, k, cfg):
    resid = 0.0
    for _ in range(k):
        points, r = _euler(points, dt / k, cfg)
        resid = max(resid, r)
    return points, resid


def extrapolated_step(points: np.ndarray, dt: float, cfg: FlowConfig):
    """One step of order ``cfg.order``; returns ``(points, residual, error_estimate)``.

    The error estimate is the max-norm gap to the next lower order.
    """
    e1, r1 = _euler(points, dt, cfg)
    if cfg.order == 1:
        return e1, r1, float("nan")
    e2, r2 = _chain(points, dt, 2, cfg)
    p2 = 2.0 * e2 - e1
    if cfg.order == 2:
        return p2, max(r1, r2), float(np.abs(p2 - e1).max())
    e3, r3 = _chain(points, dt, 3, cfg)
    p3 = 0.5 * e1 - 4.0 * e2 + 4.5 * e3
    return p3, max(r1, r2, r3), float(np.abs(p3 - p2).max())


def advance(curve: ClosedCurve, dt: float, nsteps: int, cfg: FlowConfig) -> list[ClosedCurve]:
    """Take ``nsteps`` fixed steps without redistribution; returns every curve."""
    out = [curve]
    pts = curve.points
    for _ in range(nsteps):
        pts, resid, _ = extrapolated_step(pts, dt, cfg)
        if resid > cfg.solver_tol:
            raise StepRejected(f"linear residual {resid:.3g} above tolerance")
        out.append(ClosedCurve(pts))
    return out


# -- redistribution -----------------------------------------------------------


def redistribute(curve: ClosedCurve, tol: float = 1e-14, max_iter: int = 60,
                 filter_tol: float = DEFAULT_FILTER_TOL) -> ClosedCurve:
    """Resample the same (trigonometric) image at equal arclength spacing.

    The arclength function ``s(u)`` is integrated in Fourier space, the new
    parameters ``u_j`` with ``s(u_j) = j L / N`` are found by Newton's method
    and the curve's interpolant is evaluated there.
    """
    z = curve.points
    n = curve.N
    zu = spectral_derivative(z, filter_tol)
    g = np.hypot(zu[:, 0], zu[:, 1])
    gh = np.fft.rfft(g) / n
    L = float(gh[0].real)
    q = np.arange(len(gh))
    ph = np.zeros_like(gh)
    ph[1:] = gh[1:] / (2j * np.pi * q[1:])
    if n % 2 == 0:
        ph[-1] = 0.0
    p0 = float(kernels.trig_eval(ph, np.zeros(1), n)[0])

    def s_of(u):
        return L * u + kernels.trig_eval(ph, u, n) - p0

    targets = np.arange(n) * (L / n)
    chord = curve.segment_lengths()
    table = np.concatenate([[0.0], np.cumsum(chord)])
    table *= L / table[-1]
    u = np.interp(targets, table, np.arange(n + 1) / n)
    u[0] = 0.0
    for _ in range(max_iter):
        du = (s_of(u) - targets) / kernels.trig_eval(gh, u, n)
        du[0] = 0.0
        u = u - du
        if np.abs(du).max() < tol:
            break
    else:
        if np.abs(du).max() > 1e3 * tol:
            raise RedistributionError("arclength inversion did not converge")
    if np.any(np.diff(u) <= 0):
        raise RedistributionError("arclength inversion produced non-monotone parameters")
    new = kernels.trig_eval(np.fft.rfft(z, axis=0) / n, u, n)
    try:
        return ClosedCurve(new)
    except CurveError as exc:
        raise RedistributionError(f"interpolated curve is invalid: {exc}") from exc


# -- stepping -----------------------------------------------------------------


def dt_cap(geom: GeometricQuantities, cfg: FlowConfig) -> float:
    if cfg.cfl is None:
        return math.inf
    kmax = float(np.abs(geom.k).max())
    return cfg.cfl / max(kmax, 1e-300) ** 4


def step(state: FlowState, cfg: FlowConfig) -> FlowState:
    """Advance by one accepted step, halving ``dt`` on rejected attempts."""
    geom = compute_geometry(state.curve, method=cfg.method, max_mesh_ratio=None,
                            filter_tol=cfg.geometry_tol)
    cap = dt_cap(geom, cfg)
    if cfg.dt_policy == "fixed":
        dt = cfg.dt
    else:
        dt = min(state.dt_next if state.dt_next is not None else cfg.dt, cap)
    remaining = cfg.t_end - state.t
    rejections = 0
    while True:
        dt_try = min(dt, remaining) if remaining > 0 else dt
        try:
            pts, resid, err = extrapolated_step(state.curve.points, dt_try, cfg)
            if not np.all(np.isfinite(pts)):
                raise StepRejected("non-finite positions")
            if resid > cfg.solver_tol:
                raise StepRejected(f"linear residual {resid:.3g} above {cfg.solver_tol:g}")
            if cfg.error_tol is not None and cfg.order > 1 and err > cfg.error_tol * geom.L:
                raise StepRejected(f"local error estimate {err:.3g} above tolerance")
            new_curve = ClosedCurve(pts)
            break
        except (StepRejected, CurveError, np.linalg.LinAlgError, FloatingPointError) as exc:
            rejections += 1
            dt *= 0.5
            if dt < cfg.dt_min:
                raise FlowAborted(f"step size underflow after rejection: {exc}", state) from exc

    redistributions = state.redistributions
    if cfg.redistribution == "every" or (
        cfg.redistribution == "threshold"
        and new_curve.mesh_ratio() > cfg.redistribution_threshold
    ):
        try:
            new_curve = redistribute(new_curve, filter_tol=cfg.geometry_tol)
        except RedistributionError as exc:
            raise FlowAborted(f"redistribution failed: {exc}", state) from exc
        redistributions += 1
    if new_curve.mesh_ratio() > cfg.mesh_abort_ratio:
        raise FlowAborted(
            f"mesh ratio {new_curve.mesh_ratio():.3g} exceeds {cfg.mesh_abort_ratio:g}", state
        )

    accepted = state.accepted_since_growth + 1
    dt_next = dt
    if cfg.dt_policy == "adaptive" and rejections == 0 and accepted >= cfg.grow_after:
        dt_next = dt * cfg.dt_growth
        accepted = 0
    elif rejections:
        accepted = 0
    return FlowState(
        curve=new_curve,
        t=state.t + dt_try,
        step_count=state.step_count + 1,
        last_dt=dt_try,
        dt_next=dt_next,
        accepted_since_growth=accepted,
        rejections=state.rejections + rejections,
        redistributions=redistributions,
        history=state.history,
    )


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    final: FlowState
    status: str = "completed"  # "completed" | "aborted"
    message: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def run(
    initial: ClosedCurve,
    config: FlowConfig,
    callback: Callable[[FlowState], None] | None = None,
) -> RunResult:
    """Integrate to ``config.t_end``, recording every ``record_stride`` steps.

    The initial and final states are always recorded.  On abort the last good
    state is returned with ``status="aborted"``.  A zero horizon yields an
    empty series.
    """
    if config.N is not None and initial.N != config.N:
        raise ValueError(f"initial curve has {initial.N} nodes, config expects {config.N}")
    state = FlowState(curve=initial)
    records = state.history
    if config.t_end <= 0:
        return RunResult(records=records, final=state, status="completed",
                         message="zero horizon")
    records.append(make_record(state.curve, 0.0, 0.0, config))
    status, message = "completed", ""
    t_tol = 1e-12 * max(1.0, config.t_end)
    while state.t < config.t_end - t_tol:
        if state.step_count >= config.max_steps:
            status, message = "aborted", f"max_steps={config.max_steps} reached"
            break
        try:
            new = step(state, config)
            rec = None
            if new.step_count % config.record_stride == 0 or new.t >= config.t_end - t_tol:
                rec = make_record(new.curve, new.t, new.last_dt, config)
                if not rec.is_finite():
                    raise FlowAborted("non-finite diagnostics", state)
        except FlowAborted as exc:
            status, message = "aborted", str(exc)
            break
        state = new
        if rec is not None:
            records.append(rec)
        if callback is not None:
            callback(state)
    return RunResult(records=records, final=state, status=status, message=message)


def gradient_check(curve: ClosedCurve, phi, h: float = 1e-4, method: str = "spectral") -> float:
    """``|(E[g + h phi nu] - E[g - h phi nu])/(2h) - int F phi ds|``.

    ``phi`` is an array of nodal values or a callable of the parameter ``u``.
    """
    geom = compute_geometry(curve, method=method, max_mesh_ratio=None)
    phi = np.asarray(phi(curve.u) if callable(phi) else phi, dtype=float)
    if phi.shape != (curve.N,):
        raise ValueError("phi must have one value per node")
    shift = (h * phi)[:, None] * geom.nu

    def energy(pts):
        g = compute_geometry(ClosedCurve(pts), method=method, max_mesh_ratio=None)
        return 0.5 * g.norm2_sq(g.k)

    fd = (energy(curve.points + shift) - energy(curve.points - shift)) / (2.0 * h)
    exact = geom.integrate(velocity_F(geom) * phi)
    return abs(fd - exact)


__all__ = [
    "FlowAborted", "FlowConfig", "FlowState", "RedistributionError", "RunResult",
    "StepRejected", "advance", "dt_cap", "extrapolated_step", "gradient_check",
    "redistribute", "run", "step", "stiff_operator_bands", "velocity_F",
    "velocity_filter",
]
