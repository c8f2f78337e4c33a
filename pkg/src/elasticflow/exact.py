"""Closed-form free elastic flows and initial-data generators.

Two explicit solutions are known: the expanding ``omega``-circle with radius
``(rho0^4 + 2t)^{1/4}`` and the self-similarly expanding lemniscate of
Bernoulli with scale ``(h0^4 + 30t)^{1/4}``.  The lemniscate is naturally
written with an angle ``theta`` in ``[0, 2pi)``; the generators here sample
``theta = 2 pi u`` so that curves live on ``u in R/Z`` like every other curve
in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curve import ClosedCurve, CurveError, compute_geometry, diagnostics

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CircleSolution:
    omega: int = 1
    rho0: float = 1.0
    centre: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.omega) < 1 or self.omega != int(self.omega):
            raise ValueError("omega must be a positive integer")
        if self.rho0 <= 0:
            raise ValueError("rho0 must be positive")

    def radius(self, t):
        return (self.rho0**4 + 2.0 * np.asarray(t, dtype=float)) ** 0.25

    def length(self, t):
        return TWO_PI * self.omega * self.radius(t)


@dataclass(frozen=True)
class LemniscateSolution:
    h0: float = 1.0

    def __post_init__(self):
        if self.h0 <= 0:
            raise ValueError("h0 must be positive")

    def scale(self, t):
        return (self.h0**4 + 30.0 * np.asarray(t, dtype=float)) ** 0.25


def circle_at(sol: CircleSolution, t: float, N: int) -> ClosedCurve:
    """Sample ``rho(t) (cos 2 pi omega u, sin 2 pi omega u) + centre``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    u = np.arange(N) / N
    rho = float(sol.radius(t))
    theta = TWO_PI * sol.omega * u
    return ClosedCurve.from_xy(
        rho * np.cos(theta) + sol.centre[0], rho * np.sin(theta) + sol.centre[1]
    )


def lemniscate_point(theta) -> np.ndarray:
    """``beta(theta) = (cos theta, sin theta cos theta) / (1 + sin^2 theta)``."""
    theta = np.asarray(theta, dtype=float)
    den = 1.0 + np.sin(theta) ** 2
    return np.stack([np.cos(theta) / den, np.sin(theta) * np.cos(theta) / den], axis=-1)


def lemniscate_at(sol: LemniscateSolution, t: float, N: int) -> ClosedCurve:
    """Sample ``h(t) beta(2 pi u_i)``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    u = np.arange(N) / N
    return ClosedCurve(float(sol.scale(t)) * lemniscate_point(TWO_PI * u))


@dataclass(frozen=True)
class Mode:
    """Radial Fourier perturbation ``a cos(m theta + phase)``."""

    m: int
    a: float
    phase: float = 0.0


@dataclass(frozen=True)
class PerturbedCircle:
    curve: ClosedCurve
    eps0: float
    modes: tuple[Mode, ...] = field(default=())


def perturbed_circle(
    omega: int,
    modes: Sequence[Mode | tuple],
    rho0: float = 1.0,
    N: int = 256,
) -> PerturbedCircle:
    """``omega``-fold traversal of ``r(theta) = rho0 (1 + sum a_m cos(m theta + phi_m))``.

    Returns the curve together with its measured ``eps(0)``; the generator
    does not aim at a target value.
    """
    modes = tuple(m if isinstance(m, Mode) else Mode(*m) for m in modes)
    if omega < 1:
        raise ValueError("omega must be >= 1")
    theta = TWO_PI * omega * np.arange(N) / N
    r = np.ones_like(theta)
    for md in modes:
        r = r + md.a * np.cos(md.m * theta + md.phase)
    if r.min() <= 0:
        raise CurveError("perturbation amplitudes make the radial graph non-positive")
    r = rho0 * r
    curve = ClosedCurve.from_xy(r * np.cos(theta), r * np.sin(theta))
    geom = compute_geometry(curve)
    diag = diagnostics(geom, curve)
    if diag.omega != omega:
        raise CurveError(f"generated curve has turning number {diag.omega}, expected {omega}")
    return PerturbedCircle(curve=curve, eps0=diag.eps, modes=modes)


def make_initial_curve(kind: str, N: int, rng: np.random.Generator | None = None, **params):
    """Build initial data by generator name (used by experiment specs and the CLI).

    ``kind`` is ``"circle"``, ``"lemniscate"`` or ``"perturbed_circle"``.
    For perturbed circles a mode phase given as ``"random"`` is drawn from
    ``rng``.
    """
    if kind == "circle":
        sol = CircleSolution(
            omega=int(params.get("omega", 1)),
            rho0=float(params.get("rho0", 1.0)),
            centre=tuple(params.get("centre", (0.0, 0.0))),
        )
        return circle_at(sol, 0.0, N)
    if kind == "lemniscate":
        return lemniscate_at(LemniscateSolution(float(params.get("h0", 1.0))), 0.0, N)
    if kind == "perturbed_circle":
        rng = rng or np.random.default_rng(0)
        modes = []
        for md in params.get("modes", []):
            if isinstance(md, dict):
                m, a, ph = md["m"], md["a"], md.get("phase", 0.0)
            else:
                m, a, ph = (tuple(md) + (0.0,))[:3]
            if ph == "random":
                ph = float(rng.uniform(0.0, TWO_PI))
            modes.append(Mode(int(m), float(a), float(ph)))
        return perturbed_circle(
            int(params.get("omega", 1)), modes, float(params.get("rho0", 1.0)), N
        ).curve
    raise ValueError(f"unknown generator {kind!r}")
