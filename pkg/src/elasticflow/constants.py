"""The chain of explicit constants behind the stability of omega-circles.

Every value is computed with mpmath at 40 significant digits and rounded to
a double at the end.  Closed forms are cross-checked against independent
root finders and each scalar carries a provenance note and a residual.

Conventions:

* ``eps_star(omega)``: the smallness threshold below which ``int k_s^2 ds``
  is non-increasing.
* ``C_hat(sigma, omega)``: the constant in the sharp length law
  ``|L^4 - L0^4 - 32 omega^4 pi^4 t| <= sigma C_hat t``.
* ``delta_star(eps, sigma, omega)``: the rescaled lifespan over which
  ``eps`` stays below ``sigma``.
* ``eps_one``, ``c_one``, ``c_two``: the decay
  ``Q(t) <= Q(0) (1 + c_two t / L0^4)^(-c_one)``.
* ``eps_two``: the threshold on ``eps(0)`` that keeps ``eps <= eps_one``
  forever, and ``c_three``: the prefactor of the ``eps`` decay.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

DPS = 40
_BISECT_ITERS = 400


def _check_omega(omega):
    if int(omega) != omega or omega < 1:
        raise ValueError("omega must be an integer >= 1")
    return int(omega)


# -- closed forms in extended precision --------------------------------------


def _eps_star_mp(w):
    A = 11 * mp.mpf(w) ** 3 + 5 * w
    c = mp.mpf(5) / 16
    # sqrt(A^2 + 5/16) - A without cancellation
    return 8 * mp.pi**3 / 25 * (c / (mp.sqrt(A * A + c) + A)) ** 2


def _C_hat_mp(sigma, w):
    sigma = mp.mpf(sigma)
    return 4 + sigma / (4 * mp.pi**3) + mp.sqrt(8 * mp.mpf(w) ** 2 / mp.pi**3) * mp.sqrt(sigma) + 12 * mp.mpf(w) ** 2


def _Q_poly_mp(x, w):
    x = mp.mpf(x)
    w = mp.mpf(w)
    r2p = mp.sqrt(2 * mp.pi)
    return (3 / (8 * mp.pi**2) * x**2 + 6 * w / r2p * x**1.5 + 18 * w**2 * mp.pi * x
            + 48 * w**3 * mp.pi**3 / r2p * mp.sqrt(x))


def _delta_star_mp(eps, sigma, w):
    eps, sigma = mp.mpf(eps), mp.mpf(sigma)
    return ((sigma / eps) ** (mp.mpf(4) / 3) - 1) / (sigma * _C_hat_mp(sigma, w) + 32 * mp.mpf(w) ** 4 * mp.pi**4)


def _bisect(f, lo, hi, iters=_BISECT_ITERS, rel=None):
    """Bisection for an increasing ``f`` with ``f(lo) <= 0 < f(hi)``; returns the bracket."""
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    rel = rel or mp.mpf(10) ** (-DPS + 5)
    for _ in range(iters):
        mid = (lo + hi) / 2
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel * hi:
            break
    return lo, hi


# -- public scalar functions -------------------------------------------------


def eps_star(omega: int) -> float:
    """``(8 pi^3/25) (sqrt(A^2 + 5/16) - A)^2`` with ``A = 11 omega^3 + 5 omega``."""
    w = _check_omega(omega)
    with mp.workdps(DPS):
        return float(_eps_star_mp(w))


def eps_star_quadratic(x: float, omega: int) -> float:
    """``1/16 - (5/(8 pi^3)) x^2 - (A/sqrt(2 pi^3)) x``; ``sqrt(eps_star)`` is its positive root."""
    A = 11.0 * omega**3 + 5.0 * omega
    return 1.0 / 16.0 - 5.0 / (8.0 * math.pi**3) * x * x - A / math.sqrt(2.0 * math.pi**3) * x


def eps_star_bisection(omega: int) -> float:
    """Independent evaluation of ``eps_star`` by root finding on the quadratic."""
    w = _check_omega(omega)
    x = brentq(eps_star_quadratic, 0.0, 1.0, args=(w,), xtol=1e-300, rtol=4 * np.finfo(float).eps,
               maxiter=500)
    return x * x


def C_hat(sigma: float, omega: int) -> float:
    """``4 + sigma/(4 pi^3) + sqrt(8 omega^2/pi^3) sqrt(sigma) + 12 omega^2``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    with mp.workdps(DPS):
        return float(_C_hat_mp(sigma, omega))


@dataclass(frozen=True)
class DeltaStar:
    value: float
    boundary: bool  # eps == sigma
    residual: float  # |P(delta_star)| / sigma


def delta_star(eps: float, sigma: float, omega: int, full: bool = False):
    """Lifespan ``((sigma/eps)^(4/3) - 1) / (sigma C_hat(sigma) + 32 omega^4 pi^4)``.

    The positive root of ``P(t) = eps (1 + (sigma C_hat + 32 omega^4 pi^4) t)^(3/4) - sigma``.
    ``eps == sigma`` returns 0 (flagged as boundary with ``full=True``).
    """
    if not 0 < eps <= sigma:
        raise ValueError("delta_star needs 0 < eps <= sigma")
    with mp.workdps(DPS):
        d = _delta_star_mp(eps, sigma, omega)
        D = sigma * _C_hat_mp(sigma, omega) + 32 * mp.mpf(omega) ** 4 * mp.pi**4
        P = eps * (1 + D * d) ** (mp.mpf(3) / 4) - sigma
        res = float(abs(P) / sigma)
    out = DeltaStar(float(d), eps == sigma, res)
    return out if full else out.value


def Q_poly(x: float, omega: int) -> float:
    """``(3/(8pi^2)) x^2 + (6w/sqrt(2pi)) x^1.5 + 18 w^2 pi x + (48 w^3 pi^3/sqrt(2pi)) x^0.5``."""
    if x < 0:
        raise ValueError("x must be non-negative")
    with mp.workdps(DPS):
        return float(_Q_poly_mp(x, omega))


def Q_target(omega: int) -> float:
    """Right-hand side ``(2 omega pi)^4 / 15`` of the equation defining one candidate for ``eps_one``."""
    return (2.0 * omega * math.pi) ** 4 / 15.0


def c_two_at(eps1: float, omega: int) -> float:
    with mp.workdps(DPS):
        return float(eps1 * _C_hat_mp(eps1, omega) + 32 * mp.mpf(omega) ** 4 * mp.pi**4)


def c_one_at(eps1: float, omega: int) -> float:
    """``48 omega^4 pi^4 / (5 c_two)`` evaluated at an arbitrary ``eps_one``; tends to 3/10."""
    with mp.workdps(DPS):
        c2 = eps1 * _C_hat_mp(eps1, omega) + 32 * mp.mpf(omega) ** 4 * mp.pi**4
        return float(48 * mp.mpf(omega) ** 4 * mp.pi**4 / (5 * c2))


class ConstantsError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpsOne:
    value: float
    binding: str  # "eps_star" | "pi^4/6" | "Q root" | "C_hat cap"
    candidates: dict


def eps_one(omega: int) -> EpsOne:
    """``min(eps_star, pi^4/6, root of Q_poly = (2 omega pi)^4/15)``, then capped so that
    ``eps_one C_hat(eps_one) <= 16 omega^4 pi^4``."""
    w = _check_omega(omega)
    with mp.workdps(DPS):
        target = (2 * w * mp.pi) ** 4 / 15
        hi = mp.pi**4 / 6
        while _Q_poly_mp(hi, w) <= target:
            hi *= 2
            if hi > 1e30:
                raise ConstantsError("Q_poly root bracket not found")
        lo, hi_b = _bisect(lambda x: _Q_poly_mp(x, w) - target, 0, hi)
        q_root = (lo + hi_b) / 2
        cands = {"eps_star": _eps_star_mp(w), "pi^4/6": mp.pi**4 / 6, "Q root": q_root}
        binding = min(cands, key=lambda k: cands[k])
        e1 = cands[binding]
        cap = 16 * mp.mpf(w) ** 4 * mp.pi**4
        if e1 * _C_hat_mp(e1, w) > cap:
            # largest eps with eps C_hat(eps) <= cap; the product is increasing
            lo, _ = _bisect(lambda x: x * _C_hat_mp(x, w) - cap, 0, e1)
            e1, binding = lo, "C_hat cap"
        return EpsOne(float(e1), binding, {k: float(v) for k, v in cands.items()})


def _prefactor_mp(e1, w):
    """``(1/(8 pi^6)) (eps_one/(8 pi^2) + 2 w^2 pi^2)^3``: bound on ``eps(t) / (eps(0) (1 + c2 t/L0^4)^(-c1))``."""
    return (e1 / (8 * mp.pi**2) + 2 * mp.mpf(w) ** 2 * mp.pi**2) ** 3 / (8 * mp.pi**6)


@dataclass(frozen=True)
class EpsTwo:
    value: float
    width: float  # certified bracket width
    status: str  # "bisection" | "unconstrained"
    residual_at: float  # inequality lhs - 1 at value (<= 0)
    residual_above: float  # lhs - 1 at 1.01 value (> 0 unless unconstrained)
    closed_form: float


def eps_two_lhs(eps2: float, omega: int, e1: float | None = None) -> float:
    """``K (1 + delta_star(eps2, eps_one)/c_two)^(-c_one)`` whose value must not exceed 1."""
    w = _check_omega(omega)
    e1 = eps_one(w).value if e1 is None else e1
    with mp.workdps(DPS):
        return float(_eps_two_lhs_mp(mp.mpf(eps2), mp.mpf(e1), w))


def _eps_two_lhs_mp(e2, e1, w):
    c2 = e1 * _C_hat_mp(e1, w) + 32 * mp.mpf(w) ** 4 * mp.pi**4
    c1 = 48 * mp.mpf(w) ** 4 * mp.pi**4 / (5 * c2)
    d = _delta_star_mp(e2, e1, w)
    return _prefactor_mp(e1, w) * (1 + d / c2) ** (-c1)


def eps_two(omega: int) -> EpsTwo:
    """Largest ``eps_two`` in ``(0, eps_one)`` with ``eps_two_lhs(eps_two) <= 1``.

    The left side increases with ``eps_two`` (``delta_star`` decreases), so the
    admissible set is an interval found by bisection in ``log eps``.  The
    bisection is checked against the closed form
    ``eps_one (1 + c_two^2 (K^(1/c_one) - 1))^(-3/4)``.
    """
    w = _check_omega(omega)
    with mp.workdps(DPS):
        e1 = mp.mpf(eps_one(w).value)
        c2 = e1 * _C_hat_mp(e1, w) + 32 * mp.mpf(w) ** 4 * mp.pi**4
        c1 = 48 * mp.mpf(w) ** 4 * mp.pi**4 / (5 * c2)
        K = _prefactor_mp(e1, w)
        if K <= 1:
            v = float(e1)
            return EpsTwo(v, 0.0, "unconstrained", float(K - 1), float("nan"), v)
        closed = e1 * (1 + c2 * c2 * (K ** (1 / c1) - 1)) ** (mp.mpf(-3) / 4)

        def g(logx):
            return _eps_two_lhs_mp(mp.exp(logx), e1, w) - 1

        lo = mp.log(e1) - 10
        while g(lo) > 0:
            lo -= 10
            if lo < -5000:
                raise ConstantsError("no admissible eps_two found (vacuous threshold)")
        a, b = _bisect(g, lo, mp.log(e1) - mp.mpf(10) ** (-DPS + 5))
        a_e, b_e = mp.exp(a), mp.exp(b)
        return EpsTwo(
            value=float(a_e),
            width=float(b_e - a_e),
            status="bisection",
            residual_at=float(_eps_two_lhs_mp(a_e, e1, w) - 1),
            residual_above=float(_eps_two_lhs_mp(a_e * mp.mpf("1.01"), e1, w) - 1),
            closed_form=float(closed),
        )


# -- bundle -------------------------------------------------------------------


@dataclass(frozen=True)
class TheoryConstants:
    """All constants for one turning number, with provenance and residuals."""

    omega: int
    eps_star: float
    eps_one: float
    eps_one_binding: str
    eps_two: float
    eps_two_width: float
    c_one: float
    c_two: float
    c_three: float
    prefactor: float  # K in eps(t) <= K eps(0) (1 + c2 t/L0^4)^(-c1)
    provenance: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    def C_hat(self, sigma: float) -> float:
        return C_hat(sigma, self.omega)

    def delta_star(self, eps: float, sigma: float) -> float:
        return delta_star(eps, sigma, self.omega)

    def Q_poly(self, x: float) -> float:
        return Q_poly(x, self.omega)

    def Q_envelope(self, Q0: float, t, L0: float):
        return Q0 * (1.0 + self.c_two * np.asarray(t, dtype=float) / L0**4) ** (-self.c_one)

    def eps_envelope(self, eps0: float, t, L0: float):
        return self.prefactor * eps0 * (1.0 + self.c_two * np.asarray(t, dtype=float) / L0**4) ** (-self.c_one)

    def invariant_violations(self) -> list[str]:
        w = self.omega
        bad = []
        if not 0 < self.eps_two < self.eps_one <= self.eps_star:
            bad.append("0 < eps_two < eps_one <= eps_star")
        if self.eps_one > math.pi**4 / 6:
            bad.append("eps_one <= pi^4/6")
        if self.Q_poly(self.eps_one) > Q_target(w) + 1e-12:
            bad.append("Q_poly(eps_one) <= (2 omega pi)^4/15")
        if self.eps_one * self.C_hat(self.eps_one) > 16 * w**4 * math.pi**4 * (1 + 1e-15):
            bad.append("eps_one C_hat(eps_one) <= 16 omega^4 pi^4")
        c2 = self.eps_one * self.C_hat(self.eps_one) + 32 * w**4 * math.pi**4
        if not math.isclose(self.c_two, c2, rel_tol=1e-13):
            bad.append("c_two definition")
        if not math.isclose(self.c_one, 48 * w**4 * math.pi**4 / (5 * c2), rel_tol=1e-13):
            bad.append("c_one definition")
        return bad

    def as_row(self) -> dict:
        return {
            "omega": self.omega, "eps_star": self.eps_star, "eps_one": self.eps_one,
            "eps_one_binding": self.eps_one_binding, "eps_two": self.eps_two,
            "c_one": self.c_one, "c_two": self.c_two, "c_three": self.c_three,
        }


@functools.lru_cache(maxsize=None)
def theory_constants(omega: int) -> TheoryConstants:
    w = _check_omega(omega)
    es = eps_star(w)
    es_b = eps_star_bisection(w)
    e1 = eps_one(w)
    e2 = eps_two(w)
    c2 = c_two_at(e1.value, w)
    c1 = c_one_at(e1.value, w)
    with mp.workdps(DPS):
        K = float(_prefactor_mp(mp.mpf(e1.value), w))
    d = delta_star(e2.value, e1.value, w, full=True)
    x = math.sqrt(es)
    return TheoryConstants(
        omega=w,
        eps_star=es,
        eps_one=e1.value,
        eps_one_binding=e1.binding,
        eps_two=e2.value,
        eps_two_width=e2.width,
        c_one=c1,
        c_two=c2,
        c_three=K * e2.value,
        prefactor=K,
        provenance={
            "eps_star": "closed form (cancellation-free), checked by brentq on the quadratic",
            "eps_one": f"minimum of three candidates, binding: {e1.binding}",
            "eps_two": f"log-bisection ({e2.status}), checked against closed form",
            "c_one": "closed form in eps_one",
            "c_two": "closed form in eps_one",
            "c_three": "eps_two times the prefactor K (canonical choice)",
        },
        residuals={
            "eps_star_vs_bisection": abs(es - es_b) / es,
            "eps_star_quadratic": abs(eps_star_quadratic(x, w)) / (1.0 / 16.0),
            "eps_two_bracket": e2.width / e2.value,
            "eps_two_vs_closed_form": abs(e2.value - e2.closed_form) / e2.closed_form,
            "eps_two_lhs_at": e2.residual_at,
            "eps_two_lhs_above": e2.residual_above,
            "delta_star_root": d.residual,
        },
    )


def constants_table(omega_max: int) -> list[TheoryConstants]:
    return [theory_constants(w) for w in range(1, int(omega_max) + 1)]


__all__ = [
    "C_hat", "ConstantsError", "DeltaStar", "EpsOne", "EpsTwo", "Q_poly", "Q_target",
    "TheoryConstants", "c_one_at", "c_two_at", "constants_table", "delta_star", "eps_one",
    "eps_star", "eps_star_bisection", "eps_star_quadratic", "eps_two", "eps_two_lhs",
    "theory_constants",
]
