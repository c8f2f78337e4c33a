"""The nine acceptance criteria as library functions.

Each ``criterion_<n>()`` runs its experiment at the stated tolerance and
returns a :class:`CriterionResult`; ``run_all`` prints one line per criterion.
The test suite and the ``verify-all`` subcommand both call these.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .constants import constants_table, eps_star, eps_star_bisection, c_one_at, theory_constants
from .curve import compute_geometry, poincare_margin
from .diagnostics import (
    decay_report,
    energy_dissipation_residual,
    evolution_residuals,
    ks_monotone_violation,
    length_law_residual,
    series_array,
)
from .exact import CircleSolution, circle_at, perturbed_circle
from .experiment import preset, run_experiment
from .flow import FlowConfig, gradient_check, run


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(
            f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.measured.items()
        )
        return f"[{status}] criterion {self.number}: {self.title} ({parts}; {self.runtime_s:.1f}s)"


def _timed(number, title):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper():
            t0 = time.perf_counter()
            passed, measured = fn()
            return CriterionResult(number, title, bool(passed), measured, time.perf_counter() - t0)
        return wrapper
    return deco


@functools.lru_cache(maxsize=None)
def _preset_run(name: str):
    return run_experiment(preset(name), write=False)


@_timed(1, "circle oracle")
def criterion_1():
    t0 = time.perf_counter()
    oc = _preset_run("circle-oracle-w1")
    elapsed = time.perf_counter() - t0
    t = series_array(oc.records, "t")
    rho = series_array(oc.records, "L") / (2 * math.pi)
    err = float(np.max(np.abs(rho / (1 + 2 * t) ** 0.25 - 1)))
    final_err = abs(rho[-1] / 3.0 - 1)
    ok = oc.status == "completed" and abs(t[-1] - 40) < 1e-9 and err <= 5e-3 and final_err <= 5e-3
    return ok and elapsed < 120, {"max_rel_err": err, "final_radius": float(rho[-1]),
                                  "run_s": elapsed}


@_timed(2, "lemniscate self-similarity")
def criterion_2():
    t0 = time.perf_counter()
    oc = _preset_run("lemniscate-selfsim")
    elapsed = time.perf_counter() - t0
    laws = {lr.name: lr for lr in oc.laws}
    img, scl = laws["lemniscate_image"], laws["lemniscate_scale"]
    ok = oc.status == "completed" and img.measured <= 1e-2 and scl.measured <= 1e-2
    return ok and elapsed < 300, {"image_dev": img.measured, "scale_err": scl.measured,
                                  "run_s": elapsed}


@_timed(3, "sharp length law")
def criterion_3():
    oc = _preset_run("stability-w1")
    recs = oc.records
    e2 = theory_constants(1).eps_two
    ll = length_law_residual(recs, 1)
    ok = (recs[0].eps <= e2 and ll.max_residual <= 1.05 and 0.24 <= ll.exponent <= 0.26)
    return ok, {"eps0": recs[0].eps, "eps_two": e2, "residual": ll.max_residual,
                "exponent": ll.exponent}


@_timed(4, "stability of the circle")
def criterion_4():
    oc = _preset_run("stability-w1")
    recs = oc.records
    tc = theory_constants(1)
    rep = decay_report(recs, tc)
    c = rep.checks
    last = recs[-1]
    ratios = []
    for name in ("ks_max_rescaled", "kss_max_rescaled"):
        v = series_array(recs, name)
        ratios.append(v.max() / max(v[-1], 1e-300))
    ok = (
        oc.status == "completed"
        and abs(last.t - 100.0) < 1e-9
        and not rep.informational
        and c["eps_below_eps_one"][0]
        and c["Q_non_increasing"][0]
        and c["Q_envelope"][0]
        and last.origin_dev < 1e-2
        and min(ratios) >= 10.0
    )
    return ok, {"max_eps": c["eps_below_eps_one"][1], "Q_env_ratio": c["Q_envelope"][1],
                "origin_dev": last.origin_dev, "curv_decay": float(min(ratios))}


@_timed(5, "monotonicity threshold")
def criterion_5():
    out, ok = {}, True
    for w, name in ((1, "stability-w1"), (2, "stability-w2")):
        recs = _preset_run(name).records
        below = float(series_array(recs, "eps").max()) <= eps_star(w)
        v = ks_monotone_violation(recs)
        ok = ok and below and v <= 1e-8 and recs[0].omega == w
        out[f"w{w}_violation"] = v
        out[f"w{w}_below_eps_star"] = below
    return ok, out


def _residual_curve(N):
    return perturbed_circle(1, [(2, 1e-2)], N=N).curve


@_timed(6, "evolution-identity residuals")
def criterion_6():
    cfg = FlowConfig()
    coarse = evolution_residuals(_residual_curve(512), cfg, dt=2e-5)
    fine = evolution_residuals(_residual_curve(1024), cfg, dt=1e-5)
    names = ("ks", "length", "curvature")
    small = all(getattr(fine, n).rel <= 0.1 for n in names)
    shrink = all(getattr(fine, n).rel < getattr(coarse, n).rel for n in names)
    # the per-step dissipation identity along a short run
    short = run(_residual_curve(512), FlowConfig(t_end=0.01, dt=1e-5, cfl=2e-3))
    e_series = energy_dissipation_residual(short.records)
    ok = small and shrink and fine.energy.rel <= 0.05 and e_series <= 0.05
    out = {f"{n}_rel": getattr(fine, n).rel for n in names}
    out.update(energy_rel=fine.energy.rel, energy_series=e_series, shrinks=shrink)
    return ok, out


@_timed(7, "gradient check")
def criterion_7():
    c = circle_at(CircleSolution(), 0.0, 512)
    d1 = gradient_check(c, np.ones(512), h=1e-4)
    d2 = gradient_check(c, lambda u: np.cos(4 * np.pi * u), h=1e-4)
    return max(d1, d2) <= 1e-5, {"phi_1": d1, "phi_cos": d2}


@_timed(8, "constants table")
def criterion_8():
    theory_constants.cache_clear()
    t0 = time.perf_counter()
    table = constants_table(5)
    elapsed = time.perf_counter() - t0
    bad = [tc.omega for tc in table if tc.invariant_violations()]
    rel = abs(eps_star(1) - eps_star_bisection(1)) / eps_star(1)
    c1 = [c_one_at(e, 1) for e in (1e-3, 1e-6)]
    gaps = [0.3 - c for c in c1]
    trend = 0 < gaps[1] < gaps[0] and gaps[1] < 1e-6
    ok = not bad and rel <= 1e-12 and trend and elapsed < 1.0
    return ok, {"violations": len(bad), "eps_star_rel": rel, "c1_gap_1e-6": gaps[1],
                "table_s": elapsed}


def poincare_fields():
    """``(label, geometry, zero-average field)`` triples used by the Poincare suite."""
    out = []
    circle = circle_at(CircleSolution(), 0.0, 256)
    g = compute_geometry(circle)
    u = circle.u
    for m in (1, 2, 3, 5):
        out.append((f"sin(2pi {m} u) on circle", g, np.sin(2 * np.pi * m * u)))
    pc = perturbed_circle(1, [(2, 0.1), (3, 0.05, 0.7)], N=512).curve
    gp = compute_geometry(pc)
    out.append(("k - kbar on perturbed circle", gp, gp.k - gp.average(gp.k)))
    theta = 2 * np.pi * np.arange(512) / 512
    from .curve import ClosedCurve

    ell = ClosedCurve.from_xy(2 * np.cos(theta), np.sin(theta))
    ge = compute_geometry(ell)
    rng = np.random.default_rng(7)
    for j in range(3):
        f = sum(rng.normal() * np.cos(2 * np.pi * m * ell.u + rng.uniform(0, 6.3)) for m in range(1, 6))
        out.append((f"random trig field {j} on ellipse", ge, f - ge.average(f)))
    return out


@_timed(9, "Poincare suite")
def criterion_9():
    worst = 0.0
    for _, g, f in poincare_fields():
        worst = max(worst, *poincare_margin(g, f))
    circle = circle_at(CircleSolution(), 0.0, 256)
    g = compute_geometry(circle)
    eq = poincare_margin(g, np.sin(2 * np.pi * circle.u))[0]
    return worst <= 1.01 and abs(eq - 1) <= 1e-3, {"max_ratio": worst, "first_mode": eq}


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def run_all(echo=print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit()
        echo(res.line())
        results.append(res)
    return results
