"""Named experiments, YAML specs, persistence of series and verdicts, sweeps.

An experiment directory holds

* ``manifest.yaml``: the fully resolved spec, library versions, kernel
  backend, timings and run status;
* ``series.csv``: one :class:`~elasticflow.diagnostics.DiagnosticsRecord` per
  row, preceded by a ``# elasticflow-series v1`` schema line;
* ``verdict.txt``: one law per line with pass/fail/inconclusive and the
  measured value against its bound;
* ``plots/*.svg`` when plots are requested, and ``last_state.csv`` after an
  aborted run.
"""

from __future__ import annotations

import csv
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import mpmath
import numpy as np
import scipy
import yaml

from . import __version__, kernels, svg
from .constants import constants_table, theory_constants
from .curve import ClosedCurve
from .diagnostics import (
    DiagnosticsRecord,
    decay_report,
    energy_dissipation_residual,
    image_deviation,
    kbar_bound_ratio,
    ks_monotone_violation,
    length_law_residual,
    rescaled_curve,
    series_array,
)
from .exact import make_initial_curve
from .flow import FlowConfig, RunResult, run

SERIES_SCHEMA = "# elasticflow-series v1"
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
OUT_ENV = "ELASTICFLOW_OUT"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


@dataclass
class ExperimentSpec:
    """A reproducible experiment: initial data, flow configuration and laws to assert."""

    name: str
    generator: dict
    config: FlowConfig = field(default_factory=FlowConfig)
    out_dir: str | None = None
    laws: list = field(default_factory=list)
    seed: int = 0
    snapshots: int = 4
    group: str | None = None  # specs sharing a group form a dt-refinement study

    def __post_init__(self):
        if not self.name or "/" in self.name:
            raise ValueError("experiment name must be non-empty and contain no '/'")
        if "kind" not in self.generator:
            raise ValueError("generator needs a 'kind'")
        if isinstance(self.config, dict):
            self.config = FlowConfig.from_dict(self.config)
        unknown = [law for law in self.laws if law not in LAWS]
        if unknown:
            raise ValueError(f"unknown laws {unknown}; known: {sorted(LAWS)}")

    @property
    def N(self) -> int:
        return int(self.config.N or self.generator.get("N", 256))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "generator": dict(self.generator),
            "config": self.config.as_dict(),
            "out_dir": self.out_dir,
            "laws": list(self.laws),
            "seed": self.seed,
            "snapshots": self.snapshots,
            "group": self.group,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        d = dict(d)
        d["config"] = FlowConfig.from_dict(d.get("config", {}))
        return cls(**d)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.as_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> ExperimentSpec:
        return cls.from_dict(yaml.safe_load(text))

    @classmethod
    def from_manifest(cls, path) -> ExperimentSpec:
        return cls.from_dict(yaml.safe_load(Path(path).read_text())["spec"])

    def with_overrides(self, nodes=None, t_end=None, dt=None, out_dir=None) -> ExperimentSpec:
        cfg = self.config
        gen = dict(self.generator)
        if nodes is not None:
            cfg = replace(cfg, N=int(nodes))
            gen["N"] = int(nodes)
        if t_end is not None:
            cfg = replace(cfg, t_end=float(t_end))
        if dt is not None:
            cfg = replace(cfg, dt=float(dt))
        return replace(self, config=cfg, generator=gen,
                       out_dir=self.out_dir if out_dir is None else str(out_dir))


def load_specs(path) -> list[ExperimentSpec]:
    """Specs from a YAML file (one mapping, or a list under ``experiments``) or a directory of them."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in (".yaml", ".yml"))
        return [s for f in files for s in load_specs(f)]
    data = yaml.safe_load(path.read_text())
    if isinstance(data, dict) and "experiments" in data:
        return [ExperimentSpec.from_dict(d) for d in data["experiments"]]
    if isinstance(data, dict) and "spec" in data:  # a manifest
        return [ExperimentSpec.from_dict(data["spec"])]
    return [ExperimentSpec.from_dict(data)]


# -- presets ------------------------------------------------------------------

# eps(0) ~ 3.4e-5 at N = 128, below eps_two(1) ~ 4.39e-5
STABILITY_W1_MODES = [{"m": 2, "a": 3.5e-5, "phase": 0.0}]
# eps(0) ~ 1.1e-5, below eps_star(2) ~ 2.52e-5
STABILITY_W2_MODES = [{"m": 2, "a": 5e-6, "phase": 0.0}]


def _preset_specs() -> dict[str, ExperimentSpec]:
    return {
        s.name: s
        for s in [
            ExperimentSpec(
                "circle-oracle-w1",
                {"kind": "circle", "omega": 1, "rho0": 1.0, "N": 256},
                FlowConfig(t_end=40.0, dt=1e-4, cfl=4e-3),
                laws=["circle_radius", "length_exponent", "energy_dissipation"],
            ),
            ExperimentSpec(
                "lemniscate-selfsim",
                {"kind": "lemniscate", "h0": 1.0, "N": 1024},
                FlowConfig(t_end=1.0, dt=1e-6, cfl=1e-2),
                laws=["lemniscate_scale", "lemniscate_image"],
            ),
            ExperimentSpec(
                "stability-w1",
                {"kind": "perturbed_circle", "omega": 1, "modes": STABILITY_W1_MODES, "N": 128},
                FlowConfig(t_end=100.0, dt=1e-4, cfl=2e-3),
                laws=["length_law", "length_exponent", "eps_below_eps_one", "Q_monotone",
                      "Q_envelope", "eps_envelope", "LE_bounds", "kbar_bound", "origin_deviation",
                      "curvature_decay", "ks_monotone", "energy_dissipation"],
            ),
            ExperimentSpec(
                "stability-w2",
                {"kind": "perturbed_circle", "omega": 2, "modes": STABILITY_W2_MODES, "N": 256},
                FlowConfig(t_end=40.0, dt=1e-5, cfl=2e-3),
                laws=["ks_monotone", "length_exponent", "kbar_bound", "LE_bounds"],
            ),
        ]
    }


def preset(name: str) -> ExperimentSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def dt_refinement_specs(base: ExperimentSpec | None = None, levels: int = 3,
                        dt0: float = 1e-4) -> list[ExperimentSpec]:
    """Fixed-step runs at ``dt0, dt0/2, ...`` sharing one group for an observed-order column."""
    base = base or ExperimentSpec(
        "dtref",
        {"kind": "perturbed_circle", "omega": 1, "N": 64,
         "modes": [{"m": 2, "a": 0.05}, {"m": 3, "a": 0.02}]},
        FlowConfig(t_end=0.02, dt=dt0, dt_policy="fixed", order=2, redistribution="off"),
    )
    return [
        replace(base, name=f"{base.name}-{i}", group=base.name,
                config=replace(base.config, dt=dt0 / 2**i, dt_policy="fixed"))
        for i in range(levels)
    ]


# -- laws ---------------------------------------------------------------------


@dataclass(frozen=True)
class LawResult:
    name: str
    status: str
    measured: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        return f"{self.name}: {self.status} measured={self.measured:.6g} bound={self.bound:.6g} {self.detail}".rstrip()


@dataclass
class RunContext:
    spec: ExperimentSpec
    result: RunResult
    initial: ClosedCurve
    snapshots: list  # (t, ClosedCurve)

    @property
    def records(self) -> list[DiagnosticsRecord]:
        return self.result.records

    @property
    def omega(self) -> int:
        return self.records[0].omega


def _cmp(name, measured, bound, ok, detail=""):
    return LawResult(name, PASS if ok else FAIL, float(measured), float(bound), detail)


def _law_circle_radius(ctx):
    g = ctx.spec.generator
    w, rho0 = int(g.get("omega", 1)), float(g.get("rho0", 1.0))
    t = series_array(ctx.records, "t")
    rho = series_array(ctx.records, "L") / (2 * math.pi * w)
    err = float(np.max(np.abs(rho / (rho0**4 + 2 * t) ** 0.25 - 1)))
    return _cmp("circle_radius", err, 5e-3, err <= 5e-3, f"final radius {rho[-1]:.9g}")


def _law_lemniscate_scale(ctx):
    h0 = float(ctx.spec.generator.get("h0", 1.0))
    t = series_array(ctx.records, "t")
    h = h0 * series_array(ctx.records, "L") / ctx.records[0].L
    err = float(np.max(np.abs(h / (h0**4 + 30 * t) ** 0.25 - 1)))
    return _cmp("lemniscate_scale", err, 1e-2, err <= 1e-2, f"final scale {h[-1]:.9g}")


def _law_lemniscate_image(ctx):
    eta0 = rescaled_curve(ctx.initial)
    size = float(np.abs(eta0.points).max())
    dev = max(image_deviation(rescaled_curve(c), eta0) for _, c in ctx.snapshots) / size
    return _cmp("lemniscate_image", dev, 1e-2, dev <= 1e-2, f"{len(ctx.snapshots)} snapshots")


def _law_length_law(ctx):
    r = length_law_residual(ctx.records, ctx.omega)
    return _cmp("length_law", r.max_residual, 1.05, r.max_residual <= 1.05, f"sigma={r.sigma:.4g}")


def _law_length_exponent(ctx):
    r = length_law_residual(ctx.records, ctx.omega, sigma=0.0)
    ok = 0.24 <= r.exponent <= 0.26
    return _cmp("length_exponent", r.exponent, 0.25, ok, "allowed [0.24, 0.26]")


def _decay(ctx):
    return decay_report(ctx.records, theory_constants(ctx.omega))


def _law_from_decay(name, keys, conditional=True):
    # conditional laws rely on eps(0) <= eps_two and are only informational otherwise
    def law(ctx):
        if ctx.omega < 1:
            return LawResult(name, INCONCLUSIVE, math.nan, math.nan, "turning number 0")
        rep = _decay(ctx)
        checks = [rep.checks[k] for k in keys]
        ok = all(c[0] for c in checks)
        status = PASS if ok else FAIL
        detail = ""
        if conditional and rep.informational:
            status, detail = INCONCLUSIVE, f"eps(0)={rep.eps0:.3g} > eps_two={rep.eps_two:.3g}"
        return LawResult(name, status, checks[0][1], checks[0][2], detail)
    return law


def _law_kbar(ctx):
    r = kbar_bound_ratio(ctx.records)
    return _cmp("kbar_bound", r, 1.02, r <= 1.02)


def _law_origin(ctx):
    last = ctx.records[-1]
    dev = max(last.origin_dev, last.centered_dev)
    return _cmp("origin_deviation", dev, 1e-2, dev < 1e-2)


def _law_curvature_decay(ctx):
    worst = 0.0
    for name in ("ks_max_rescaled", "kss_max_rescaled"):
        v = series_array(ctx.records, name)
        worst = max(worst, v[-1] / v.max() if v.max() > 0 else 0.0)
    return _cmp("curvature_decay", worst, 0.1, worst <= 0.1, "final / max of L^2|k_s|, L^3|k_ss|")


def _law_ks_monotone(ctx):
    from .constants import eps_star

    eps_max = float(series_array(ctx.records, "eps").max())
    v = ks_monotone_violation(ctx.records)
    if ctx.omega < 1 or eps_max > eps_star(ctx.omega):
        return LawResult("ks_monotone", INCONCLUSIVE, v, 1e-8, "eps exceeds eps_star")
    return _cmp("ks_monotone", v, 1e-8, v <= 1e-8)


def _law_energy(ctx):
    r = energy_dissipation_residual(ctx.records)
    return _cmp("energy_dissipation", r, 0.05, r <= 0.05)


LAWS: dict[str, Callable[[RunContext], LawResult]] = {
    "circle_radius": _law_circle_radius,
    "lemniscate_scale": _law_lemniscate_scale,
    "lemniscate_image": _law_lemniscate_image,
    "length_law": _law_length_law,
    "length_exponent": _law_length_exponent,
    "eps_below_eps_one": _law_from_decay("eps_below_eps_one", ["eps_below_eps_one"]),
    "Q_monotone": _law_from_decay("Q_monotone", ["Q_non_increasing"]),
    "Q_envelope": _law_from_decay("Q_envelope", ["Q_envelope"]),
    "eps_envelope": _law_from_decay("eps_envelope", ["eps_envelope"]),
    "LE_bounds": _law_from_decay("LE_bounds", ["LE_upper", "LE_lower"], conditional=False),
    "kbar_bound": _law_kbar,
    "origin_deviation": _law_origin,
    "curvature_decay": _law_curvature_decay,
    "ks_monotone": _law_ks_monotone,
    "energy_dissipation": _law_energy,
}


PRESETS = _preset_specs()


def overall_verdict(results: Sequence[LawResult], status: str) -> str:
    if status != "completed":
        return INCONCLUSIVE
    if any(r.status == FAIL for r in results):
        return FAIL
    if any(r.status == INCONCLUSIVE for r in results):
        return INCONCLUSIVE
    return PASS


# -- running ------------------------------------------------------------------


@dataclass
class ExperimentOutcome:
    name: str
    verdict: str
    laws: list
    status: str
    message: str
    directory: Path | None
    records: list = field(repr=False, default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]


def versions() -> dict:
    return {
        "elasticflow": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
        "pyyaml": yaml.__version__,
        "kernel_backend": kernels.BACKEND,
    }


def write_series(path, records: Sequence[DiagnosticsRecord]) -> None:
    cols = DiagnosticsRecord.columns()
    with open(path, "w", newline="") as fh:
        fh.write(SERIES_SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([v if isinstance(v, int) else "%.17g" % v for v in r.as_row()])


def read_series(path) -> list[DiagnosticsRecord]:
    with open(path) as fh:
        head = fh.readline().rstrip("\n")
        if head != SERIES_SCHEMA:
            raise ValueError(f"unsupported series schema {head!r}")
        rd = csv.DictReader(fh)
        out = []
        for row in rd:
            vals = {k: (int(v) if k == "omega" else float(v)) for k, v in row.items()}
            out.append(DiagnosticsRecord(**vals))
        return out


def _write_points(path, curve: ClosedCurve):
    np.savetxt(path, curve.points, delimiter=",", header="x,y", comments="", fmt="%.17g")


def _write_plots(d: Path, ctx: RunContext):
    d.mkdir(exist_ok=True)
    recs = ctx.records
    t = series_array(recs, "t")
    pos = t > 0
    (d / "eps.svg").write_text(svg.line_plot(
        [(t[pos], series_array(recs, "eps")[pos], "eps")], "eps(t)", "t", "eps", logx=True, logy=True))
    (d / "Q.svg").write_text(svg.line_plot(
        [(t[pos], series_array(recs, "Q")[pos], "Q")], "Q(t)", "t", "Q", logx=True, logy=True))
    L4 = series_array(recs, "L") ** 4
    w = recs[0].omega
    lines = [(t, L4, "L^4")]
    if w:
        lines.append((t, L4[0] + 32 * w**4 * math.pi**4 * t, "L(0)^4 + 32 w^4 pi^4 t"))
    (d / "length.svg").write_text(svg.line_plot(lines, "L(t)^4", "t", "L^4"))
    if w:
        (d / "circle_deviation.svg").write_text(svg.line_plot(
            [(t[pos], series_array(recs, "centered_dev")[pos], "centred"),
             (t[pos], series_array(recs, "origin_dev")[pos], "origin")],
            "deviation of eta from the circle", "t", "deviation", logx=True, logy=True))
    snaps = [(rescaled_curve(c).points, f"t={tt:.4g}") for tt, c in ctx.snapshots]
    (d / "snapshots.svg").write_text(svg.curve_plot(snaps, "rescaled curve eta = gamma / L"))


def run_experiment(spec: ExperimentSpec, out_dir=None, plots: bool = False,
                   write: bool = True) -> ExperimentOutcome:
    """Run one experiment, assert its laws and persist the artifacts."""
    base = Path(out_dir or spec.out_dir or default_out_dir())
    d = base / spec.name
    timings = {}
    t0 = time.perf_counter()
    rng = np.random.default_rng(spec.seed)
    gen = {k: v for k, v in spec.generator.items() if k not in ("kind", "N")}
    initial = make_initial_curve(spec.generator["kind"], spec.N, rng, **gen)
    timings["setup_s"] = time.perf_counter() - t0

    snaps = [(0.0, initial)]
    targets = [spec.config.t_end * (j + 1) / spec.snapshots for j in range(spec.snapshots)]

    def grab(state):
        while targets and state.t >= targets[0] * (1 - 1e-12):
            snaps.append((state.t, state.curve))
            targets.pop(0)

    t1 = time.perf_counter()
    result = run(initial, spec.config, callback=grab if spec.snapshots else None)
    timings["run_s"] = time.perf_counter() - t1
    if result.final.t > snaps[-1][0]:
        snaps.append((result.final.t, result.final.curve))
    ctx = RunContext(spec, result, initial, snaps)

    t2 = time.perf_counter()
    laws = []
    if len(result.records) == 0:
        status, message = "empty", result.message or "empty series"
    else:
        status, message = result.status, result.message
        for name in spec.laws:
            try:
                laws.append(LAWS[name](ctx))
            except (ValueError, ArithmeticError) as exc:
                laws.append(LawResult(name, INCONCLUSIVE, math.nan, math.nan, f"error: {exc}"))
    verdict = overall_verdict(laws, status)
    timings["laws_s"] = time.perf_counter() - t2

    if write:
        d.mkdir(parents=True, exist_ok=True)
        write_series(d / "series.csv", result.records)
        with open(d / "verdict.txt", "w") as fh:
            fh.write(f"verdict: {verdict}\n")
            for lr in laws:
                fh.write(lr.line() + "\n")
            if status != "completed":
                fh.write(f"run: {status} {message}\n")
        if status == "aborted":
            _write_points(d / "last_state.csv", result.final.curve)
        if plots and result.records:
            _write_plots(d / "plots", ctx)
        timings["total_s"] = time.perf_counter() - t0
        manifest = {
            "spec": spec.as_dict(),
            "versions": versions(),
            "timings": {k: round(v, 6) for k, v in timings.items()},
            "run": {
                "status": status,
                "message": message,
                "final_t": result.final.t,
                "steps": result.final.step_count,
                "rejections": result.final.rejections,
                "redistributions": result.final.redistributions,
                "records": len(result.records),
            },
            "verdict": verdict,
        }
        (d / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=False))
    timings.setdefault("total_s", time.perf_counter() - t0)
    return ExperimentOutcome(spec.name, verdict, laws, status, message,
                             d if write else None, result.records, timings)


# -- sweeps -------------------------------------------------------------------


def _sweep_worker(args):
    spec, out_dir, plots = args
    try:
        oc = run_experiment(spec, out_dir=out_dir, plots=plots)
        last = oc.records[-1] if oc.records else None
        return {
            "name": spec.name,
            "verdict": oc.verdict,
            "status": oc.status,
            "final_t": last.t if last else math.nan,
            "final_L": last.L if last else math.nan,
            "final_eps": last.eps if last else math.nan,
            "records": len(oc.records),
            "laws": {lr.name: lr.status for lr in oc.laws},
            "error": "",
        }
    except Exception as exc:  # noqa: BLE001 - summary must survive any failure
        return {"name": spec.name, "verdict": "error", "status": "error", "final_t": math.nan,
                "final_L": math.nan, "final_eps": math.nan, "records": 0, "laws": {},
                "error": f"{type(exc).__name__}: {exc}"}


def observed_orders(specs: Sequence[ExperimentSpec], rows: Sequence[dict]) -> dict:
    """Observed order in ``dt`` of the final length for each group of three or more specs.

    Uses consecutive triples ``(dt, dt/r, dt/r^2)``:
    ``p = log(|L_1 - L_2| / |L_2 - L_3|) / log r``.  Returns name -> order
    (the order is reported on the two finest members of each triple).
    """
    out = {}
    by_name = {r["name"]: r for r in rows}
    groups: dict[str, list] = {}
    for s in specs:
        if s.group:
            groups.setdefault(s.group, []).append(s)
    for members in groups.values():
        members = sorted(members, key=lambda s: -s.config.dt)
        for a, b, c in zip(members, members[1:], members[2:]):
            La, Lb, Lc = (by_name[s.name]["final_L"] for s in (a, b, c))
            r = a.config.dt / b.config.dt
            num, den = abs(La - Lb), abs(Lb - Lc)
            p = math.log(num / den) / math.log(r) if num > 0 and den > 0 else math.nan
            out[c.name] = p
            out.setdefault(b.name, p)
    return out


def sweep(specs: Sequence[ExperimentSpec], parallelism: int = 1, out_dir=None,
          plots: bool = False) -> list[dict]:
    """Run independent experiments, up to ``parallelism`` at a time, and write ``summary.csv``.

    Rows follow the input order regardless of completion order.
    """
    if not specs:
        raise ValueError("sweep needs at least one spec")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("experiment names must be unique within a sweep")
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    base = Path(out_dir or default_out_dir())
    jobs = [(s, str(base), plots) for s in specs]
    if parallelism == 1:
        rows = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            rows = list(ex.map(_sweep_worker, jobs))
    orders = observed_orders(specs, rows)
    law_names = sorted({k for r in rows for k in r["laws"]})
    cols = ["name", "verdict", "status", "final_t", "final_L", "final_eps", "records"]
    if orders:
        cols.append("observed_order")
    cols += [f"law:{n}" for n in law_names] + ["error"]
    base.mkdir(parents=True, exist_ok=True)
    with open(base / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            row = [r["name"], r["verdict"], r["status"], "%.17g" % r["final_t"],
                   "%.17g" % r["final_L"], "%.17g" % r["final_eps"], r["records"]]
            if orders:
                row.append("%.6g" % orders.get(r["name"], math.nan))
            row += [r["laws"].get(n, "") for n in law_names] + [r["error"]]
            w.writerow(row)
    for r in rows:
        if orders:
            r["observed_order"] = orders.get(r["name"], math.nan)
    return rows


# -- constants report ---------------------------------------------------------


def constants_report(omega_max: int, out_dir=None) -> tuple[Path, Path]:
    """Write ``constants.csv`` and ``constants.txt`` for ``omega = 1..omega_max``."""
    if omega_max < 1:
        raise ValueError("omega range must be non-empty")
    table = constants_table(omega_max)
    base = Path(out_dir or default_out_dir())
    base.mkdir(parents=True, exist_ok=True)
    cols = list(table[0].as_row())
    csv_path = base / "constants.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for tc in table:
            w.writerow([v if isinstance(v, (int, str)) else "%.17g" % v for v in tc.as_row().values()])
    lines = []
    for tc in table:
        lines.append(f"omega = {tc.omega}")
        for k, v in tc.as_row().items():
            if k != "omega":
                lines.append(f"  {k:16s} {v:.12g}" if isinstance(v, float) else f"  {k:16s} {v}")
        lines.append(f"  eps_one is set by the {tc.eps_one_binding} constraint")
        for k, v in tc.provenance.items():
            lines.append(f"  [{k}] {v}")
        worst = max(abs(x) for k, x in tc.residuals.items() if k != "eps_two_lhs_above")
        lines.append(f"  largest residual {worst:.3g}")
        bad = tc.invariant_violations()
        lines.append("  invariants: " + ("all hold" if not bad else "VIOLATED " + "; ".join(bad)))
    txt_path = base / "constants.txt"
    txt_path.write_text("\n".join(lines) + "\n")
    return csv_path, txt_path
