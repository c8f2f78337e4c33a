import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest
import yaml

from elasticflow import cli
from elasticflow.constants import theory_constants
from elasticflow.experiment import (
    EXIT_CODES,
    INCONCLUSIVE,
    OUT_ENV,
    PASS,
    PRESETS,
    SERIES_SCHEMA,
    ExperimentSpec,
    constants_report,
    dt_refinement_specs,
    load_specs,
    preset,
    read_series,
    run_experiment,
    sweep,
)
from elasticflow.flow import FlowConfig
from elasticflow.svg import curve_plot, line_plot


def short_circle(name="circle-short", t_end=0.5, **kw):
    return ExperimentSpec(
        name,
        {"kind": "circle", "omega": 1, "rho0": 1.0, "N": 64},
        FlowConfig(t_end=t_end, dt=1e-4, cfl=4e-3),
        laws=["circle_radius", "energy_dissipation"],
        **kw,
    )


def random_phase(name="rp"):
    return ExperimentSpec(
        name,
        {"kind": "perturbed_circle", "omega": 1, "N": 64,
         "modes": [{"m": 3, "a": 0.01, "phase": "random"}]},
        FlowConfig(t_end=0.01, dt=1e-5),
        seed=11,
    )


# -- specs ---------------------------------------------------------------------------


def test_spec_yaml_round_trip():
    for spec in list(PRESETS.values()) + [random_phase()]:
        again = ExperimentSpec.from_yaml(spec.to_yaml())
        assert again == spec
        assert again.to_yaml() == spec.to_yaml()


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("x", {"kind": "circle"}, laws=["nope"])
    with pytest.raises(ValueError):
        ExperimentSpec("", {"kind": "circle"})
    with pytest.raises(ValueError):
        ExperimentSpec("a/b", {"kind": "circle"})
    with pytest.raises(ValueError):
        ExperimentSpec("x", {"omega": 1})
    with pytest.raises(KeyError):
        preset("no-such-preset")


def test_overrides():
    s = preset("stability-w1").with_overrides(nodes=64, t_end=2.0, dt=1e-3)
    assert s.N == 64 and s.generator["N"] == 64
    assert s.config.t_end == 2.0 and s.config.dt == 1e-3
    assert preset("stability-w1").config.t_end == 100.0


def test_load_specs_forms(tmp_path):
    a, b = short_circle("a"), short_circle("b")
    (tmp_path / "one.yaml").write_text(a.to_yaml())
    (tmp_path / "many.yml").write_text(yaml.safe_dump({"experiments": [b.as_dict()]}))
    (tmp_path / "ignored.txt").write_text("x")
    specs = load_specs(tmp_path)
    assert [s.name for s in specs] == ["b", "a"]  # sorted by file name
    assert load_specs(tmp_path / "one.yaml") == [a]


# -- single runs ---------------------------------------------------------------------


def test_short_circle_run_artifacts(tmp_path):
    spec = short_circle()
    oc = run_experiment(spec, out_dir=tmp_path, plots=True)
    assert oc.verdict == PASS and oc.exit_code == 0
    d = tmp_path / spec.name
    for f in ("manifest.yaml", "series.csv", "verdict.txt"):
        assert (d / f).exists()
    assert (d / "verdict.txt").read_text().startswith("verdict: pass")
    assert (d / "series.csv").read_text().splitlines()[0] == SERIES_SCHEMA

    recs = read_series(d / "series.csv")
    assert recs == oc.records
    t = np.array([r.t for r in recs])
    assert np.all(np.diff(t) > 0)

    assert ExperimentSpec.from_manifest(d / "manifest.yaml") == spec
    assert load_specs(d / "manifest.yaml") == [spec]
    man = yaml.safe_load((d / "manifest.yaml").read_text())
    assert man["verdict"] == "pass" and "numpy" in man["versions"]

    svgs = sorted((d / "plots").glob("*.svg"))
    assert {p.name for p in svgs} >= {"eps.svg", "Q.svg", "length.svg", "snapshots.svg"}
    for p in svgs:
        assert ET.parse(p).getroot().tag.endswith("svg")


def test_series_bit_identical_on_rerun(tmp_path):
    for spec in (short_circle(), random_phase()):
        run_experiment(spec, out_dir=tmp_path / "1")
        run_experiment(spec, out_dir=tmp_path / "2")
        a = (tmp_path / "1" / spec.name / "series.csv").read_bytes()
        b = (tmp_path / "2" / spec.name / "series.csv").read_bytes()
        assert a == b


def test_seed_changes_random_phase(tmp_path):
    from dataclasses import replace

    a = run_experiment(random_phase(), write=False).records[0]
    b = run_experiment(replace(random_phase(), seed=12), write=False).records[0]
    assert a.eps != b.eps or a.cx != b.cx


def test_zero_horizon_is_inconclusive(tmp_path):
    oc = run_experiment(short_circle(t_end=0.0), out_dir=tmp_path)
    assert oc.records == [] and oc.status == "empty"
    assert oc.verdict == INCONCLUSIVE and oc.exit_code == EXIT_CODES[INCONCLUSIVE] == 2


def test_abort_dumps_last_state(tmp_path):
    from dataclasses import replace

    spec = short_circle()
    spec = replace(spec, config=replace(spec.config, max_steps=3))
    oc = run_experiment(spec, out_dir=tmp_path)
    assert oc.status == "aborted" and oc.verdict == INCONCLUSIVE
    pts = np.loadtxt(tmp_path / spec.name / "last_state.csv", delimiter=",", skiprows=1)
    assert pts.shape == (64, 2)
    assert "run: aborted" in (tmp_path / spec.name / "verdict.txt").read_text()


def test_read_series_rejects_unknown_schema(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("# other v9\nt\n")
    with pytest.raises(ValueError):
        read_series(p)


def test_svg_helpers_parse():
    x = np.linspace(1, 10, 20)
    for doc in (line_plot([(x, x**2, "a"), (x, x, "b")], "t", "x", "y", logx=True, logy=True),
                line_plot([], "empty"),
                curve_plot([(np.c_[np.cos(x), np.sin(x)], "c")], "curve")):
        assert ET.fromstring(doc).tag.endswith("svg")


# -- sweeps --------------------------------------------------------------------------


def _summary(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_sweep_parallel_matches_serial(tmp_path):
    specs = [short_circle("c1"), short_circle("c2", t_end=0.2), random_phase("r1")]
    rows1 = sweep(specs, parallelism=1, out_dir=tmp_path / "s")
    rows2 = sweep(specs, parallelism=3, out_dir=tmp_path / "p")
    assert [r["name"] for r in rows1] == ["c1", "c2", "r1"]
    assert _summary(tmp_path / "s" / "summary.csv") == _summary(tmp_path / "p" / "summary.csv")
    assert rows1 == rows2


def test_sweep_dt_refinement_order(tmp_path):
    specs = dt_refinement_specs()
    assert len({s.group for s in specs}) >= 1 and len(specs) >= 3
    rows = sweep(specs, parallelism=2, out_dir=tmp_path)
    head, *body = _summary(tmp_path / "summary.csv")
    col = head.index("observed_order")
    orders = [float(r[col]) for r in body if r[col] != "nan"]
    assert orders and min(orders) >= 1.0
    assert all(r["verdict"] == PASS for r in rows)


def test_sweep_without_laws_has_no_law_columns(tmp_path):
    sweep([random_phase("r1")], out_dir=tmp_path)
    head = _summary(tmp_path / "summary.csv")[0]
    assert not any(h.startswith("law:") for h in head)
    assert "observed_order" not in head


def test_sweep_errors_and_error_rows(tmp_path):
    with pytest.raises(ValueError):
        sweep([], out_dir=tmp_path)
    with pytest.raises(ValueError):
        sweep([short_circle("a"), short_circle("a")], out_dir=tmp_path)
    with pytest.raises(ValueError):
        sweep([short_circle("a")], parallelism=0, out_dir=tmp_path)
    bad = ExperimentSpec("bad", {"kind": "spiral", "N": 64})
    rows = sweep([bad, short_circle("ok")], out_dir=tmp_path)
    assert rows[0]["verdict"] == "error" and rows[0]["error"]
    assert rows[1]["verdict"] == PASS
    body = _summary(tmp_path / "summary.csv")
    assert len(body) == 3 and body[1][1] == "error"


# -- constants report and CLI ------------------------------------------------------------


def test_constants_report(tmp_path):
    csv_path, txt_path = constants_report(5, out_dir=tmp_path)
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["omega"]) for r in rows] == [1, 2, 3, 4, 5]
    es = [float(r["eps_star"]) for r in rows]
    assert es[0] == pytest.approx(9.46e-4, rel=1e-3)
    assert all(b < a for a, b in zip(es, es[1:]))
    for r in rows:
        assert float(r["eps_two"]) < float(r["eps_one"]) <= float(r["eps_star"])
    txt = txt_path.read_text()
    assert "eps_one is set by the" in txt and "VIOLATED" not in txt
    assert float(rows[0]["eps_two"]) == pytest.approx(theory_constants(1).eps_two, rel=1e-15)
    with pytest.raises(ValueError):
        constants_report(0, out_dir=tmp_path)


def test_cli_constants(tmp_path, capsys):
    assert cli.main(["constants", "--omega-max", "2", "--out", str(tmp_path)]) == 0
    assert "omega = 2" in capsys.readouterr().out
    assert (tmp_path / "constants.csv").exists()


def test_cli_simulate_file_with_overrides(tmp_path, capsys):
    spec_file = tmp_path / "c.yaml"
    spec_file.write_text(short_circle(t_end=5.0).to_yaml())
    code = cli.main(["simulate", str(spec_file), "--t-end", "0.3", "--nodes", "32",
                     "--out", str(tmp_path / "o")])
    assert code == 0
    man = yaml.safe_load((tmp_path / "o" / "circle-short" / "manifest.yaml").read_text())
    assert man["spec"]["config"]["t_end"] == 0.3 and man["spec"]["config"]["N"] == 32
    assert "circle-short: pass" in capsys.readouterr().out


def test_cli_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    spec_file = tmp_path / "c.yaml"
    spec_file.write_text(short_circle(t_end=0.1).to_yaml())
    assert cli.main(["simulate", str(spec_file)]) == 0
    assert (tmp_path / "env" / "circle-short" / "series.csv").exists()


def test_cli_zero_horizon_and_unknown_preset(tmp_path, capsys):
    spec_file = tmp_path / "c.yaml"
    spec_file.write_text(short_circle().to_yaml())
    assert cli.main(["simulate", str(spec_file), "--t-end", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["simulate", "no-such-preset", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_sweep(tmp_path, capsys):
    d = tmp_path / "specs"
    d.mkdir()
    for name in ("a", "b"):
        (d / f"{name}.yaml").write_text(short_circle(name, t_end=0.1).to_yaml())
    assert cli.main(["sweep", str(d), "--parallel", "2", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "summary.csv").exists()
