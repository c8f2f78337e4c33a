"""Command line interface: ``elasticflow {simulate,sweep,constants,verify-all}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiment import (
    EXIT_CODES,
    OUT_ENV,
    PRESETS,
    constants_report,
    default_out_dir,
    load_specs,
    preset,
    run_experiment,
    sweep,
)


def _specs_from(target: str):
    p = Path(target)
    if p.exists():
        return load_specs(p)
    return [preset(target)]


def _override(specs, args):
    return [s.with_overrides(nodes=args.nodes, t_end=args.t_end, dt=args.dt) for s in specs]


def cmd_simulate(args) -> int:
    specs = _override(_specs_from(args.spec), args)
    worst = 0
    for spec in specs:
        oc = run_experiment(spec, out_dir=args.out, plots=args.plots)
        print(f"{spec.name}: {oc.verdict} ({oc.status}, {len(oc.records)} records, "
              f"{oc.timings.get('total_s', 0):.1f}s) -> {oc.directory}")
        for lr in oc.laws:
            print("  " + lr.line())
        worst = max(worst, oc.exit_code)
    return worst


def cmd_sweep(args) -> int:
    specs = _override(load_specs(args.dir), args)
    rows = sweep(specs, parallelism=args.parallel, out_dir=args.out, plots=args.plots)
    out = Path(args.out or default_out_dir())
    for r in rows:
        extra = f" order={r['observed_order']:.3g}" if "observed_order" in r else ""
        print(f"{r['name']}: {r['verdict']}{extra}")
    print(f"summary: {out / 'summary.csv'}")
    codes = [EXIT_CODES.get(r["verdict"], 1) for r in rows]
    return max(codes)


def cmd_constants(args) -> int:
    csv_path, txt_path = constants_report(args.omega_max, out_dir=args.out)
    print(txt_path.read_text(), end="")
    print(f"table: {csv_path}")
    return 0


def cmd_verify_all(args) -> int:
    from .acceptance import run_all

    results = run_all()
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="elasticflow",
        description="Simulate the free elastic flow of closed planar curves and check it "
                    "against closed forms and stability estimates.",
        epilog=f"Output goes to --out, else ${OUT_ENV}, else ./runs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--nodes", type=int, help="override the node count N")
        sp.add_argument("--t-end", type=float, help="override the final time")
        sp.add_argument("--dt", type=float, help="override the (initial) time step")
        sp.add_argument("--plots", action="store_true", help="write SVG plots")

    sp = sub.add_parser("simulate", help="run one spec file or preset")
    sp.add_argument("spec", help=f"YAML spec file or preset ({', '.join(sorted(PRESETS))})")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run every spec in a directory")
    sp.add_argument("dir", help="directory (or file) of YAML specs")
    sp.add_argument("--parallel", type=int, default=1, help="worker processes")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("constants", help="tabulate the stability constants")
    sp.add_argument("--omega-max", type=int, default=5)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("verify-all", help="run the acceptance suite")
    sp.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
