"""Compare the compiled kernels with the numpy/scipy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R]
"""

import argparse
import timeit

import numpy as np

from elasticflow import kernels
from elasticflow.exact import perturbed_circle
from elasticflow.flow import FlowConfig, stiff_operator_bands


def bench(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    impls = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(impls)}")
    print(f"{'kernel':28s} {'N':>6s} " + " ".join(f"{k:>12s}" for k in impls) + "   speedup")

    for n in (256, 1024, 4096):
        curve = perturbed_circle(1, [(2, 0.05)], N=n).curve
        a, b, c, d, e = stiff_operator_bands(curve.points, 1e-4)
        c = c + 1.0
        rhs = np.random.default_rng(0).normal(size=(n, 2))
        times = {k: bench(lambda m=m: kernels.cyclic_penta_solve(a, b, c, d, e, rhs, impl=m), args.repeat)
                 for k, m in impls.items()}
        _row("cyclic_penta_solve", n, times)

        coef = np.fft.rfft(curve.points, axis=0) / n
        u = np.sort(np.random.default_rng(1).uniform(size=n))
        times = {k: bench(lambda m=m: kernels.trig_eval(coef, u, n, impl=m), args.repeat)
                 for k, m in impls.items()}
        _row("trig_eval", n, times)

    # one full order-3 step, switching the module-level implementation
    from elasticflow import flow

    for n in (256, 1024):
        curve = perturbed_circle(1, [(2, 0.05)], N=n).curve
        cfg = FlowConfig(dt=1e-5)
        times = {}
        saved = kernels._impl
        try:
            for k, m in impls.items():
                kernels._impl = m
                times[k] = bench(lambda: flow.extrapolated_step(curve.points, 1e-5, cfg), max(3, args.repeat // 4))
        finally:
            kernels._impl = saved
        _row("extrapolated_step (order 3)", n, times)


def _row(name, n, times):
    cells = " ".join(f"{times[k] * 1e3:10.3f}ms" for k in times)
    sp = times["python"] / times["cython"] if "cython" in times else float("nan")
    print(f"{name:28s} {n:6d} {cells}   {sp:6.2f}x")


if __name__ == "__main__":
    main()
