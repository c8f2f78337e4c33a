"""Pure numpy/scipy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np
from scipy.linalg import solve_banded


def penta_solve(a, b, c, d, e, rhs):
    """Solve a (non-cyclic) pentadiagonal system; same layout as the compiled kernel."""
    n = len(c)
    ab = np.zeros((5, n))
    ab[0, 2:] = e[:-2]
    ab[1, 1:] = d[:-1]
    ab[2] = c
    ab[3, :-1] = b[1:]
    ab[4, :-2] = a[2:]
    return solve_banded((2, 2), ab, np.asarray(rhs, dtype=float), check_finite=False)


def trig_eval(coef, u, n):
    """Evaluate ``rfft(f)/n`` trigonometric interpolants at parameters ``u``."""
    coef = np.asarray(coef, dtype=complex)
    squeeze = coef.ndim == 1
    cf = coef.reshape(coef.shape[0], -1)
    nh = cf.shape[0] - 1
    weights = np.full(nh + 1, 2.0)
    weights[0] = 1.0
    if n % 2 == 0 and nh > 0:
        weights[nh] = 1.0
    phase = np.exp(2j * np.pi * np.outer(np.asarray(u, dtype=float), np.arange(nh + 1)))
    out = (phase * weights) @ cf
    out = out.real
    return out[:, 0] if squeeze else out
