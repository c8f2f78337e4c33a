"""Backend selection for the hot kernels.

The compiled extension ``elasticflow._kernels`` is used when it was built;
otherwise the numpy/scipy versions in ``_kernels_py`` take over.  Setting
``ELASTICFLOW_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("ELASTICFLOW_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def backends():
    """Return the available kernel implementations keyed by name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def penta_solve(a, b, c, d, e, rhs, impl=None):
    impl = impl or _impl
    return impl.penta_solve(
        *(np.ascontiguousarray(x, dtype=float) for x in (a, b, c, d, e)), rhs
    )


def cyclic_penta_solve(a, b, c, d, e, rhs, impl=None):
    """Solve a cyclic pentadiagonal system ``M x = rhs``.

    Row ``i`` of ``M`` is ``a[i] x[i-2] + b[i] x[i-1] + c[i] x[i]
    + d[i] x[i+1] + e[i] x[i+2]`` with indices taken modulo ``n``.  The six
    wrap-around entries are split off as a rank-4 correction and handled with
    the Woodbury identity around one banded solve.
    """
    a, b, c, d, e = (np.asarray(x, dtype=float) for x in (a, b, c, d, e))
    n = len(c)
    if n < 5:
        raise ValueError("cyclic pentadiagonal solve needs n >= 5")
    rhs = np.asarray(rhs, dtype=float)
    squeeze = rhs.ndim == 1
    R = rhs.reshape(n, -1)
    m = R.shape[1]

    idx = (0, 1, n - 2, n - 1)
    U = np.zeros((n, 4))
    U[idx, range(4)] = 1.0
    V = np.zeros((4, n))
    V[0, n - 2], V[0, n - 1] = a[0], b[0]
    V[1, n - 1] = a[1]
    V[2, 0] = e[n - 2]
    V[3, 0], V[3, 1] = d[n - 1], e[n - 1]

    sol = penta_solve(a, b, c, d, e, np.hstack([R, U]), impl=impl)
    z, Z = sol[:, :m], sol[:, m:]
    cap = np.eye(4) + V @ Z
    x = z - Z @ np.linalg.solve(cap, V @ z)
    return x[:, 0] if squeeze else x


def cyclic_penta_matvec(a, b, c, d, e, x):
    """Apply the cyclic pentadiagonal matrix to ``x`` (``(n,)`` or ``(n, m)``)."""
    x = np.asarray(x, dtype=float)
    col = (lambda v: v[:, None]) if x.ndim == 2 else (lambda v: v)
    return (
        col(a) * np.roll(x, 2, axis=0)
        + col(b) * np.roll(x, 1, axis=0)
        + col(c) * x
        + col(d) * np.roll(x, -1, axis=0)
        + col(e) * np.roll(x, -2, axis=0)
    )


def trig_eval(coef, u, n, impl=None):
    """Evaluate real trigonometric interpolants (``rfft(f)/n``) at points ``u``."""
    impl = impl or _impl
    return impl.trig_eval(coef, np.ascontiguousarray(u, dtype=float), int(n))
