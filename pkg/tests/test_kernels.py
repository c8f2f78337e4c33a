import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elasticflow import _kernels_py, kernels


def dense_cyclic(a, b, c, d, e):
    n = len(c)
    M = np.zeros((n, n))
    for i in range(n):
        for off, v in zip((-2, -1, 0, 1, 2), (a, b, c, d, e)):
            M[i, (i + off) % n] += v[i]
    return M


def dense_banded(a, b, c, d, e):
    n = len(c)
    M = np.zeros((n, n))
    for i in range(n):
        for off, v in zip((-2, -1, 0, 1, 2), (a, b, c, d, e)):
            j = i + off
            if 0 <= j < n:
                M[i, j] = v[i]
    return M


def random_bands(rng, n, dominance=6.0):
    a, b, d, e = (rng.normal(size=n) for _ in range(4))
    c = dominance + np.abs(a) + np.abs(b) + np.abs(d) + np.abs(e)
    return a, b, c, d, e


IMPLS = sorted(kernels.backends())


@pytest.mark.parametrize("impl", IMPLS)
def test_penta_solve_matches_dense(impl, rng):
    n = 40
    bands = random_bands(rng, n)
    rhs = rng.normal(size=(n, 3))
    x = kernels.penta_solve(*bands, rhs, impl=kernels.backends()[impl])
    np.testing.assert_allclose(dense_banded(*bands) @ x, rhs, atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("n", [5, 6, 17, 128])
def test_cyclic_solve_matches_dense(impl, n, rng):
    bands = random_bands(rng, n)
    rhs = rng.normal(size=n)
    x = kernels.cyclic_penta_solve(*bands, rhs, impl=kernels.backends()[impl])
    np.testing.assert_allclose(dense_cyclic(*bands) @ x, rhs, atol=1e-12)
    np.testing.assert_allclose(kernels.cyclic_penta_matvec(*bands, x), rhs, atol=1e-12)


def test_cyclic_solve_multiple_rhs_and_shape(rng):
    bands = random_bands(rng, 32)
    rhs = rng.normal(size=(32, 2))
    x = kernels.cyclic_penta_solve(*bands, rhs)
    assert x.shape == (32, 2)
    np.testing.assert_allclose(x[:, 1], kernels.cyclic_penta_solve(*bands, rhs[:, 1]), atol=1e-13)


def test_cyclic_solve_rejects_tiny_systems():
    with pytest.raises(ValueError):
        kernels.cyclic_penta_solve(*([np.ones(4)] * 5), np.ones(4))


@pytest.mark.parametrize("n", [32, 33])
@pytest.mark.parametrize("impl", IMPLS)
def test_trig_eval_reproduces_samples_and_trig_polynomials(n, impl, rng):
    m = kernels.backends()[impl]
    u_nodes = np.arange(n) / n
    # a trigonometric polynomial resolved on the grid (no Nyquist content)
    f = lambda u: 1.5 + np.cos(2 * np.pi * 3 * u) - 0.25 * np.sin(2 * np.pi * 7 * u + 0.3)  # noqa: E731
    coef = np.fft.rfft(f(u_nodes)) / n
    np.testing.assert_allclose(kernels.trig_eval(coef, u_nodes, n, impl=m), f(u_nodes), atol=1e-13)
    u = rng.uniform(size=50)
    np.testing.assert_allclose(kernels.trig_eval(coef, u, n, impl=m), f(u), atol=1e-13)


@given(n=st.integers(16, 80), seed=st.integers(0, 2**31))
def test_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    bands = random_bands(rng, n)
    rhs = rng.normal(size=(n, 2))
    coef = np.fft.rfft(rng.normal(size=(n, 2)), axis=0) / n
    u = rng.uniform(size=20)
    outs = {}
    for name, m in kernels.backends().items():
        outs[name] = (kernels.cyclic_penta_solve(*bands, rhs, impl=m), kernels.trig_eval(coef, u, n, impl=m))
    ref = outs["python"]
    for x, y in outs.values():
        np.testing.assert_allclose(x, ref[0], atol=1e-11)
        np.testing.assert_allclose(y, ref[1], atol=1e-11)


def test_pure_python_env_forces_fallback():
    env = dict(os.environ, ELASTICFLOW_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from elasticflow import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_fallback_module_is_importable_directly():
    assert callable(_kernels_py.penta_solve) and callable(_kernels_py.trig_eval)
