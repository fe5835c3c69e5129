import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from khmgof import _kernels_py, kernels

try:
    from khmgof import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == "cython"


def test_environment_forces_fallback():
    code = "import khmgof.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"KHMGOF_PURE_PYTHON": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"


def _brute_transform(counts, H, G):
    m = len(counts)
    values, left = np.empty(m), np.empty(m)
    for k in range(m):
        A = sum(counts[j] * (1 - H[j] @ G[j]) for j in range(k + 1))
        B = sum((counts[j] * H[j] for j in range(k + 1, m)), np.zeros(H.shape[1]))
        values[k] = A - B @ G[k]
        Ap = A - counts[k] * (1 - H[k] @ G[k])
        left[k] = Ap - (B + counts[k] * H[k]) @ G[k]
    return values, left


@pytest.mark.parametrize("d", [2, 3])
def test_transform_sums_against_brute_force(d):
    rng = np.random.default_rng(5)
    counts = rng.integers(1, 3, 12).astype(float)
    H, G = rng.normal(size=(12, d)), rng.normal(size=(12, d))
    ref = _brute_transform(counts, H, G)
    for mod in filter(None, [_kernels_py, _ckernels]):
        v, lv = mod.transform_sums(counts, H, G)
        np.testing.assert_allclose(v, ref[0], rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(lv, ref[1], rtol=1e-12, atol=1e-12)


def test_boxcar_against_brute_force():
    rng = np.random.default_rng(1)
    x = np.sort(rng.uniform(0, 2, 60))
    x[10] = x[11]  # tie
    y = rng.normal(size=60)
    a = 0.1
    ref = np.array([y[np.abs(x - xi) <= a].mean() for xi in x])
    np.testing.assert_allclose(_kernels_py.boxcar_smooth(x, y, a), ref, rtol=1e-12)


def test_bridge_integral_against_loop():
    rng = np.random.default_rng(2)
    n = 200
    inc = rng.normal(size=n) / np.sqrt(n)
    w = np.concatenate([[0.0], np.cumsum(inc)])
    t = np.arange(n + 1) / n
    keeps = np.array([0, 50, 199])
    out = _kernels_py.bridge_ratio_integral(inc, 1.0 / n, keeps)
    u = w - t * w[-1]
    g = (u[:n] / (1 - t[:n])) ** 2
    expect = [np.trapezoid(g[: k + 1], dx=1.0 / n) if k else 0.0 for k in keeps]
    np.testing.assert_allclose(out, expect, rtol=1e-12, atol=1e-15)


@needs_c
@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 80), a=st.floats(0.001, 1.0), seed=st.integers(0, 2**32 - 1))
def test_compiled_kernels_match_fallback(n, a, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(np.round(rng.uniform(0, 2, n), 2))  # rounding creates ties
    y = rng.normal(size=n)
    np.testing.assert_allclose(_ckernels.boxcar_smooth(x, y, a), _kernels_py.boxcar_smooth(x, y, a),
                               rtol=1e-12, atol=1e-14)
    counts = rng.integers(1, 4, n).astype(float)
    H, G = rng.normal(size=(n, 3)), rng.normal(size=(n, 3))
    for c, p in zip(_ckernels.transform_sums(counts, H, G), _kernels_py.transform_sums(counts, H, G)):
        np.testing.assert_allclose(c, p, rtol=1e-10, atol=1e-10)
    v, lv = rng.normal(size=n), rng.normal(size=n)
    assert _ckernels.path_abs_max(v, lv) == _kernels_py.path_abs_max(v, lv)
    m = 4 * n + 8
    inc = rng.normal(size=m) / np.sqrt(m)
    keeps = np.unique(rng.integers(0, m, 3))
    np.testing.assert_allclose(_ckernels.bridge_ratio_integral(inc, 1.0 / m, keeps),
                               _kernels_py.bridge_ratio_integral(inc, 1.0 / m, keeps), rtol=1e-9, atol=1e-14)
