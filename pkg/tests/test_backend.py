import os
import subprocess
import sys

import numpy as np
import pytest

from orliczsketch import _backend
from orliczsketch.orlicz import make_orlicz

FAMILIES = [("power", 1.0), ("power", 1.5), ("power", 2.0), ("huber", 0.75),
            ("l1l2", None), ("fair", 1.0), ("l15", 0.25)]

try:
    CY = _backend.load("cython")
except ImportError:
    CY = None
PY = _backend.load("python")

needs_ext = pytest.mark.skipif(CY is None, reason="compiled extension not built")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.load("fortran")


def test_env_var_forces_python_backend():
    env = dict(os.environ, ORLICZSKETCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import orliczsketch; print(orliczsketch.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
@pytest.mark.parametrize("kind,param", FAMILIES)
def test_norm_and_gradient_agree(kind, param):
    args = make_orlicz(kind, param).kernel_args
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.standard_cauchy(rng.integers(1, 60))
        a = CY.orlicz_norm(x, *args)
        b = PY.orlicz_norm(x, *args)
        assert a == pytest.approx(b, rel=1e-14)
        ga, va = CY.orlicz_norm_grad(x, *args)
        gb, vb = PY.orlicz_norm_grad(x, *args)
        assert ga == pytest.approx(gb, rel=1e-14)
        assert np.allclose(va, vb, rtol=1e-12, atol=1e-15)


@needs_ext
def test_countsketch_agree():
    rng = np.random.default_rng(1)
    n, d, t = 500, 4, 37
    A = rng.standard_normal((n, d))
    bucket = rng.integers(0, t, n).astype(np.int64)
    weight = rng.standard_normal(n)
    dense_cy = CY.countsketch_dense(np.ascontiguousarray(A), bucket, weight, t)
    dense_py = PY.countsketch_dense(A, bucket, weight, t)
    assert np.allclose(dense_cy, dense_py, rtol=1e-14, atol=1e-14)
    r, c = np.nonzero(A > 0.5)
    r, c = r.astype(np.int64), c.astype(np.int64)
    v = np.ascontiguousarray(A[r, c])
    assert np.allclose(CY.countsketch_coo(r, c, v, bucket, weight, t, d),
                       PY.countsketch_coo(r, c, v, bucket, weight, t, d), rtol=1e-14, atol=1e-14)
