import numpy as np
import pytest

from eqmeasure import _kernels_py as py
from eqmeasure import kernels

ck = pytest.importorskip("eqmeasure._ckernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_hyp2f1_series_agrees():
    z = np.linspace(-0.9, 0.9, 17)
    a, n_a, last_a = py.hyp2f1_series(0.3, -1.7, 2.2, z, 500, 1e-16)
    b, n_b, last_b = ck.hyp2f1_series(0.3, -1.7, 2.2, z, 500, 1e-16)
    assert np.allclose(a, b, rtol=1e-14, atol=0)
    assert n_a == n_b


def test_column_recurrence_agrees():
    rng = np.random.default_rng(0)
    c0, c1 = rng.standard_normal(20), rng.standard_normal(20)
    for shift, sign in ((0.0, 1.0), (3.0, -1.0)):
        a = py.column_recurrence(c0, c1, 12, 0.3, 2.5, shift, sign)
        b = ck.column_recurrence(c0, c1, 12, 0.3, 2.5, shift, sign)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(a)))


def test_miller_ratios_agree():
    x = np.array([-4.0, -1.5, 1.2, 3.0])
    a = py.miller_ratios(x, 10, 80, 0.195, 1.61)
    b = ck.miller_ratios(x, 10, 80, 0.195, 1.61)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_pairwise_force_agrees():
    x = np.sort(np.random.default_rng(1).uniform(-1, 1, 700))
    a = py.pairwise_force(x, 4.0, 1.61)
    b = ck.pairwise_force(x, 4.0, 1.61)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-13)
    assert abs(a.sum()) < 1e-12


def test_environment_forces_fallback():
    import os
    import subprocess
    import sys

    env = {**os.environ, "EQMEASURE_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "from eqmeasure.kernels import BACKEND; print(BACKEND)"], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
