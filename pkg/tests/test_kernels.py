import math
import os
import subprocess
import sys

import numpy as np
import pytest

from tdqo import kernels
from tdqo.oracle import pv_quadrature_oracle
from tdqo.packet import chi_exponential_exact

CASES = [
    (kernels.SHAPE_EXP, (0.5,), np.linspace(-2.0, 4.0, 97)),
    (kernels.SHAPE_GAUSS, (1.0, 2.0, 0.3), np.linspace(-5.0, 5.0, 97)),
]

needs_compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")


@needs_compiled
@pytest.mark.parametrize("code, params, t", CASES)
def test_backends_agree(code, params, t):
    a, sa = kernels.chi_finite_part(code, params, t, backend="python")
    b, sb = kernels.chi_finite_part(code, params, t, backend="compiled")
    assert np.array_equal(sa, sb)
    ok = sa == kernels.STATUS_OK
    assert np.max(np.abs(a[ok] - b[ok]) / np.abs(a[ok])) < 1e-12


@needs_compiled
@pytest.mark.parametrize("code, params, t", CASES)
def test_thread_count_does_not_change_bits(code, params, t):
    one, _ = kernels.chi_finite_part(code, params, t, backend="compiled", nthreads=1)
    four, _ = kernels.chi_finite_part(code, params, t, backend="compiled", nthreads=4)
    assert np.array_equal(one, four, equal_nan=True)


def test_exponential_jump_is_flagged_singular():
    vals, status = kernels.chi_finite_part(kernels.SHAPE_EXP, (1.0,), np.array([-0.5, 0.0, 0.5]))
    assert list(status) == [0, kernels.STATUS_SINGULAR, 0]
    assert np.isnan(vals[1])
    assert np.allclose(vals[[0, 2]], chi_exponential_exact(1.0, [-0.5, 0.5]), rtol=1e-9)


@pytest.mark.parametrize("t", [-1.1, 0.0, 0.45])
def test_gaussian_against_oracle(t):
    s, f0, c = 0.8, 1.5, 0.2
    amp = (2 * math.pi * s * s) ** -0.25

    def phi(x):
        return amp * math.exp(-((x - c) ** 2) / (4 * s * s)) * complex(math.cos(2 * math.pi * f0 * x), -math.sin(2 * math.pi * f0 * x))

    ref = pv_quadrature_oracle(phi, "(1+i sgn)|t|^-3/2", t, support=(c - 14 * s, c + 14 * s), tol=1e-11)
    val, st = kernels.chi_finite_part(kernels.SHAPE_GAUSS, (s, f0, c), np.array([t]))
    assert st[0] == 0
    assert abs(val[0] - ref) < 1e-8 * abs(ref)


def test_unknown_shape_code():
    with pytest.raises(ValueError):
        kernels.chi_finite_part(7, (1.0,), np.array([0.1]))


def test_pure_python_switch():
    env = dict(os.environ, TDQO_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import tdqo; print(tdqo.BACKEND)"], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"
