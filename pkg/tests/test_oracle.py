import math

import pytest
from scipy import special

from tdqo.oracle import KERNELS, QuadratureError, pv_quadrature_oracle
from tdqo.packet import chi_exponential_exact


def gauss(t):
    return math.exp(-t * t)


@pytest.mark.parametrize("t", [-1.3, 0.0, 0.4, 2.0])
def test_pv_of_gaussian_is_dawson(t):
    # PV int exp(-(t-u)^2)/u du = 2 sqrt(pi) D(t)
    val = pv_quadrature_oracle(gauss, "1/t", t, support=(-12, 12))
    assert val == pytest.approx(2 * math.sqrt(math.pi) * special.dawsn(t), abs=1e-10)


def test_half_order_at_origin_is_gamma_quarter():
    val = pv_quadrature_oracle(gauss, "1/sqrt|t|", 0.0, support=(-12, 12))
    assert val == pytest.approx(special.gamma(0.25), rel=1e-10)


def test_finite_part_at_origin_is_gamma_minus_quarter():
    # 2 int_0^inf (exp(-u^2) - 1) u^(-3/2) du = Gamma(-1/4)
    val = pv_quadrature_oracle(gauss, "|t|^-3/2", 0.0, support=(-12, 12))
    assert val == pytest.approx(special.gamma(-0.25), rel=1e-9)


def test_odd_kernels_vanish_on_even_input_at_origin():
    for k in ("1/t", "sgn/sqrt|t|", "sgn|t|^-3/2"):
        assert abs(pv_quadrature_oracle(gauss, k, 0.0, support=(-12, 12))) < 1e-12


def test_forward_plus_backward_is_even():
    t = 0.3
    f = pv_quadrature_oracle(gauss, "H/sqrt(t)", t, support=(-12, 12))
    b = pv_quadrature_oracle(gauss, "H(-t)/sqrt|t|", t, support=(-12, 12))
    e = pv_quadrature_oracle(gauss, "1/sqrt|t|", t, support=(-12, 12))
    assert f + b == pytest.approx(e, rel=1e-9)


@pytest.mark.parametrize(
    "t, ref",
    [(0.1, -8.0971 - 3.3284j), (-0.1, 4.3434 - 4.3434j), (1.0, -2.0708 + 0.9699j)],
)
def test_exponential_chi_frozen_values(t, ref):
    fn = lambda x: math.exp(-x / 2) if x > 0 else 0.0
    val = pv_quadrature_oracle(fn, "(1+i sgn)|t|^-3/2", t, breakpoints=[0.0], support=(0, 80), tol=1e-11)
    assert abs(val - ref) < 1e-4
    assert abs(val - chi_exponential_exact(1.0, t)) < 1e-9 * abs(val)


F0 = 2.5


@pytest.mark.parametrize(
    "kernel, expect",
    [
        ("1/t", lambda t: math.pi * math.sin(2 * math.pi * F0 * t)),
        ("1/sqrt|t|", lambda t: math.cos(2 * math.pi * F0 * t) / math.sqrt(F0)),
        ("sgn/sqrt|t|", lambda t: math.sin(2 * math.pi * F0 * t) / math.sqrt(F0)),
        ("|t|^-3/2", lambda t: -4 * math.pi * math.sqrt(F0) * math.cos(2 * math.pi * F0 * t)),
        ("sgn|t|^-3/2", lambda t: 4 * math.pi * math.sqrt(F0) * math.sin(2 * math.pi * F0 * t)),
    ],
)
def test_periodic_tail_matches_multiplier(kernel, expect):
    fn = lambda t: math.cos(2 * math.pi * F0 * t)
    for t in (0.0, 0.11, 0.37):
        val = pv_quadrature_oracle(fn, kernel, t, period=1 / F0)
        assert val.real == pytest.approx(expect(t), abs=1e-8)


def test_unknown_kernel():
    with pytest.raises(ValueError):
        pv_quadrature_oracle(gauss, "1/t^2", 0.0)
    assert "1/t" in KERNELS and len(KERNELS) == 8


def test_quadrature_error_is_runtime_error():
    assert issubclass(QuadratureError, RuntimeError)
