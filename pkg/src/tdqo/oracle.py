"""Direct-quadrature evaluation of the singular convolutions.

This path shares no code with the spectral multipliers or the compiled
finite-part kernel and is used to validate both.  Each integral is folded
onto ``u > 0`` so the singular point becomes an endpoint::

    int K(u) f(t - u) du = int_0^inf [K(u) f(t - u) + K(-u) f(t + u)] du

and the Hadamard finite part of the ``|u|^(-3/2)`` kernels is the
ordinary integral of the subtracted integrand ``[.. - 2 f(t) ..] u^(-3/2)``.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np
from scipy import integrate, special


class QuadratureError(RuntimeError):
    """Raised when two refinement levels of the oracle disagree."""


# kernel name -> (K(+u), K(-u), power of u, subtract f(t))
_KERNELS = {
    "1/t": (1.0, -1.0, 1.0, False),
    "1/sqrt|t|": (1.0, 1.0, 0.5, False),
    "sgn/sqrt|t|": (1.0, -1.0, 0.5, False),
    "H/sqrt(t)": (1.0, 0.0, 0.5, False),
    "H(-t)/sqrt|t|": (0.0, 1.0, 0.5, False),
    "|t|^-3/2": (1.0, 1.0, 1.5, True),
    "sgn|t|^-3/2": (1.0, -1.0, 1.5, False),
    "(1+i sgn)|t|^-3/2": (1 + 1j, 1 - 1j, 1.5, True),
}
KERNELS = tuple(_KERNELS)


def _folded(fn, kernel, t):
    kp, km, power, subtract = _KERNELS[kernel]
    f_t = complex(fn(t)) if subtract else 0.0
    c = kp + km

    def g(u):
        val = kp * fn(t - u) + km * fn(t + u)
        if subtract:
            val = val - c * f_t
        return val / u**power

    return g, f_t, c, power


def _quad_complex(g, a, b, epsabs, epsrel, limit, points=None):
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    if points is not None and np.isfinite(b):
        kw["points"] = points
    # accuracy is judged by the two-level comparison in the caller
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda x: complex(g(x)).real, a, b, **kw)
        im, _ = integrate.quad(lambda x: complex(g(x)).imag, a, b, **kw)
    return complex(re, im)


def _integrate(g, power, breaks, upper, epsabs, epsrel, limit):
    """Integrate the folded integrand over ``(0, upper)`` split at ``breaks``."""
    edges = sorted({b for b in breaks if 0 < b < upper})
    first = edges[0] if edges else min(upper, 1.0)
    # u = s^2 on the first panel removes the u^(-1/2) endpoint behaviour
    total = _quad_complex(lambda s: 2.0 * s * g(s * s), 0.0, math.sqrt(first), epsabs, epsrel, limit)
    lo = first
    for hi in edges[1:] + [upper]:
        if hi <= lo:
            continue
        total += _quad_complex(g, lo, hi, epsabs, epsrel, limit)
        lo = hi
    return total


def _periodic_tail_weight(power: float, U: float, P: float):
    """``W(s) = sum_k (U + s + k P)^(-power)`` for ``0 <= s < P``.

    For ``power <= 1`` the sum diverges by an ``s``-independent amount, so
    the regularized value (Hurwitz zeta, or digamma at ``power = 1``) gives
    the right tail for zero-mean periodic integrands.
    """
    if power == 1.0:
        return lambda s: -special.digamma((U + s) / P) / P
    if power > 1.0:
        return lambda s: special.zeta(power, (U + s) / P) * P**-power
    return lambda s: float(mpmath.zeta(power, (U + s) / P)) * P**-power


def pv_quadrature_oracle(
    fn: Callable[[float], complex],
    kernel: str,
    t: float,
    *,
    breakpoints: Iterable[float] = (),
    support: Sequence[float] | None = None,
    period: float | None = None,
    tol: float = 1e-10,
) -> complex:
    """Evaluate ``int K(t') fn(t - t') dt'`` at one time by adaptive quadrature.

    Parameters
    ----------
    fn : callable
        Scalar function of time (real or complex).
    kernel : str
        One of :data:`KERNELS`.  ``"1/t"`` is a principal value, the
        ``|t|^-3/2`` kernels are Hadamard finite parts.
    t : float
        Evaluation time.
    breakpoints : iterable of float
        Times where ``fn`` jumps or kinks.
    support : (a, b), optional
        ``fn`` vanishes outside ``[a, b]``; the remaining tail is added in
        closed form.
    period : float, optional
        For periodic ``fn`` the tail beyond the first period is folded onto
        one period with a Hurwitz-zeta weight.  For the ``|t|^-1/2`` and
        ``1/t`` kernels ``fn`` must have zero mean.
    tol : float
        Relative tolerance.  Two refinement levels must agree to ``100 tol``.

    Returns
    -------
    complex

    Raises
    ------
    QuadratureError
        If the refinement levels disagree.
    """
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    g, f_t, c, power = _folded(fn, kernel, t)
    breaks = [abs(t - b) for b in breakpoints if abs(t - b) > 0]

    if support is not None:
        a, b = support
        upper = max(t - a, b - t, 0.0)
        breaks += [abs(t - a), abs(t - b)]
        tail = 0.0
        if power == 1.5 and c != 0:
            tail = -c * f_t * 2.0 / math.sqrt(upper) if upper > 0 else 0.0
        if upper == 0:
            return complex(tail)

        def run(epsrel, limit):
            return _integrate(g, power, breaks, upper, epsrel * 1e-3, epsrel, limit) + tail

    elif period is not None:
        upper = max(breaks + [period])

        kp, km = _KERNELS[kernel][:2]
        sub_tail = -c * f_t * 2.0 / math.sqrt(upper) if power == 1.5 and c != 0 else 0.0
        weight = _periodic_tail_weight(power, upper, period)

        def osc(s):
            # one period of the unsubtracted integrand times the summed kernel
            return (kp * fn(t - upper - s) + km * fn(t + upper + s)) * weight(s)

        def run(epsrel, limit):
            head = _integrate(g, power, breaks, upper, epsrel * 1e-3, epsrel, limit)
            tail = _quad_complex(osc, 0.0, period, epsrel * 1e-3, epsrel, limit)
            return head + tail + sub_tail

    else:
        upper = max(breaks + [1.0])

        def run(epsrel, limit):
            head = _integrate(g, power, breaks, upper, epsrel * 1e-3, epsrel, limit)
            tail = _quad_complex(g, upper, np.inf, epsrel * 1e-3, epsrel, limit)
            return head + tail

    coarse = run(tol * 10, 200)
    fine = run(tol, 500)
    scale = max(abs(fine), 1e-300)
    if abs(fine - coarse) > 100 * tol * max(scale, 1.0):
        raise QuadratureError(
            f"oracle did not converge at t={t}: levels differ by {abs(fine - coarse):.3g}"
        )
    return fine
