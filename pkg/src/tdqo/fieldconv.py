"""Classical voltage traces to time-domain quadratures and photon flux.

With the half-order multipliers of :mod:`tdqo.transforms`::

    p~(f) = sqrt(2/Zh) v~(f) / sqrt|f|
    q~(f) = sqrt(2/Zh) i sgn(f) v~(f) / sqrt|f|

so ``q`` is ``(1/pi)`` times the bare-kernel Hilbert transform of ``p``
(calibrated sign :data:`HILBERT_PAIR_SIGN`).  The flux is
``n = (q^2 + p^2) / 2``.

Traces are treated as one period of a periodic signal by default
(``pad=1``).  The half-order kernels decay slowly, so the outer
:data:`EDGE_FRACTION` of the window on each side is masked as unreliable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .transforms import (
    PhysConsts,
    Signal,
    _apply_multiplier,
    half_order_convolve,
    hilbert_paper,
)

EDGE_FRACTION = 0.10
HILBERT_PAIR_SIGN = 1


class MaskMismatchWarning(UserWarning):
    """The two quadratures carry different validity masks."""


def edge_mask(n: int, fraction: float = EDGE_FRACTION) -> np.ndarray:
    """Boolean mask that drops ``ceil(fraction * n)`` samples at each end."""
    k = int(math.ceil(fraction * n))
    m = np.ones(n, dtype=bool)
    if k:
        m[:k] = False
        m[n - k :] = False
    return m


@dataclass(frozen=True)
class QuadraturePair:
    p: Signal
    q: Signal
    consts: PhysConsts
    valid: np.ndarray

    def __post_init__(self):
        if self.p.grid != self.q.grid:
            raise ValueError("p and q must share a grid")
        v = np.asarray(self.valid, dtype=bool)
        if v.shape != (self.p.grid.n,):
            raise ValueError("mask length does not match the grid")
        object.__setattr__(self, "valid", v)


@dataclass(frozen=True)
class FluxTrace:
    n: Signal
    valid: np.ndarray


def quadratures_from_voltage(v: Signal, consts: PhysConsts = PhysConsts(), *, pad: int = 1) -> QuadraturePair:
    """Time-domain quadratures of a real voltage trace.

    Examples
    --------
    >>> from tdqo.transforms import TimeGrid
    >>> g = TimeGrid(256, 1 / 256)
    >>> pair = quadratures_from_voltage(Signal(g, np.cos(2 * np.pi * 8 * g.t), "volts"))
    >>> bool(np.allclose(pair.q.samples, np.sin(2 * np.pi * 8 * g.t) * np.sqrt(2 / 8)))
    True
    """
    if not v.is_real(1e-12):
        raise ValueError("voltage trace must be real")
    x = Signal(v.grid, np.real(np.asarray(v.samples)), v.unit)
    k = math.sqrt(2.0 / (consts.Z * consts.h))
    p = half_order_convolve(x, "even", pad=pad, unit="volts-sqrt-second")
    q = half_order_convolve(x, "odd", pad=pad, unit="volts-sqrt-second")
    return QuadraturePair(
        p.with_samples(k * np.asarray(p.samples)),
        q.with_samples(k * np.asarray(q.samples)),
        consts,
        edge_mask(v.grid.n),
    )


def voltage_from_quadratures(pair: QuadraturePair, consts: PhysConsts | None = None, *, pad: int = 1) -> Signal:
    """Invert :func:`quadratures_from_voltage`.

    Spectrally ``v~ = sqrt(Zh/2) sqrt|f| (p~ - i sgn q~) / (1 + sgn^2)``,
    which on ``f != 0`` is the kernel
    ``-sqrt(Zh/2) / (8 pi |t'|^(3/2)) [sgn(t') q(t - t') + p(t - t')]``
    read as a finite part (see :func:`kernel_form_voltage`).
    """
    c = consts or pair.consts
    if np.any(pair.valid != edge_mask(pair.p.grid.n)):
        warnings.warn("quadrature masks disagree with the standard edge mask", MaskMismatchWarning, stacklevel=2)
    k = math.sqrt(c.Z * c.h / 2.0)
    p = np.asarray(pair.p.samples, dtype=float)
    q = np.asarray(pair.q.samples, dtype=float)

    def mult_p(g):
        return k * np.sqrt(np.abs(g.f)) / (1.0 + g.sgn**2)

    def mult_q(g):
        return -1j * g.sgn * k * np.sqrt(np.abs(g.f)) / (1.0 + g.sgn**2)

    vp = _apply_multiplier(Signal(pair.p.grid, p), mult_p, pad, "volts")
    vq = _apply_multiplier(Signal(pair.q.grid, q), mult_q, pad, "volts")
    return Signal(pair.p.grid, np.asarray(vp.samples) + np.asarray(vq.samples), "volts")


def kernel_form_voltage(p_fn, q_fn, t: float, consts: PhysConsts = PhysConsts(), **oracle_kw) -> float:
    """Voltage at one time from the singular kernel form, by direct quadrature.

    ``p_fn`` and ``q_fn`` are scalar callables; extra keywords go to
    :func:`tdqo.oracle.pv_quadrature_oracle`.
    """
    from .oracle import pv_quadrature_oracle

    c = -math.sqrt(consts.Z * consts.h / 2.0) / (8 * math.pi)
    a = pv_quadrature_oracle(q_fn, "sgn|t|^-3/2", t, **oracle_kw)
    b = pv_quadrature_oracle(p_fn, "|t|^-3/2", t, **oracle_kw)
    return float((c * (a + b)).real)


def general_quadrature(pair: QuadraturePair, theta: float) -> Signal:
    """``q_theta = cos(theta) q + sin(theta) p``; exact at 0 and pi/2."""
    c, s = math.cos(theta), math.sin(theta)
    # cos(pi/2) is 6e-17, not 0
    if theta == 0.0:
        return pair.q
    if theta == math.pi / 2:
        return pair.p
    return pair.q.with_samples(c * np.asarray(pair.q.samples) + s * np.asarray(pair.p.samples))


def photon_flux(pair: QuadraturePair) -> FluxTrace:
    """Instantaneous photon flux ``(q^2 + p^2) / 2``."""
    p = np.asarray(pair.p.samples)
    q = np.asarray(pair.q.samples)
    return FluxTrace(Signal(pair.p.grid, 0.5 * (p * p + q * q), "per-second"), pair.valid.copy())


def s_transforms(v: Signal, consts: PhysConsts = PhysConsts(), *, pad: int = 1) -> tuple[Signal, Signal]:
    """One-sided transforms ``s_pm(t) = int_0^inf v(t -+ u) / sqrt(u) du``.

    They satisfy ``s_+ + s_- = sqrt(Zh/2) p`` and
    ``s_+ - s_- = sqrt(Zh/2) q``, i.e. ``s_+ = (sqrt(Zh)/2) q_{pi/4}`` and
    ``s_- = (sqrt(Zh)/2) q_{3pi/4}``.
    """
    x = Signal(v.grid, np.real(np.asarray(v.samples)), v.unit)
    sp_ = half_order_convolve(x, "forward", pad=pad, unit="volts-sqrt-second")
    sm_ = half_order_convolve(x, "backward", pad=pad, unit="volts-sqrt-second")
    return sp_, sm_


def hilbert_pair_deviation(pair: QuadraturePair, sign: int = HILBERT_PAIR_SIGN) -> float:
    """``max |q - sign hilbert_paper(p)/pi|`` on valid samples, relative to ``max |p|``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = np.asarray(hilbert_paper(pair.p).samples) / math.pi
    q = np.asarray(pair.q.samples)
    pm = np.max(np.abs(np.asarray(pair.p.samples)[pair.valid]), initial=0.0)
    d = np.max(np.abs(q - sign * h)[pair.valid], initial=0.0)
    return float(d / pm) if pm > 0 else float(d)


def calibrate_hilbert_sign(n: int = 256, f_bins: int = 8) -> int:
    """Sign ``s`` with ``q = s hilbert_paper(p)/pi`` on a monochromatic trace."""
    from .transforms import TimeGrid

    g = TimeGrid(n, 1.0 / n)
    v = Signal(g, np.cos(2 * np.pi * f_bins * g.t), "volts")
    pair = quadratures_from_voltage(v)
    dev = {s: hilbert_pair_deviation(pair, s) for s in (1, -1)}
    return min(dev, key=dev.get)


def causality_witness(n: int = 4096, dt: float = 1.0, consts: PhysConsts = PhysConsts()) -> float:
    """Fraction of the ``v -> p`` kernel's l1 mass at negative lag.

    The realized kernel is the response of :func:`quadratures_from_voltage`
    to a unit impulse at the window center.
    """
    from .transforms import TimeGrid

    g = TimeGrid.centered(n, dt)
    imp = np.zeros(n)
    imp[n // 2] = 1.0 / dt
    with warnings.catch_warnings():
        # an impulse carries DC by design
        warnings.simplefilter("ignore")
        pair = quadratures_from_voltage(Signal(g, imp, "volts"), consts)
    k = np.abs(np.asarray(pair.p.samples))
    lag = g.t
    return float(k[lag < 0].sum() / k.sum())
