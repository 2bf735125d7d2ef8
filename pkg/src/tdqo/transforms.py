"""Time grids, sampled signals and the Fourier machinery.

Conventions
-----------
Analysis:  ``X(f) = int x(t) exp(+i 2 pi f t) dt``
Synthesis: ``x(t) = int X(f) exp(-i 2 pi f t) df``

On a uniform grid ``t_j = t0 + j dt`` the discrete forms are the FFT
counterparts scaled by ``dt`` and ``df``.  The Nyquist bin is treated as
``+f_max`` in phase factors and the sign function vanishes on both the DC
and the Nyquist bin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

UNITS = frozenset(
    {"dimensionless", "volts", "per-sqrt-second", "volts-sqrt-second", "per-second"}
)


class DCComponentWarning(UserWarning):
    """Input carries DC or near-DC content that a singular multiplier discards."""


@dataclass(frozen=True)
class PhysConsts:
    """Line impedance ``Z`` and Planck constant ``h``.

    Natural units (``Z = h = 1``) are the default.
    """

    Z: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        if not (self.Z > 0 and self.h > 0):
            raise ValueError("Z and h must be positive")

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * np.pi)

    @classmethod
    def si(cls) -> "PhysConsts":
        return cls(Z=50.0, h=6.62607015e-34)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``n`` samples spaced ``dt`` starting at ``t0``."""

    n: int
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("grid needs an integer n >= 2")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def centered(cls, n: int, dt: float) -> "TimeGrid":
        return cls(n, dt, -(n // 2) * dt)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def span(self) -> float:
        return self.n * self.dt

    @property
    def df(self) -> float:
        return 1.0 / (self.n * self.dt)

    @property
    def f_max(self) -> float:
        return 0.5 / self.dt

    @property
    def f(self) -> np.ndarray:
        """Bin frequencies in FFT order, Nyquist (even ``n``) taken as ``+f_max``."""
        f = np.fft.fftfreq(self.n, self.dt)
        if self.n % 2 == 0:
            f[self.n // 2] = self.f_max
        return f

    @property
    def sgn(self) -> np.ndarray:
        """Sign of each bin frequency with ``sgn = 0`` on DC and Nyquist."""
        s = np.sign(np.fft.fftfreq(self.n))
        if self.n % 2 == 0:
            s[self.n // 2] = 0.0
        return s

    def snapped(self, points) -> np.ndarray:
        """Grid times with nodes within ``1e-6 dt`` of ``points`` set exactly."""
        t = self.t
        for x in points:
            j = int(round((x - self.t0) / self.dt))
            if 0 <= j < self.n and abs(t[j] - x) <= 1e-6 * self.dt:
                t[j] = x
        return t

    def padded(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.n * factor, self.dt, self.t0)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Signal:
    """Samples on a :class:`TimeGrid` with a unit tag."""

    grid: TimeGrid
    samples: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {s.shape}")
        if self.unit not in UNITS:
            raise ValueError(f"unknown unit tag {self.unit!r}")
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def is_real(self, tol: float = 0.0) -> bool:
        s = self.samples
        if not np.iscomplexobj(s):
            return True
        return bool(np.max(np.abs(s.imag), initial=0.0) <= tol * max(np.max(np.abs(s)), 1e-300))

    def with_samples(self, samples, unit: str | None = None) -> "Signal":
        return Signal(self.grid, samples, self.unit if unit is None else unit)


@dataclass(frozen=True)
class Spectrum:
    """Analysis-convention spectrum bins in FFT order."""

    grid: TimeGrid
    bins: np.ndarray = field(repr=False)
    unit: str = "dimensionless"

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=complex)
        if b.shape != (self.grid.n,):
            raise ValueError("spectrum length does not match grid")
        object.__setattr__(self, "bins", _frozen(b))

    @property
    def f(self) -> np.ndarray:
        return self.grid.f


def forward_fourier(sig: Signal) -> Spectrum:
    """Discrete analysis transform ``X(f_k) ~ dt sum_j x_j exp(i 2 pi f_k t_j)``."""
    g = sig.grid
    x = np.asarray(sig.samples, dtype=complex)
    bins = g.dt * g.n * np.fft.ifft(x) * np.exp(2j * np.pi * g.f * g.t0)
    return Spectrum(g, bins, sig.unit)


def inverse_fourier(spec: Spectrum, unit: str | None = None) -> Signal:
    """Discrete synthesis transform, exact inverse of :func:`forward_fourier`."""
    g = spec.grid
    x = g.df * np.fft.fft(spec.bins * np.exp(-2j * np.pi * g.f * g.t0))
    return Signal(g, x, spec.unit if unit is None else unit)


def _check_dc(x: np.ndarray, name: str, tol: float = 1e-8, low_frac: float = 0.01):
    """Warn when a singular multiplier would discard meaningful content."""
    scale = np.sqrt(np.mean(np.abs(x) ** 2))
    if scale == 0:
        return
    X = np.fft.fft(x) / x.size
    if abs(X[0]) > tol * scale:
        warnings.warn(
            f"{name}: input mean {abs(X[0]):.3g} is discarded (DC multiplier is 0)",
            DCComponentWarning,
            stacklevel=3,
        )
        return
    power = np.abs(X) ** 2
    total = power.sum()
    low = power[1] + power[-1] if x.size > 2 else 0.0
    if total > 0 and low / total > low_frac:
        warnings.warn(
            f"{name}: {100 * low / total:.2g}% of power sits in the lowest bin",
            DCComponentWarning,
            stacklevel=3,
        )


def _apply_multiplier(sig: Signal, mult: np.ndarray, pad: int, unit: str) -> Signal:
    """Multiply the spectrum of ``sig`` by ``mult(grid)`` and return the trace.

    ``pad = 1`` gives circular (window-periodic) semantics; ``pad >= 2``
    zero-pads to a linear convolution for localized inputs.
    """
    if int(pad) != pad or pad < 1:
        raise ValueError("pad must be a positive integer")
    g = sig.grid
    x = np.asarray(sig.samples)
    gp = g.padded(int(pad))
    xp = np.zeros(gp.n, dtype=complex)
    xp[: g.n] = x
    m = mult(gp)
    # ifft is the analysis direction under the +i convention
    y = np.fft.fft(np.fft.ifft(xp) * m)[: g.n]
    if not np.iscomplexobj(x) and _is_hermitian(m):
        y = y.real
    return Signal(g, y, unit)


def _is_hermitian(m: np.ndarray) -> bool:
    # Real signals stay real iff m(-f) = conj m(f).
    return bool(np.allclose(m[1:][::-1], np.conj(m[1:]), rtol=0, atol=1e-14 * np.max(np.abs(m))))


def hilbert_multiplier(grid: TimeGrid) -> np.ndarray:
    """Spectral multiplier ``i pi sgn(f)`` of the PV convolution with ``1/t``."""
    return 1j * np.pi * grid.sgn


def hilbert_paper(sig: Signal) -> Signal:
    """Principal-value convolution with the bare kernel ``1/t``.

    The trace is treated as one period of a periodic signal.  No ``1/pi``
    is folded in, so ``cos(2 pi f0 t)`` maps to ``pi sin(2 pi f0 t)``.

    Examples
    --------
    >>> g = TimeGrid(64, 1 / 64)
    >>> x = Signal(g, np.cos(2 * np.pi * 4 * g.t))
    >>> y = hilbert_paper(x)
    >>> bool(np.allclose(y.samples, np.pi * np.sin(2 * np.pi * 4 * g.t)))
    True
    """
    _check_dc(np.asarray(sig.samples), "hilbert_paper")
    return _apply_multiplier(sig, hilbert_multiplier, 1, sig.unit)


def _abs_f(grid: TimeGrid) -> np.ndarray:
    a = np.abs(grid.f)
    a[0] = np.inf  # DC multiplier is defined as 0
    return a


HALF_ORDER_KINDS = ("even", "odd", "forward", "backward")


def half_order_multiplier(kind: str):
    """Multiplier factory for the half-order kernels.

    ======== =========================== ===============================
    kind     kernel                      multiplier
    ======== =========================== ===============================
    even     ``1/sqrt|t|``               ``1/sqrt|f|``
    odd      ``sgn(t)/sqrt|t|``          ``i sgn(f)/sqrt|f|``
    forward  ``H(t)/sqrt(t)``            ``(1 + i sgn f)/(2 sqrt|f|)``
    backward ``H(-t)/sqrt(-t)``          ``(1 - i sgn f)/(2 sqrt|f|)``
    ======== =========================== ===============================
    """
    if kind == "even":
        return lambda g: 1.0 / np.sqrt(_abs_f(g))
    if kind == "odd":
        return lambda g: 1j * g.sgn / np.sqrt(_abs_f(g))
    if kind == "forward":
        return lambda g: (1.0 + 1j * g.sgn) / (2.0 * np.sqrt(_abs_f(g)))
    if kind == "backward":
        return lambda g: (1.0 - 1j * g.sgn) / (2.0 * np.sqrt(_abs_f(g)))
    raise ValueError(f"unknown half-order kernel {kind!r}; choose from {HALF_ORDER_KINDS}")


def half_order_convolve(sig: Signal, kind: str, pad: int = 2, unit: str | None = None) -> Signal:
    """Convolve with a ``|t|^(-1/2)`` type kernel through its spectral multiplier.

    Parameters
    ----------
    sig : Signal
        Input trace.  DC content is discarded with a warning.
    kind : {"even", "odd", "forward", "backward"}
        Kernel parity, see :func:`half_order_multiplier`.
    pad : int
        Zero-padding factor.  The default of 2 suits localized signals; use
        1 for traces that are exactly periodic on the window.
    unit : str, optional
        Unit tag of the result (defaults to the input's).
    """
    mult = half_order_multiplier(kind)
    _check_dc(np.asarray(sig.samples), f"half_order_convolve[{kind}]")
    return _apply_multiplier(sig, mult, pad, sig.unit if unit is None else unit)
