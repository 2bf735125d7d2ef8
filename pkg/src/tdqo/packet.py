"""Single-photon wave packets and their voltage response functions.

The response function ``chi`` is the finite-part convolution

    chi(t) = FP int phi(t - t') (1 + i sgn t') / |t'|^(3/2) dt'

and ``psi(t) = int_{f>0} sqrt(f) phi~(f) exp(-i 2 pi f t) df``.  The
kernel's multiplier is ``-8 pi sqrt(f)`` for ``f > 0`` and zero for
``f < 0``, so ``chi = CHI_PSI_CONSTANT * 8 pi * psi`` with
``CHI_PSI_CONSTANT = -1`` (no complex conjugation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import kernels
from .transforms import Signal, Spectrum, TimeGrid, forward_fourier, inverse_fourier

CHI_PSI_CONSTANT = -1.0
EDGE_DECAY = 1e-8
SPECTRAL_MIN_WEIGHT = 0.99


class PacketError(ValueError):
    """Invalid packet shape or sampling."""


@dataclass(frozen=True)
class ExponentialDecay:
    """``phi(t) = H(t) exp(-t / (2 sigma_t)) / sqrt(sigma_t)``."""

    sigma_t: float

    def __post_init__(self):
        if not self.sigma_t > 0:
            raise PacketError("sigma_t must be positive")

    @property
    def jumps(self) -> tuple[float, ...]:
        return (0.0,)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.sigma_t
        # the sampled value at the jump is the midpoint of the one-sided limits
        val = np.exp(-np.maximum(t, 0.0) / (2 * s)) / math.sqrt(s)
        return np.where(t > 0, val, np.where(t == 0, 0.5 * val, 0.0)).astype(complex)

    def limits(self, t):
        """Left and right limits at ``t``."""
        t = np.asarray(t, dtype=float)
        s = self.sigma_t
        right = np.where(t >= 0, np.exp(-np.maximum(t, 0.0) / (2 * s)) / math.sqrt(s), 0.0)
        left = np.where(t > 0, right, 0.0)
        return left.astype(complex), right.astype(complex)

    def spectrum(self, f):
        f = np.asarray(f, dtype=float)
        s = self.sigma_t
        return 2.0 * math.sqrt(s) / (1.0 - 4j * math.pi * f * s)

    @property
    def kernel_args(self):
        return kernels.SHAPE_EXP, [self.sigma_t]


@dataclass(frozen=True)
class Gaussian:
    """Gaussian envelope with carrier; ``|phi|^2`` has standard deviation ``sigma``.

    ``phi(t) = (2 pi sigma^2)^(-1/4) exp(-(t-c)^2 / (4 sigma^2)) exp(-i 2 pi f0 t)``
    """

    sigma: float
    f0: float = 0.0
    center: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise PacketError("sigma must be positive")

    @property
    def jumps(self) -> tuple[float, ...]:
        return ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = self.sigma
        amp = (2 * math.pi * s * s) ** -0.25
        return amp * np.exp(-((t - self.center) ** 2) / (4 * s * s)) * np.exp(-2j * math.pi * self.f0 * t)

    def limits(self, t):
        v = self(t)
        return v, v

    def spectrum(self, f):
        f = np.asarray(f, dtype=float)
        s = self.sigma
        amp = (8 * math.pi * s * s) ** 0.25
        df = f - self.f0
        return amp * np.exp(-4 * math.pi**2 * s * s * df * df) * np.exp(2j * math.pi * df * self.center)

    @property
    def kernel_args(self):
        return kernels.SHAPE_GAUSS, [self.sigma, self.f0, self.center]


@dataclass(frozen=True)
class Custom:
    """User samples on the grid; ``jumps`` are grid times of declared discontinuities.

    At a declared jump the sample is the right limit and the left limit is
    extrapolated linearly from the two preceding samples.
    """

    samples: np.ndarray = field(repr=False)
    jumps: tuple[float, ...] = ()


def _edge_check(phi: np.ndarray):
    sup = np.max(np.abs(phi))
    if sup == 0:
        raise PacketError("packet is identically zero")
    edge = max(abs(phi[0]), abs(phi[-1]))
    if edge > EDGE_DECAY * sup:
        raise PacketError(
            f"packet does not decay at the grid edges (|phi|/sup = {edge / sup:.2e} > {EDGE_DECAY:g}); "
            "extend the grid or move t0"
        )


@dataclass(frozen=True)
class PhotonPacket:
    """A normalized packet sampled on a grid, centered on arrival time ``tau``.

    Attributes
    ----------
    phi : Signal
        Samples of ``phi(t)`` on the grid (unit ``per-sqrt-second``).
    tau : float
        Arrival offset; response traces are reported at ``t_j + tau``.
    shape : object
        ``ExponentialDecay``, ``Gaussian`` or ``Custom``.
    norm_factor : float
        Factor the raw samples were divided by (``sqrt`` of their norm).
    """

    phi: Signal
    tau: float
    shape: object
    norm_factor: float

    @property
    def grid(self) -> TimeGrid:
        return self.phi.grid

    @property
    def jumps(self) -> tuple[float, ...]:
        return tuple(self.shape.jumps)

    @property
    def analytic(self) -> bool:
        return not isinstance(self.shape, Custom)

    def __call__(self, t):
        """Continuum amplitude (analytic shapes) or the linear interpolant."""
        if self.analytic:
            return self.shape(t)
        g = self.grid
        s = np.asarray(self.phi.samples, dtype=complex)
        return np.interp(t, g.t, s.real, 0, 0) + 1j * np.interp(t, g.t, s.imag, 0, 0)

    def limits(self) -> tuple[np.ndarray, np.ndarray]:
        """One-sided sample values ``(phi(t_j-), phi(t_j+))`` for product integration."""
        g = self.grid
        if self.analytic:
            return self.shape.limits(g.snapped(self.jumps))
        s = np.asarray(self.phi.samples, dtype=complex)
        left = s.copy()
        for tj in self.jumps:
            j = int(round((tj - g.t0) / g.dt))
            left[j] = 2 * s[j - 1] - s[j - 2] if j >= 2 else 0.0
        return left, s.copy()

    def _density(self) -> np.ndarray:
        # |phi|^2 with jump nodes weighted by the mean of the one-sided squares,
        # which keeps the moments second-order accurate in dt
        left, right = self.limits()
        w = 0.5 * (np.abs(left) ** 2 + np.abs(right) ** 2)
        if self.analytic:
            w = w / self.norm_factor**2
        return w / np.sum(w)

    @property
    def centroid(self) -> float:
        """``int t |phi|^2 dt`` relative to the packet's own origin."""
        return float(np.sum(self.grid.t * self._density()))

    @property
    def spread(self) -> float:
        t = self.grid.t
        w = self._density()
        c = float(np.sum(t * w))
        return float(math.sqrt(max(np.sum((t - c) ** 2 * w), 0.0)))


def auto_t0(shape, n: int, dt: float) -> float:
    """Default grid origin: centered, except one-sided shapes start near zero."""
    if isinstance(shape, ExponentialDecay):
        return -float(n // 8) * dt
    return -float(n // 2) * dt


def make_packet(shape, grid: TimeGrid, tau: float = 0.0) -> PhotonPacket:
    """Sample and normalize a packet shape.

    Parameters
    ----------
    shape : ExponentialDecay | Gaussian | Custom
    grid : TimeGrid
    tau : float
        Arrival offset.

    Returns
    -------
    PhotonPacket
        Samples satisfy ``dt * sum |phi_j|^2 = 1``.

    Raises
    ------
    PacketError
        For bad parameters or when ``phi`` does not decay at both edges.
    """
    if isinstance(shape, Custom):
        raw = np.asarray(shape.samples, dtype=complex)
        if raw.shape != (grid.n,):
            raise PacketError(f"custom samples must have length {grid.n}")
        for tj in shape.jumps:
            j = (tj - grid.t0) / grid.dt
            if abs(j - round(j)) > 1e-9 or not 0 <= round(j) < grid.n:
                raise PacketError(f"declared jump {tj} is not a grid node")
    else:
        raw = np.asarray(shape(grid.snapped(shape.jumps)), dtype=complex)
    _edge_check(raw)
    norm = math.sqrt(float(np.sum(np.abs(raw) ** 2) * grid.dt))
    phi = Signal(grid, raw / norm, "per-sqrt-second")
    if isinstance(shape, Custom):
        shape = Custom(np.asarray(phi.samples), tuple(shape.jumps))
    return PhotonPacket(phi, float(tau), shape, norm)


def positive_frequency_weight(p: PhotonPacket) -> float:
    """Fraction of ``|phi~|^2`` at positive frequency; DC and Nyquist count half."""
    X = forward_fourier(p.phi).bins
    w = np.abs(X) ** 2
    return float(np.sum(w * 0.5 * (1.0 + p.grid.sgn)) / np.sum(w))


def energy_mean(p: PhotonPacket, n_photons: float = 1.0, h: float = 1.0):
    """Mean energy ``<N> h int_0^{f_max} f |phi~|^2 df``.

    Analytic shapes use their closed-form spectrum, custom packets the grid
    bins.

    Returns
    -------
    value : float
        Band-limited mean energy.
    log_slope : float
        ``d value / d ln f_max = <N> h f_max^2 |phi~(f_max)|^2``; it stays
        finite for exponential packets, whose energy grows like ``ln f_max``.
    """
    g = p.grid
    F = g.f_max
    if p.analytic:
        spec = p.shape.spectrum
        dens = lambda f: f * abs(complex(spec(f))) ** 2
        pts = [x for x in (getattr(p.shape, "f0", None),) if x is not None and 0 < x < F]
        val, _ = integrate.quad(dens, 0.0, F, points=pts or None, limit=500, epsabs=0, epsrel=1e-12)
        slope = F * dens(F)
    else:
        X = forward_fourier(p.phi).bins
        f = g.f
        pos = f > 0
        val = float(np.sum(f[pos] * np.abs(X[pos]) ** 2) * g.df)
        # cumulative energy vs ln f over the upper half-band
        sel = pos & (f >= F / 4)
        cum = np.cumsum(f[pos] * np.abs(X[pos]) ** 2 * g.df)[sel[pos]]
        slope = float(np.polyfit(np.log(f[sel]), cum, 1)[0])
    return n_photons * h * val, n_photons * h * slope


# -- response functions ------------------------------------------------------


@dataclass(frozen=True)
class ChiFunction:
    """``chi`` sampled on the packet grid (reported at ``t_j + tau``).

    Points where the evaluation is singular (a declared jump) hold NaN.
    """

    chi: Signal
    packet: PhotonPacket
    route: str

    @property
    def t(self) -> np.ndarray:
        return self.chi.t + self.packet.tau

    @property
    def voltage_response(self) -> np.ndarray:
        """``-conj(chi) = 8 pi conj(psi)``, the form entering the moment formulas."""
        return -np.conj(np.asarray(self.chi.samples))


@dataclass(frozen=True)
class PsiFunction:
    psi: Signal
    packet: PhotonPacket

    @property
    def t(self) -> np.ndarray:
        return self.psi.t + self.packet.tau


def _continuum_scale(p: PhotonPacket) -> float:
    # analytic shapes are normalized in the continuum; samples carry norm_factor
    return p.norm_factor if p.analytic else 1.0


def compute_psi(p: PhotonPacket) -> PsiFunction:
    """``psi(t) = df sum_{0 < f_k <= f_max} sqrt(f_k) phi~(f_k) exp(-i 2 pi f_k t)``."""
    g = p.grid
    X = forward_fourier(p.phi).bins
    f = g.f
    mult = np.where(f > 0, np.sqrt(np.abs(f)), 0.0)
    psi = inverse_fourier(Spectrum(g, X * mult), unit="per-second")
    return PsiFunction(psi, p)


def _chi_product(p: PhotonPacket) -> np.ndarray:
    """Exact finite-part integral of the piecewise-linear interpolant.

    With ``x = u / dt`` the interval ``[m-1, m]`` contributes
    ``phi_j+ A(m) + phi_{j+1}- B(m)`` with ``j = i - m``; the weights are
    closed-form finite parts of ``x^a (1 + i sgn x) |x|^(-3/2)``.
    """
    g = p.grid
    n = g.n
    left, right = p.limits()
    m = np.arange(-(n - 1), n + 1, dtype=float)  # interval [m-1, m]
    A, B = _hat_weights(m)
    scale = g.dt**-0.5
    A *= scale
    B *= scale
    # chi_i = sum_j right_j A(i-j) + sum_j left_{j+1} B(i-j)
    L = 4 * n
    idx = np.arange(-(n - 1), n + 1)
    wa = np.zeros(L, complex)
    wb = np.zeros(L, complex)
    wa[idx % L] = A
    # left_{j+1} B(i-j) = left_k B(i-k+1): shift B by one
    wb[(idx - 1) % L] = B
    ra = np.zeros(L, complex)
    ra[:n] = right
    la = np.zeros(L, complex)
    la[:n] = left
    conv = np.fft.ifft(np.fft.fft(wa) * np.fft.fft(ra) + np.fft.fft(wb) * np.fft.fft(la))
    return conv[:n]


def _fp_pow(a: np.ndarray, b: np.ndarray, k: float) -> np.ndarray:
    """Finite part of ``int_a^b x^k dx`` for ``0 <= a < b`` and ``k in {-3/2, -1/2}``."""
    e = k + 1.0
    with np.errstate(divide="ignore"):
        Fa = np.where(a > 0, np.abs(a) ** e / e, 0.0)
    Fb = b**e / e
    return Fb - Fa


def _hat_weights(m: np.ndarray):
    """Weights ``A(m) = FP int_{m-1}^m (x-m+1) K(x) dx`` and ``B(m) = FP int (m-x) K(x) dx``."""
    lo = m - 1.0
    hi = m
    A = np.zeros(m.shape, complex)
    B = np.zeros(m.shape, complex)
    pos = lo >= 0
    neg = hi <= 0
    # x > 0: K = (1+i) x^(-3/2)
    a, b = lo[pos], hi[pos]
    I0 = _fp_pow(a, b, -1.5)
    I1 = _fp_pow(a, b, -0.5)
    A[pos] = (1 + 1j) * (I1 - (m[pos] - 1) * I0)
    B[pos] = (1 + 1j) * (m[pos] * I0 - I1)
    # x < 0: y = -x in [-hi, -lo], K = (1-i) y^(-3/2), x = -y
    a, b = -hi[neg], -lo[neg]
    J0 = _fp_pow(a, b, -1.5)
    J1 = _fp_pow(a, b, -0.5)
    A[neg] = (1 - 1j) * (-J1 - (m[neg] - 1) * J0)
    B[neg] = (1 - 1j) * (m[neg] * J0 + J1)
    return A, B


def compute_chi(
    p: PhotonPacket,
    route: str = "finite-part",
    *,
    method: str | None = None,
    times: Sequence[float] | None = None,
    allow_partial_band: bool = False,
    rtol: float = 1e-10,
    nthreads: int = 1,
) -> ChiFunction | np.ndarray:
    """Voltage response function of a packet.

    Parameters
    ----------
    p : PhotonPacket
    route : {"finite-part", "spectral"}
        ``finite-part`` integrates the subtracted kernel directly;
        ``spectral`` uses ``CHI_PSI_CONSTANT * 8 pi * psi`` on the grid.
    method : {"adaptive", "product"}, optional
        For the finite-part route: adaptive quadrature on the analytic shape
        (default for built-in shapes) or exact integration of the sampled
        piecewise-linear interpolant (default for custom samples).
    times : sequence of float, optional
        Evaluate at these packet-frame times only (adaptive method); returns
        a complex array instead of a :class:`ChiFunction`.
    allow_partial_band : bool
        The spectral route refuses packets with positive-frequency weight
        below 0.99 unless this is set.
    rtol : float
        Relative tolerance of the adaptive quadrature.
    nthreads : int
        Threads for the compiled adaptive kernel.
    """
    if route == "spectral":
        if times is not None:
            raise ValueError("the spectral route evaluates on the grid only")
        w = positive_frequency_weight(p)
        if w < SPECTRAL_MIN_WEIGHT and not allow_partial_band:
            raise PacketError(
                f"positive-frequency weight {w:.4f} < {SPECTRAL_MIN_WEIGHT}; the spectral route "
                "drops f<0 content (pass allow_partial_band=True in idealized mode)"
            )
        psi = compute_psi(p).psi.samples
        chi = CHI_PSI_CONSTANT * 8 * np.pi * np.asarray(psi) * _continuum_scale(p)
        return ChiFunction(Signal(p.grid, chi, "per-second"), p, "spectral")
    if route != "finite-part":
        raise ValueError(f"unknown route {route!r}")

    if method is None:
        method = "adaptive" if p.analytic else "product"
    if method == "product":
        if times is not None:
            raise ValueError("the product method evaluates on the grid only")
        chi = _chi_product(p)
        g = p.grid
        for tj in p.jumps:
            j = int(round((tj - g.t0) / g.dt))
            if 0 <= j < g.n and abs(g.t0 + j * g.dt - tj) < 1e-9 * g.dt:
                chi[j] = complex(np.nan, np.nan)
        return ChiFunction(Signal(g, chi, "per-second"), p, "finite-part")
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    if not p.analytic:
        raise PacketError("adaptive finite-part evaluation needs an analytic shape")

    code, params = p.shape.kernel_args
    tt = p.grid.snapped(p.jumps) if times is None else np.asarray(times, dtype=float)
    vals, status = kernels.chi_finite_part(code, params, tt, rtol=rtol, nthreads=nthreads)
    bad = status == kernels.STATUS_NOT_CONVERGED
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ArithmeticError(f"finite-part quadrature did not converge at t={tt.flat[k]:.6g}")
    if times is not None:
        return vals
    return ChiFunction(Signal(p.grid, vals, "per-second"), p, "finite-part")


# -- closed forms for the exponential packet ----------------------------------


def chi_closed_form_exponential(sigma_t: float, t) -> np.ndarray:
    """Closed form for the exponential packet, transcribed as published.

    ``chi = (2i sqrt(pi)/s) exp(i pi/4 - |t|/2s)
    - 2 sqrt2 exp(-i sgn(t) pi/4) [1/sqrt(|t| s) + (sqrt2 sgn(t)/s) exp(x^2) (sqrt(pi)/2) erf(x)]``
    with ``x = sqrt(|t|/2s)``.  It disagrees with the finite-part definition
    away from ``t = 0``; :func:`chi_exponential_exact` is the corrected form.

    Raises
    ------
    ValueError
        If any ``t == 0``.
    """
    s = float(sigma_t)
    if not s > 0:
        raise ValueError("sigma_t must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t == 0):
        raise ValueError("t = 0 is a non-removable singularity")
    at = np.abs(t)
    x = np.sqrt(at / (2 * s))
    sg = np.sign(t)
    first = (2j * math.sqrt(math.pi) / s) * np.exp(1j * math.pi / 4 - at / (2 * s))
    with np.errstate(over="ignore"):
        inner = np.exp(x * x) * (math.sqrt(math.pi) / 2) * special.erf(x)
    bracket = 1 / np.sqrt(at * s) + (math.sqrt(2) * sg / s) * inner
    return first - 2 * math.sqrt(2) * np.exp(-1j * sg * math.pi / 4) * bracket


def chi_exponential_exact(sigma_t: float, t) -> np.ndarray:
    """Closed form of the finite-part ``chi`` for the exponential packet.

    With ``x = sqrt(|t| / (2 sigma))``::

        t > 0: -2(1+i)/sqrt(t s) + (1+i)(2 sqrt2 / s) D(x) - (1-i)(sqrt(2 pi)/s) exp(-x^2)
        t < 0: (1-i) [2/sqrt(|t| s) - (sqrt(2 pi)/s) erfcx(x)]

    where ``D`` is Dawson's integral.  Diverges like ``|t|^(-1/2)`` at 0.
    """
    s = float(sigma_t)
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    x = np.sqrt(at / (2 * s))
    with np.errstate(divide="ignore"):
        lead = 2.0 / np.sqrt(at * s)
    pos = -(1 + 1j) * lead + (1 + 1j) * (2 * math.sqrt(2) / s) * special.dawsn(x) - (1 - 1j) * (
        math.sqrt(2 * math.pi) / s
    ) * np.exp(-x * x)
    neg = (1 - 1j) * (lead - math.sqrt(2 * math.pi) / s * special.erfcx(x))
    out = np.where(t > 0, pos, neg)
    return np.where(t == 0, complex(np.nan, np.nan), out)
