"""Discretized ladder-operator algebra in truncated Fock space.

``M`` frequency bins ``f_k = (k + 1/2) delta_f`` each carry a bosonic mode
truncated at ``n_max`` quanta.  Frequency-domain operators are
``a(f_k) = b_k / sqrt(delta_f)`` and time-domain operators on the conjugate
grid are ``a(t) = sqrt(delta_f) sum_k b_k exp(-i 2 pi f_k t)``.

Truncation breaks ``[b, b^dagger] = 1`` on the top Fock level, so every
identity is checked on the *safe subspace* where all occupations are at
most ``n_max - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

MAX_DIM = 4096


class TruncationError(ValueError):
    """A state or system does not fit the truncated Fock space."""


def _ladder(n_max: int) -> sp.csr_matrix:
    d = n_max + 1
    return sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr", dtype=complex)


@dataclass(eq=False)
class ModeSystem:
    """Truncated multi-mode Fock space.

    Parameters
    ----------
    M : int
        Number of frequency bins per branch.
    n_max : int
        Fock cutoff per mode.
    delta_f : float
        Bin width.
    h : float
        Planck constant.
    branches : {1, 2}
        With 2, a backward-propagating copy of the ``M`` bins is added
        (modes ``M .. 2M-1``).
    """

    M: int
    n_max: int
    delta_f: float
    h: float = 1.0
    branches: int = 1

    def __post_init__(self):
        if self.M < 1 or self.n_max < 1 or self.branches not in (1, 2):
            raise TruncationError("need M >= 1, n_max >= 1 and branches in {1, 2}")
        if not self.delta_f > 0:
            raise ValueError("delta_f must be positive")
        if self.dim > MAX_DIM:
            raise TruncationError(
                f"(n_max+1)^modes = {self.dim} exceeds the {MAX_DIM} guard; reduce M or n_max"
            )

    # -- geometry -------------------------------------------------------------
    @property
    def n_modes(self) -> int:
        return self.M * self.branches

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** (self.M * self.branches)

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)

    @property
    def freqs(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.delta_f

    @property
    def dt(self) -> float:
        return 1.0 / (self.M * self.delta_f)

    @property
    def times(self) -> np.ndarray:
        """Symmetric conjugate grid of span ``1 / delta_f``."""
        return (np.arange(self.M) - (self.M - 1) / 2) * self.dt

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, n_modes)`` occupation numbers of the product basis (mode 0 slowest)."""
        d = self.n_max + 1
        idx = np.arange(self.dim)
        occ = np.empty((self.dim, self.n_modes), dtype=int)
        for m in range(self.n_modes - 1, -1, -1):
            occ[:, m] = idx % d
            idx //= d
        return occ

    @cached_property
    def safe(self) -> np.ndarray:
        """Indices of basis states with every occupation ``<= n_max - 1``."""
        return np.flatnonzero(np.all(self.occupations <= self.n_max - 1, axis=1))

    # -- operators ------------------------------------------------------------
    @cached_property
    def _b(self) -> list:
        d = self.n_max + 1
        lad = _ladder(self.n_max)
        ops = []
        for m in range(self.n_modes):
            left = sp.identity(d**m, format="csr", dtype=complex)
            right = sp.identity(d ** (self.n_modes - m - 1), format="csr", dtype=complex)
            ops.append(sp.kron(sp.kron(left, lad), right, format="csr"))
        return ops

    def b(self, k: int) -> sp.csr_matrix:
        return self._b[k]

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, format="csr", dtype=complex)

    def a_freq(self, k: int, sigma: int = 1) -> sp.csr_matrix:
        """``a(f_k) = b_k / sqrt(delta_f)`` on branch ``sigma``."""
        return self.b(self._mode(k, sigma)) / math.sqrt(self.delta_f)

    def _mode(self, k: int, sigma: int) -> int:
        if sigma == 1:
            return k
        if self.branches != 2:
            raise ValueError("backward branch requires branches=2")
        return self.M + k

    def a_time(self, t: float, tau: float = 0.0, sigma: int = 1) -> sp.csr_matrix:
        """``a_{tau,sigma}(t) = sqrt(df) sum_k b_k exp(-i 2 pi f_k (t - sigma tau))``."""
        ph = np.exp(-2j * np.pi * self.freqs * (t - sigma * tau))
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for k in range(self.M):
            out = out + ph[k] * self.b(self._mode(k, sigma))
        return out * math.sqrt(self.delta_f)

    def a_local(self, t: float, tau: float = 0.0) -> sp.csr_matrix:
        """Sum of both propagation directions at position ``tau``."""
        return self.a_time(t, tau, 1) + self.a_time(t, tau, -1)

    def kernel_D(self, dt) -> np.ndarray:
        """``D(dt) = delta_f sum_k exp(-i 2 pi f_k dt)`` in closed form."""
        x = np.asarray(dt, dtype=float)
        K, df = self.M, self.delta_f
        num = np.sin(np.pi * K * df * x)
        den = np.sin(np.pi * df * x)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(np.abs(den) < 1e-300, K * np.cos(np.pi * K * df * x) / np.cos(np.pi * df * x), num / den)
        return df * np.exp(-1j * np.pi * K * df * x) * ratio

    # Symmetric orderings are written as normal order plus the canonical
    # vacuum constant, (b^dag b + b b^dag)/2 = b^dag b + 1/2.  Building
    # b b^dag from truncated matrices would instead corrupt the top level.

    @cached_property
    def number_normal(self) -> sp.csr_matrix:
        return _sum_ops((b.getH() @ b for b in self._b), self.dim)

    @cached_property
    def number_sym(self) -> sp.csr_matrix:
        """``sum_k (b^dag b + b b^dag)/2`` including vacuum contributions."""
        return self.number_normal + 0.5 * self.n_modes * self.identity()

    @property
    def _all_freqs(self) -> np.ndarray:
        return np.tile(self.freqs, self.branches)

    @cached_property
    def H_normal(self) -> sp.csr_matrix:
        f = self._all_freqs
        return _sum_ops((self.h * f[m] * (b.getH() @ b) for m, b in enumerate(self._b)), self.dim)

    @cached_property
    def H(self) -> sp.csr_matrix:
        """Symmetric-ordered ``sum_k h f_k (b^dag b + b b^dag)/2``."""
        return self.H_normal + 0.5 * self.h * float(np.sum(self._all_freqs)) * self.identity()

    @cached_property
    def theta_normal(self) -> sp.csr_matrix:
        if self.branches != 1:
            raise ValueError("theta is defined for a single propagation direction")
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for tj in self.times:
            a = self.a_time(tj)
            out = out + self.dt * tj * (a.getH() @ a)
        return out

    @cached_property
    def theta(self) -> sp.csr_matrix:
        """``sum_j dt t_j (a_j^dag a_j + a_j a_j^dag)/2`` on the conjugate grid.

        The vacuum constant is ``sum_j dt t_j D(0) / 2``, which vanishes on
        the symmetric grid.
        """
        const = 0.5 * self.dt * float(np.sum(self.times)) * float(self.kernel_D(0.0).real)
        return self.theta_normal + const * self.identity()

    def literal_symmetric(self, which: str) -> sp.csr_matrix:
        """``H``/``N``/``theta`` built from truncated ``b b^dag`` products.

        Agrees with the canonical forms on states whose total photon number
        is below ``n_max``.
        """
        if which == "theta":
            out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
            for tj in self.times:
                a = self.a_time(tj)
                out = out + self.dt * tj * 0.5 * (a.getH() @ a + a @ a.getH())
            return out
        w = self.h * self._all_freqs if which == "H" else np.ones(self.n_modes)
        return _sum_ops((w[m] * 0.5 * (b.getH() @ b + b @ b.getH()) for m, b in enumerate(self._b)), self.dim)

    def evolve(self, op: sp.spmatrix, t: float) -> sp.csr_matrix:
        """Heisenberg picture ``U^dag op U`` with ``U = exp(-i H t / hbar)``."""
        E = self.H.diagonal().real
        coo = sp.coo_matrix(op)
        ph = np.exp(1j * (E[coo.row] - E[coo.col]) * t / self.hbar)
        return sp.csr_matrix((coo.data * ph, (coo.row, coo.col)), shape=op.shape)


def _sum_ops(ops, dim) -> sp.csr_matrix:
    return sum(ops, sp.csr_matrix((dim, dim), dtype=complex))


def _safe_residual(X: sp.spmatrix, safe: np.ndarray) -> float:
    sub = sp.csc_matrix(X)[:, safe]
    return float(np.max(np.abs(sub.data), initial=0.0))


def _comm(A, B):
    return A @ B - B @ A


@dataclass
class CommutatorReport:
    residuals: dict = field(default_factory=dict)
    tol: float = 1e-12

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def commutator_suite(sys: ModeSystem, taus=(0.0, 0.37), extra_times=(0.123, -0.271), tol=1e-12) -> CommutatorReport:
    """Check the canonical commutators on the safe subspace.

    (i) frequency domain, (ii) time domain against ``D``, (iii) directional
    branches and their localized sum, (iv) Heisenberg time evolution.
    Residuals are max-abs matrix entries divided by ``max(1, |expected|)``.
    """
    rep = CommutatorReport(tol=tol)
    I = sys.identity()
    safe = sys.safe
    df = sys.delta_f

    # (i)
    r = 0.0
    for k in range(sys.n_modes):
        for q in range(sys.n_modes):
            c = _comm(sys.b(k) / math.sqrt(df), sys.b(q).getH() / math.sqrt(df))
            exp = (1.0 / df) if k == q else 0.0
            r = max(r, _safe_residual(c - exp * I, safe) / max(1.0, exp))
            c2 = _comm(sys.b(k), sys.b(q))
            r = max(r, _safe_residual(c2, safe))
    rep.residuals["frequency"] = r

    # (ii)
    if sys.branches == 1:
        ts = list(sys.times) + list(extra_times)
        ops = [sys.a_time(t) for t in ts]
        r = 0.0
        for i, ti in enumerate(ts):
            for j, tj in enumerate(ts):
                D = complex(sys.kernel_D(ti - tj))
                c = _comm(ops[i], ops[j].getH())
                r = max(r, _safe_residual(c - D * I, safe) / max(1.0, abs(D)))
        rep.residuals["time"] = r

    # (iii)
    if sys.M % 2 == 0 and sys.branches == 1:
        two = ModeSystem(sys.M // 2, sys.n_max, sys.delta_f, sys.h, branches=2)
        rep.residuals.update(_directional(two, taus, extra_times))
    elif sys.branches == 2:
        rep.residuals.update(_directional(sys, taus, extra_times))

    # (iv)
    r = 0.0
    for s in (0.0, 0.29, -1.7):
        for k in range(sys.n_modes):
            f = np.tile(sys.freqs, sys.branches)[k]
            ev = sys.evolve(sys.b(k), s)
            r = max(r, _safe_residual(ev - np.exp(-2j * np.pi * f * s) * sys.b(k), safe))
        if sys.branches == 1:
            for t in (0.0, 0.11):
                ev = sys.evolve(sys.a_time(t), s)
                r = max(r, _safe_residual(ev - sys.a_time(t + s), safe))
            a1 = sys.evolve(sys.b(0), s) / math.sqrt(df)
            a2 = sys.evolve(sys.b(0), 0.4) / math.sqrt(df)
            expect = np.exp(-2j * np.pi * sys.freqs[0] * (s - 0.4)) / df
            r = max(r, _safe_residual(_comm(a1, a2.getH()) - expect * I, safe) * df)
    rep.residuals["evolution"] = r
    return rep


def _directional(two: ModeSystem, taus, extra_times) -> dict:
    I = two.identity()
    safe = two.safe
    r_branch = 0.0
    r_local = 0.0
    r_freq = 0.0
    times = list(two.times[:2]) + list(extra_times)
    for tau1 in taus:
        for tau2 in taus:
            dtau = tau1 - tau2
            for t1 in times:
                for t2 in times:
                    dt = t1 - t2
                    for s1 in (1, -1):
                        for s2 in (1, -1):
                            c = _comm(two.a_time(t1, tau1, s1), two.a_time(t2, tau2, s2).getH())
                            exp = complex(two.kernel_D(dt - s1 * dtau)) if s1 == s2 else 0.0
                            r_branch = max(r_branch, _safe_residual(c - exp * I, safe) / max(1.0, abs(exp)))
                    c = _comm(two.a_local(t1, tau1), two.a_local(t2, tau2).getH())
                    exp = complex(two.kernel_D(dt - dtau) + two.kernel_D(dt + dtau))
                    r_local = max(r_local, _safe_residual(c - exp * I, safe) / max(1.0, abs(exp)))
            # frequency-domain forms: a_{tau,s}(f_k) = b e^{i s 2 pi f_k tau} / sqrt(df)
            for k in range(two.M):
                fk = two.freqs[k]
                ops = {
                    s: two.a_freq(k, s) * np.exp(1j * s * 2 * np.pi * fk * tau1) for s in (1, -1)
                }
                ops2 = {
                    s: two.a_freq(k, s) * np.exp(1j * s * 2 * np.pi * fk * tau2) for s in (1, -1)
                }
                for s in (1, -1):
                    c = _comm(ops[s], ops2[s].getH())
                    exp = np.exp(1j * s * 2 * np.pi * fk * dtau) / two.delta_f
                    r_freq = max(r_freq, _safe_residual(c - exp * I, safe) * two.delta_f)
                loc1 = ops[1] + ops[-1]
                loc2 = ops2[1] + ops2[-1]
                exp = 2 * np.cos(2 * np.pi * fk * dtau) / two.delta_f
                c = _comm(loc1, loc2.getH())
                r_freq = max(r_freq, _safe_residual(c - exp * I, safe) * two.delta_f / 2)
    return {"directional": r_branch, "localized": r_local, "directional_frequency": r_freq}


# -- states -------------------------------------------------------------------


def packet_state(sys: ModeSystem, coeffs, kind: str = "fock", N: int = 1, alpha: complex = 0.0) -> np.ndarray:
    """Fock-space vector of a packet mode ``A^dag = sum_k c_k b_k^dag``.

    Parameters
    ----------
    coeffs : array_like, length ``sys.n_modes``
        Packet coefficients (normalized internally).
    kind : {"vacuum", "fock", "coherent"}
    N : int
        Photon number for Fock states; must not exceed ``n_max - 1``.
    alpha : complex
        Coherent amplitude; the series is cut at ``n_max - 1`` photons and
        renormalized so every component stays in the safe subspace.

    Returns
    -------
    numpy.ndarray
        Normalized state vector.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (sys.n_modes,):
        raise ValueError(f"need {sys.n_modes} coefficients")
    c = c / np.linalg.norm(c)
    vac = np.zeros(sys.dim, complex)
    vac[0] = 1.0
    if kind == "vacuum":
        return vac
    Adag = _sum_ops((c[k] * sys.b(k).getH() for k in range(sys.n_modes)), sys.dim)
    if kind == "fock":
        if N > sys.n_max - 1:
            raise TruncationError(f"N = {N} needs n_max >= {N + 1} to stay in the safe subspace")
        v = vac
        for _ in range(N):
            v = Adag @ v
        return v / np.linalg.norm(v)
    if kind == "coherent":
        v = vac.copy()
        term = vac.copy()
        for n in range(1, sys.n_max):
            term = (alpha / n) * (Adag @ term)
            v = v + term
        return v / np.linalg.norm(v)
    raise ValueError(f"unknown state kind {kind!r}")


@dataclass
class ThetaMoments:
    theta_mean: float
    theta_var: float
    H_mean: float
    H_var: float
    N_mean: float
    N_normal: float
    theta_normal_mean: float
    H_normal_mean: float

    def margin(self, hbar: float) -> float:
        """``sqrt(Var theta Var H) - hbar <N>/2`` with normal-ordered ``N``."""
        return math.sqrt(max(self.theta_var, 0.0) * max(self.H_var, 0.0)) - 0.5 * hbar * self.N_normal


def _expect(op, v):
    return complex(np.vdot(v, op @ v))


def theta_variance_oracle(state: np.ndarray, sys: ModeSystem) -> ThetaMoments:
    """Matrix moments of ``theta``, ``H`` and ``N`` in a state vector.

    Raises
    ------
    TruncationError
        If the state has weight outside the safe subspace.
    """
    v = np.asarray(state, dtype=complex)
    outside = np.ones(sys.dim, bool)
    outside[sys.safe] = False
    if np.linalg.norm(v[outside]) > 1e-12 * np.linalg.norm(v):
        raise TruncationError("state needs occupation n_max; raise n_max")
    th, H = sys.theta, sys.H
    thv, Hv = th @ v, H @ v
    m_th = _expect(th, v).real
    m_H = _expect(H, v).real
    return ThetaMoments(
        theta_mean=m_th,
        theta_var=float(np.vdot(thv, thv).real - m_th**2),
        H_mean=m_H,
        H_var=float(np.vdot(Hv, Hv).real - m_H**2),
        N_mean=_expect(sys.number_sym, v).real,
        N_normal=_expect(sys.number_normal, v).real,
        theta_normal_mean=_expect(sys.theta_normal, v).real,
        H_normal_mean=_expect(sys.H_normal, v).real,
    )


@dataclass
class FockCheck:
    name: str
    residual: float
    residual_sym: float
    expectation_gap: float


def fock_commutator_check(sys: ModeSystem, states: dict) -> list[FockCheck]:
    """Residual of ``[H, theta] = i hbar N`` on each named state.

    ``residual`` uses normal-ordered ``N`` (vacuum terms cancel inside the
    commutator); ``residual_sym`` compares against the symmetric-ordered
    ``N`` for reference.  Both are ``||(C - i hbar N) v|| / (hbar ||N v||)``
    (absolute when ``N v = 0``).  ``expectation_gap`` is
    ``|<C> - i hbar <N>| / (hbar max(<N>, 1))``.
    """
    C = _comm(sys.H, sys.theta)
    hb = sys.hbar
    out = []
    for name, v in states.items():
        v = np.asarray(v, complex)
        Cv = C @ v
        Nn = sys.number_normal @ v
        Ns = sys.number_sym @ v
        scale_n = np.linalg.norm(Nn)
        scale_s = np.linalg.norm(Ns)
        r = np.linalg.norm(Cv - 1j * hb * Nn) / (hb * scale_n if scale_n > 0 else hb)
        rs = np.linalg.norm(Cv - 1j * hb * Ns) / (hb * scale_s if scale_s > 0 else hb)
        nbar = np.vdot(v, Nn).real
        gap = abs(np.vdot(v, Cv) - 1j * hb * nbar) / (hb * max(nbar, 1.0))
        out.append(FockCheck(name, float(r), float(rs), float(gap)))
    return out


# -- single-particle representation ---------------------------------------------


@dataclass(eq=False)
class SingleParticleRep:
    """One-photon sector: ``H = diag(h f_k)``, ``T = F^dag diag(t_j) F``."""

    M: int
    delta_f: float
    h: float = 1.0

    @property
    def hbar(self) -> float:
        return self.h / (2 * math.pi)

    @cached_property
    def freqs(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.delta_f

    @cached_property
    def times(self) -> np.ndarray:
        return (np.arange(self.M) - (self.M - 1) / 2) / (self.M * self.delta_f)

    @cached_property
    def F(self) -> np.ndarray:
        return np.exp(-2j * np.pi * np.outer(self.times, self.freqs)) / math.sqrt(self.M)

    @cached_property
    def T(self) -> np.ndarray:
        return self.F.conj().T @ (self.times[:, None] * self.F)

    @cached_property
    def Hm(self) -> np.ndarray:
        return np.diag(self.h * self.freqs).astype(complex)

    @cached_property
    def R(self) -> np.ndarray:
        """``[H, T] - i hbar I``."""
        return self.Hm @ self.T - self.T @ self.Hm - 1j * self.hbar * np.eye(self.M)

    def residual(self, psi) -> float:
        psi = np.asarray(psi, complex)
        return float(np.linalg.norm(self.R @ psi) / (self.hbar * np.linalg.norm(psi)))

    def gaussian(self, center: float, width: float) -> np.ndarray:
        """Gaussian spectral profile (bin units) with a real amplitude."""
        k = np.arange(self.M)
        g = np.exp(-0.5 * ((k - center) / width) ** 2).astype(complex)
        return g / np.linalg.norm(g)

    def min_residual_packet(self, rank: int = 0) -> np.ndarray:
        """Right singular vector of ``R`` with the ``rank``-th smallest singular value.

        The overall phase is fixed so the largest component is real positive.
        """
        _, s, vh = np.linalg.svd(self.R)
        v = vh[len(s) - 1 - rank].conj()
        j = int(np.argmax(np.abs(v)))
        return v * np.exp(-1j * np.angle(v[j]))


def single_particle_check(rep: SingleParticleRep, profiles: dict) -> dict:
    """Residual ``||R psi|| / hbar`` per profile plus the trace identity.

    Returns
    -------
    dict
        ``{"residuals": {name: r}, "trace": tr R, "trace_expected": -i hbar M}``
    """
    res = {name: rep.residual(v) for name, v in profiles.items()}
    return {"residuals": res, "trace": complex(np.trace(rep.R)), "trace_expected": -1j * rep.hbar * rep.M}


# -- packets on the bin grid ----------------------------------------------------


def resample_packet(packet, sys: ModeSystem) -> np.ndarray:
    """Coefficients ``c_k = sqrt(df) phi~(f_k)`` of a packet on the system's bins.

    Uses the closed-form spectrum for analytic shapes and interpolates the
    grid spectrum otherwise.  Not renormalized.
    """
    f = sys.freqs
    if packet.analytic:
        spec = packet.shape.spectrum(f)
    else:
        from .transforms import forward_fourier

        X = forward_fourier(packet.phi).bins
        ff = packet.grid.f
        order = np.argsort(ff)
        spec = np.interp(f, ff[order], X[order].real) + 1j * np.interp(f, ff[order], X[order].imag)
    c = math.sqrt(sys.delta_f) * np.asarray(spec, complex)
    return np.tile(c, sys.branches) if sys.branches == 1 else np.concatenate([c, np.zeros(sys.M)])


@dataclass
class BosonicReport:
    value: float
    positive_weight: float
    leakage: float


def packet_bosonic_check(packet, sys: ModeSystem) -> BosonicReport:
    """``[A, A^dag] = sum_k |c_k|^2`` for the resampled packet.

    In the continuum this equals the positive-frequency weight; the
    difference (``leakage``) is spectral weight outside the band.
    """
    from .packet import positive_frequency_weight

    c = resample_packet(packet, sys)
    val = float(np.sum(np.abs(c) ** 2))
    w = positive_frequency_weight(packet)
    return BosonicReport(val, w, w - val)
