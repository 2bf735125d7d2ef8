"""Voltage moments, energy and arrival statistics of packet states.

All voltage moments of vacuum, Fock and coherent states on a packet mode
are linear or quadratic in the response function.  With
``w(t) = -conj(chi(t))`` (see :attr:`ChiFunction.voltage_response`)::

    <v(t)>_alpha              = sqrt(Zh/2)/(4 pi) Im[alpha conj(w(t))]
    <v v>_N   - <v v>_vac     = Zh N/(64 pi^2) Re[w(t1) conj(w(t2))]
    <v v>_alpha - <v v>_vac   = Zh/(32 pi^2) Im[alpha conj w1] Im[alpha conj w2]

The vacuum correlator itself diverges with bandwidth and is evaluated
band-limited to the grid's Nyquist frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .opalgebra import ModeSystem, ThetaMoments, packet_state, resample_packet, theta_variance_oracle
from .packet import (
    ChiFunction,
    PacketError,
    PhotonPacket,
    compute_chi,
    energy_mean as _packet_energy,
    positive_frequency_weight,
)
from .transforms import PhysConsts, Signal, TimeGrid

MODES = ("idealized", "band-limited")


@dataclass(frozen=True)
class StateSpec:
    """Vacuum, Fock or coherent state of a packet mode.

    Use the :meth:`vacuum`, :meth:`fock` and :meth:`coherent` constructors.
    """

    kind: str
    mode: PhotonPacket
    N: int = 0
    alpha: complex = 0j

    def __post_init__(self):
        if self.kind not in ("vacuum", "fock", "coherent"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "fock" and (int(self.N) != self.N or self.N < 1):
            raise ValueError("Fock states need an integer N >= 1")
        if self.kind == "coherent" and not np.isfinite(complex(self.alpha)):
            raise ValueError("coherent amplitude must be finite")

    @classmethod
    def vacuum(cls, mode: PhotonPacket) -> "StateSpec":
        return cls("vacuum", mode)

    @classmethod
    def fock(cls, mode: PhotonPacket, N: int) -> "StateSpec":
        return cls("fock", mode, N=int(N))

    @classmethod
    def coherent(cls, mode: PhotonPacket, alpha: complex) -> "StateSpec":
        return cls("coherent", mode, alpha=complex(alpha))

    @property
    def n_mean(self) -> float:
        """Normal-ordered mean photon number."""
        if self.kind == "fock":
            return float(self.N)
        if self.kind == "coherent":
            return abs(self.alpha) ** 2
        return 0.0


def response(
    p: PhotonPacket,
    mode: str = "idealized",
    *,
    route: str | None = None,
    nthreads: int = 1,
) -> tuple[ChiFunction, float]:
    """Response function used by the moment formulas, and its scale factor.

    ``idealized`` keeps the full packet (finite-part route by default).
    ``band-limited`` keeps only ``f > 0`` content renormalized to unit
    weight, i.e. the spectral route divided by ``sqrt(weight)``.

    Returns
    -------
    chi : ChiFunction
    weight : float
        Positive-frequency weight of the packet.
    """
    w = positive_frequency_weight(p)
    if mode == "idealized":
        chi = compute_chi(p, route or "finite-part", nthreads=nthreads)
        return chi, w
    if mode != "band-limited":
        raise ValueError(f"mode must be one of {MODES}")
    if route not in (None, "spectral"):
        raise ValueError("band-limited mode uses the spectral route")
    chi = compute_chi(p, "spectral", allow_partial_band=True)
    scaled = chi.chi.with_samples(np.asarray(chi.chi.samples) / math.sqrt(w))
    return ChiFunction(scaled, p, "spectral"), w


def _w(chi: ChiFunction | np.ndarray) -> np.ndarray:
    if isinstance(chi, ChiFunction):
        return chi.voltage_response
    return -np.conj(np.asarray(chi, dtype=complex))


def mean_voltage(state: StateSpec, consts: PhysConsts = PhysConsts(), chi: ChiFunction | None = None) -> Signal:
    """Mean voltage trace ``<v(t_j + tau)>`` in the state.

    Vacuum and Fock states return exact zeros without evaluating ``chi``.
    """
    g = state.mode.grid
    if state.kind != "coherent":
        return Signal(g, np.zeros(g.n), "volts")
    if chi is None:
        chi, _ = response(state.mode)
    c = math.sqrt(consts.Z * consts.h / 2) / (4 * math.pi)
    return Signal(g, c * np.imag(state.alpha * np.conj(_w(chi))), "volts")


def _cov_values(state: StateSpec, w1: np.ndarray, w2: np.ndarray, consts: PhysConsts) -> np.ndarray:
    Zh = consts.Z * consts.h
    if state.kind == "vacuum":
        return np.zeros(np.broadcast(w1, w2).shape)
    if state.kind == "fock":
        return Zh * state.N / (64 * math.pi**2) * np.real(w1 * np.conj(w2))
    a = state.alpha
    return Zh / (32 * math.pi**2) * np.imag(a * np.conj(w1)) * np.imag(a * np.conj(w2))


def voltage_covariance(
    state: StateSpec,
    t1,
    t2,
    consts: PhysConsts = PhysConsts(),
    *,
    mode: str = "idealized",
) -> np.ndarray:
    """Vacuum-subtracted ``<v(t1) v(t2)>`` at lab times ``t1``, ``t2``.

    The response is evaluated pointwise by adaptive quadrature in idealized
    mode, or interpolated from the grid in band-limited mode.
    """
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if state.kind == "vacuum":
        return np.zeros(np.broadcast(t1, t2).shape)
    p = state.mode
    if mode == "idealized" and p.analytic:
        code_times = np.concatenate([t1.ravel(), t2.ravel()]) - p.tau
        vals = compute_chi(p, "finite-part", times=code_times)
        w1 = _w(vals[: t1.size]).reshape(t1.shape)
        w2 = _w(vals[t1.size :]).reshape(t2.shape)
    else:
        chi, _ = response(p, mode)
        w = chi.voltage_response
        tt = chi.t
        interp = lambda x: np.interp(x, tt, w.real) + 1j * np.interp(x, tt, w.imag)
        w1, w2 = interp(t1), interp(t2)
    return _cov_values(state, w1, w2, consts)


def variance_trace(state: StateSpec, consts: PhysConsts = PhysConsts(), chi: ChiFunction | None = None) -> Signal:
    """Grid-diagonal form of :func:`voltage_covariance`."""
    g = state.mode.grid
    if state.kind == "vacuum":
        return Signal(g, np.zeros(g.n), "dimensionless")
    if chi is None:
        chi, _ = response(state.mode)
    w = _w(chi)
    return Signal(g, _cov_values(state, w, w, consts), "dimensionless")


def vacuum_covariance(grid: TimeGrid, delta_t, consts: PhysConsts = PhysConsts()) -> np.ndarray:
    """Band-limited vacuum correlator ``(Zh/2) Re int_0^F f exp(-i 2 pi f delta) df``.

    With ``F = grid.f_max`` and ``x = 2 pi F delta`` the integral is
    ``F^2 [sin x / x + (cos x - 1) / x^2]``.

    Examples
    --------
    >>> g = TimeGrid(16, 0.5)
    >>> float(vacuum_covariance(g, 0.0))
    0.25
    """
    F = grid.f_max
    x = 2 * math.pi * F * np.asarray(delta_t, dtype=float)
    # np.sinc(y) = sin(pi y) / (pi y)
    core = np.sinc(x / math.pi) - 0.5 * np.sinc(x / (2 * math.pi)) ** 2
    return 0.5 * consts.Z * consts.h * F**2 * core


@dataclass
class MomentReport:
    """Mean, vacuum-subtracted variance and vacuum baseline on the lab grid."""

    t: np.ndarray
    mean_v: Signal
    var_v_subtracted: Signal
    vac_var: Signal
    metadata: dict = field(default_factory=dict)

    def coherent_residual(self) -> np.ndarray:
        """``var_sub - mean^2``, zero for coherent states."""
        return np.asarray(self.var_v_subtracted.samples) - np.asarray(self.mean_v.samples) ** 2


def moment_report(
    state: StateSpec,
    consts: PhysConsts = PhysConsts(),
    *,
    mode: str = "idealized",
    route: str | None = None,
    nthreads: int = 1,
) -> MomentReport:
    """Mean and variance traces of ``state``.

    Samples where the response is singular (a declared packet jump) are NaN.
    """
    p = state.mode
    g = p.grid
    meta = {
        "mode": mode,
        "state": state.kind,
        "N": state.N,
        "alpha": [state.alpha.real, state.alpha.imag],
        "tau": p.tau,
        "f_max": g.f_max,
        "Z": consts.Z,
        "h": consts.h,
        "version": __version__,
    }
    if state.kind == "vacuum":
        chi = None
        meta["positive_frequency_weight"] = positive_frequency_weight(p)
        meta["route"] = None
    else:
        chi, w = response(p, mode, route=route, nthreads=nthreads)
        meta["positive_frequency_weight"] = w
        meta["route"] = chi.route
    vac = float(vacuum_covariance(g, 0.0, consts))
    return MomentReport(
        t=g.t + p.tau,
        mean_v=mean_voltage(state, consts, chi),
        var_v_subtracted=variance_trace(state, consts, chi),
        vac_var=Signal(g, np.full(g.n, vac), "dimensionless"),
        metadata=meta,
    )


def energy_mean(state: StateSpec, consts: PhysConsts = PhysConsts()) -> tuple[float, float]:
    """Normal-ordered mean energy and its derivative in ``ln f_max``.

    See :func:`tdqo.packet.energy_mean`.
    """
    if state.kind == "vacuum":
        return 0.0, 0.0
    return _packet_energy(state.mode, state.n_mean, consts.h)


# -- arrival time ----------------------------------------------------------------


@dataclass
class ArrivalReport:
    mean_arrival: float
    intra_pulse_spread: float
    theta_mean: float
    n_mean: float
    theta_variance: float | None = None
    oracle: dict | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.intra_pulse_spread < 0:
            raise ValueError("spread must be non-negative")


def oracle_system(p: PhotonPacket, M: int = 3, n_max: int = 15, h: float = 1.0) -> tuple[ModeSystem, np.ndarray]:
    """Small mode system carrying a coarse image of the packet.

    Bins span ``[0, 2 f_c]`` where ``f_c`` is the packet's positive-frequency
    spectral centroid; coefficients are the packet spectrum at the bins.
    """
    from .transforms import forward_fourier

    X = forward_fourier(p.phi).bins
    f = p.grid.f
    pos = f > 0
    wts = np.abs(X[pos]) ** 2
    if wts.sum() == 0:
        raise PacketError("packet has no positive-frequency content")
    fc = float(np.sum(f[pos] * wts) / wts.sum())
    sys = ModeSystem(M, n_max, 2 * fc / M, h)
    c = resample_packet(p, sys)
    if np.linalg.norm(c) == 0:
        raise PacketError("packet spectrum vanishes on the oracle bins")
    return sys, c


def arrival_stats(state: StateSpec, *, oracle: bool = False, oracle_M: int = 3, oracle_n_max: int = 15) -> ArrivalReport:
    """Mean arrival time, intra-pulse spread and ``<theta>``.

    ``theta_mean`` is the normal-ordered ``<N> (tau + centroid)``.  With
    ``oracle=True`` the state is also built on a small mode system and the
    matrix moments of ``theta`` are attached; the oracle's ``<theta>`` is
    reported relative to its own one-photon value, so the ratio checks the
    ``<N>`` scaling independently of how coarsely the packet is resolved.
    """
    p = state.mode
    mean = p.tau + p.centroid
    rep = ArrivalReport(
        mean_arrival=mean,
        intra_pulse_spread=p.spread,
        theta_mean=state.n_mean * mean,
        n_mean=state.n_mean,
        provenance={
            "mean_arrival": "closed-form centroid",
            "intra_pulse_spread": "closed-form second moment",
            "theta_mean": "closed-form <N> x arrival",
        },
    )
    if oracle:
        sys, c = oracle_system(p, oracle_M, oracle_n_max)
        one = theta_variance_oracle(packet_state(sys, c, "fock", 1), sys)
        kind = {"vacuum": "vacuum", "fock": "fock", "coherent": "coherent"}[state.kind]
        mom = theta_variance_oracle(packet_state(sys, c, kind, max(state.N, 1), state.alpha), sys)
        rep.theta_variance = mom.theta_var
        rep.oracle = {
            "M": sys.M,
            "n_max": sys.n_max,
            "delta_f": sys.delta_f,
            "theta_normal": mom.theta_normal_mean,
            "theta_normal_one_photon": one.theta_normal_mean,
            # undefined when the one-photon <theta> sits at the grid origin
            "theta_ratio": (
                mom.theta_normal_mean / one.theta_normal_mean
                if abs(one.theta_normal_mean) > 1e-9 / sys.delta_f
                else None
            ),
            "N_normal": mom.N_normal,
            "theta_variance": mom.theta_var,
        }
        rep.provenance["theta_variance"] = "matrix oracle"
        rep.provenance["oracle"] = "matrix oracle"
    return rep


# -- uncertainty relation ---------------------------------------------------------


@dataclass
class UncertaintyReport:
    margin: float
    lhs: float
    bound: float
    robertson_margin: float
    symmetric_margin: float
    h_eigenstate_like: bool
    moments: ThetaMoments


def uncertainty_margin(state: np.ndarray, sys: ModeSystem) -> UncertaintyReport:
    """``sqrt(Var theta Var H) - (hbar/2) <N>`` for a state vector on ``sys``.

    ``margin`` uses normal-ordered ``<N>``, since the vacuum constants of
    the symmetric forms cancel inside ``[H, theta]``.  Also reported: the
    exact Robertson margin against ``|<[H, theta]>|/2`` and the margin
    against symmetric-ordered ``<N>``.  States whose commutator expectation
    falls below half of ``hbar <N>`` are flagged as H-eigenstate-like.
    """
    v = np.asarray(state, dtype=complex)
    mom = theta_variance_oracle(v, sys)
    hb = sys.hbar
    lhs = math.sqrt(max(mom.theta_var, 0.0) * max(mom.H_var, 0.0))
    C = sys.H @ (sys.theta @ v) - sys.theta @ (sys.H @ v)
    comm = complex(np.vdot(v, C))
    return UncertaintyReport(
        margin=lhs - 0.5 * hb * mom.N_normal,
        lhs=lhs,
        bound=0.5 * hb * mom.N_normal,
        robertson_margin=lhs - 0.5 * abs(comm),
        symmetric_margin=lhs - 0.5 * hb * mom.N_mean,
        h_eigenstate_like=bool(mom.N_normal > 0 and abs(comm) < 0.5 * hb * mom.N_normal),
        moments=mom,
    )
