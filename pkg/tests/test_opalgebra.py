import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdqo.opalgebra import (
    MAX_DIM,
    ModeSystem,
    SingleParticleRep,
    TruncationError,
    commutator_suite,
    fock_commutator_check,
    packet_bosonic_check,
    packet_state,
    resample_packet,
    theta_variance_oracle,
)
from tdqo.packet import Gaussian, make_packet
from tdqo.transforms import TimeGrid


@pytest.fixture(scope="module")
def sys42():
    return ModeSystem(4, 2, 0.5, h=2.0)


def test_dimensions_and_guard():
    s = ModeSystem(3, 2, 1.0)
    assert s.dim == 27 and s.n_modes == 3
    assert s.occupations.shape == (27, 3)
    assert len(s.safe) == 8
    with pytest.raises(TruncationError):
        ModeSystem(13, 1, 1.0)
    assert 2**12 == MAX_DIM
    with pytest.raises(TruncationError):
        ModeSystem(2, 0, 1.0)


def test_truncation_anomaly_is_confined_to_top_level():
    s = ModeSystem(1, 3, 1.0)
    c = (s.b(0) @ s.b(0).getH() - s.b(0).getH() @ s.b(0)).toarray()
    assert np.allclose(np.diag(c), [1, 1, 1, -3])


def test_basis_ordering_mode_zero_slowest():
    s = ModeSystem(2, 1, 1.0)
    assert s.occupations.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    v = np.zeros(4)
    v[0] = 1
    assert np.flatnonzero(s.b(0).getH() @ v).tolist() == [2]


def test_hamiltonian_spectrum(sys42):
    # E = h sum_k f_k (n_k + 1/2)
    occ = sys42.occupations
    E = sys42.h * (occ + 0.5) @ sys42.freqs
    assert np.allclose(sys42.H.diagonal().real, E, atol=1e-13)
    assert sys42.H.nnz == sys42.dim


def test_symmetric_minus_normal_constants(sys42):
    I = np.eye(sys42.dim)
    assert np.allclose((sys42.number_sym - sys42.number_normal).toarray(), 2.0 * I)
    # theta vacuum constant vanishes on the symmetric time grid
    assert np.allclose((sys42.theta - sys42.theta_normal).toarray(), 0)


@pytest.mark.parametrize("which", ["H", "N", "theta"])
def test_literal_forms_agree_below_cutoff(which):
    s = ModeSystem(3, 3, 0.7)
    canon = {"H": s.H, "N": s.number_sym, "theta": s.theta}[which].toarray()
    lit = s.literal_symmetric(which).toarray()
    low = np.flatnonzero(s.occupations.sum(axis=1) < s.n_max)
    assert np.allclose(canon[np.ix_(low, low)], lit[np.ix_(low, low)], atol=1e-12)


def test_theta_is_hermitian(sys42):
    th = sys42.theta
    assert abs(th - th.getH()).max() < 1e-14


def test_kernel_D_closed_form(sys42):
    dt = np.array([0.0, 0.13, -0.7, 2.0])
    direct = sys42.delta_f * np.exp(-2j * np.pi * np.outer(dt, sys42.freqs)).sum(axis=1)
    assert np.allclose(sys42.kernel_D(dt), direct, atol=1e-14)
    # D(0) = M delta_f
    assert sys42.kernel_D(0.0) == pytest.approx(2.0)


def test_time_operators_from_frequency_operators(sys42):
    t = 0.31
    a = sys42.a_time(t)
    ref = sum(np.exp(-2j * np.pi * f * t) * sys42.b(k) for k, f in enumerate(sys42.freqs)) * math.sqrt(sys42.delta_f)
    assert abs(a - ref).max() < 1e-14


@pytest.mark.parametrize("M, n_max", [(2, 3), (4, 2)])
def test_commutator_suite(M, n_max):
    rep = commutator_suite(ModeSystem(M, n_max, 0.8))
    assert set(rep.residuals) == {"frequency", "time", "directional", "localized", "directional_frequency", "evolution"}
    assert rep.ok, rep.residuals


def test_commutator_suite_detects_a_wrong_kernel(monkeypatch):
    s = ModeSystem(2, 2, 1.0)
    monkeypatch.setattr(ModeSystem, "kernel_D", lambda self, dt: 1.01 * self.delta_f * np.exp(-2j * np.pi * np.outer(np.atleast_1d(dt), self.freqs)).sum(axis=1).reshape(np.shape(dt)))
    assert not commutator_suite(s).ok


def test_backward_branch_needs_two_branches():
    with pytest.raises(ValueError):
        ModeSystem(2, 1, 1.0).a_freq(0, -1)
    with pytest.raises(ValueError):
        ModeSystem(2, 1, 1.0, branches=2).theta_normal


def test_evolution_of_ladder_operator(sys42):
    s = 0.37
    ev = sys42.evolve(sys42.b(1), s)
    assert abs(ev - np.exp(-2j * np.pi * sys42.freqs[1] * s) * sys42.b(1)).max() < 1e-14


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3).filter(
    lambda c: np.linalg.norm(c) > 1e-3))
def test_one_photon_state_has_unit_number(c):
    s = ModeSystem(3, 2, 1.0)
    v = packet_state(s, c, "fock", 1)
    mom = theta_variance_oracle(v, s)
    assert mom.N_normal == pytest.approx(1.0, abs=1e-12)
    assert mom.N_mean == pytest.approx(2.5, abs=1e-12)
    # <H_normal> = h sum |c_k|^2 f_k
    w = np.abs(np.asarray(c)) ** 2 / np.sum(np.abs(np.asarray(c)) ** 2)
    assert mom.H_normal_mean == pytest.approx(float(w @ s.freqs), rel=1e-12)


def test_fock_state_norm_and_limits():
    s = ModeSystem(2, 3, 1.0)
    v = packet_state(s, [1, 1j], "fock", 2)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert theta_variance_oracle(v, s).N_normal == pytest.approx(2.0)
    with pytest.raises(TruncationError):
        packet_state(s, [1, 0], "fock", 3)
    with pytest.raises(ValueError):
        packet_state(s, [1, 0, 0], "fock", 1)


def test_coherent_truncation_deficit():
    # cut at n_max-1 photons: <N> = sum n |a|^(2n)/n! / sum |a|^(2n)/n!
    s = ModeSystem(2, 3, 1.0)
    a = 0.5
    v = packet_state(s, [1, 0], "coherent", alpha=a)
    w = np.array([a ** (2 * n) / math.factorial(n) for n in range(3)])
    assert theta_variance_oracle(v, s).N_normal == pytest.approx(float(np.arange(3) @ w / w.sum()), rel=1e-12)


def test_oracle_rejects_states_outside_safe_subspace():
    s = ModeSystem(1, 2, 1.0)
    v = np.array([0, 0, 1.0])
    with pytest.raises(TruncationError):
        theta_variance_oracle(v, s)


def test_single_particle_interior_and_edge():
    rep = SingleParticleRep(256, 1.0)
    assert rep.residual(rep.gaussian(128, 12)) < 1e-3
    assert rep.residual(rep.gaussian(2, 3)) > 1.0
    assert complex(np.trace(rep.R)) == pytest.approx(-1j * rep.hbar * 256)


def test_single_particle_time_operator_is_hermitian():
    rep = SingleParticleRep(32, 0.5)
    assert np.allclose(rep.T, rep.T.conj().T, atol=1e-13)
    assert np.allclose(rep.F.conj().T @ rep.F, np.eye(32), atol=1e-12)


def test_fock_commutator_on_min_residual_packets():
    s = ModeSystem(6, 2, 1.0)
    sp_ = SingleParticleRep(6, 1.0)
    states = {f"sv{r}": packet_state(s, sp_.min_residual_packet(r), "fock", 1) for r in (0, 1)}
    res = {r.name: r for r in fock_commutator_check(s, states)}
    assert res["sv0"].residual < 1e-3
    assert res["sv1"].residual < 5e-2
    c = np.zeros(6)
    c[0] = 1
    single = fock_commutator_check(s, {"bin": packet_state(s, c, "fock", 1)})[0]
    assert single.expectation_gap == pytest.approx(1.0, abs=1e-12)


def test_resampled_packet_and_bosonic_weight():
    # spectral std 1/(8 pi) ~ 0.04 around 0.3, well inside 12 bins of 0.05
    p = make_packet(Gaussian(2.0, 0.3), TimeGrid.centered(4096, 0.01))
    s = ModeSystem(12, 1, 0.05)
    c = resample_packet(p, s)
    assert c.shape == (12,)
    rep = packet_bosonic_check(p, s)
    assert rep.value == pytest.approx(1.0, abs=1e-4)
    assert abs(rep.leakage) < 1e-4


def test_occupations_enumerate_product_basis():
    s = ModeSystem(2, 2, 1.0)
    assert [tuple(r) for r in s.occupations] == list(itertools.product(range(3), repeat=2))
