import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from tdqo.opalgebra import ModeSystem, SingleParticleRep, packet_state
from tdqo.packet import ExponentialDecay, Gaussian, auto_t0, make_packet
from tdqo.states import (
    StateSpec,
    arrival_stats,
    energy_mean,
    mean_voltage,
    moment_report,
    response,
    uncertainty_margin,
    vacuum_covariance,
    variance_trace,
    voltage_covariance,
)
from tdqo.transforms import PhysConsts, TimeGrid


def test_statespec_validation(gauss_packet):
    with pytest.raises(ValueError):
        StateSpec.fock(gauss_packet, 0)
    with pytest.raises(ValueError):
        StateSpec("squeezed", gauss_packet)
    with pytest.raises(ValueError):
        StateSpec.coherent(gauss_packet, complex("nan"))
    assert StateSpec.coherent(gauss_packet, 1 - 2j).n_mean == pytest.approx(5.0)
    assert StateSpec.vacuum(gauss_packet).n_mean == 0.0


def test_fock_and_vacuum_means_are_exact_zeros(exp_packet):
    for st_ in (StateSpec.fock(exp_packet, 3), StateSpec.vacuum(exp_packet)):
        assert not np.any(np.asarray(mean_voltage(st_).samples))


def test_coherent_mean_rotates_with_phase(gauss_packet, gauss_chi):
    # <v> = c Im[alpha conj(w)] so alpha -> i alpha maps Im to Re
    m1 = np.asarray(mean_voltage(StateSpec.coherent(gauss_packet, 1.0), chi=gauss_chi).samples)
    mi = np.asarray(mean_voltage(StateSpec.coherent(gauss_packet, 1j), chi=gauss_chi).samples)
    w = gauss_chi.voltage_response
    c = math.sqrt(0.5) / (4 * math.pi)
    assert np.allclose(m1, c * np.imag(np.conj(w)), atol=0)
    assert np.allclose(mi, c * np.real(np.conj(w)), atol=1e-15 * np.max(np.abs(w)))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_coherent_variance_is_mean_squared(re, im):
    g = TimeGrid.centered(512, 0.05)
    p = make_packet(Gaussian(1.0, 2.0), g)
    from tdqo.packet import compute_chi

    chi = compute_chi(p, "spectral")
    s = StateSpec.coherent(p, complex(re, im))
    m = np.asarray(mean_voltage(s, chi=chi).samples)
    v = np.asarray(variance_trace(s, chi=chi).samples)
    assert np.max(np.abs(v - m * m)) <= 1e-12 * max(np.max(m * m), 1e-300)


def test_phase_averaged_coherent_matches_fock(gauss_packet, gauss_chi):
    # Im^2 + Re^2 = |.|^2: var(alpha) + var(i alpha) = 2 var(Fock |alpha|^2)
    a = 1.3
    v1 = np.asarray(variance_trace(StateSpec.coherent(gauss_packet, a), chi=gauss_chi).samples)
    v2 = np.asarray(variance_trace(StateSpec.coherent(gauss_packet, 1j * a), chi=gauss_chi).samples)
    vf = np.asarray(variance_trace(StateSpec.fock(gauss_packet, 1), chi=gauss_chi).samples) * a * a
    assert np.allclose(v1 + v2, 2 * vf, rtol=1e-12, atol=0)


def test_fock_variance_linear(exp_packet, exp_chi):
    v1 = np.asarray(variance_trace(StateSpec.fock(exp_packet, 1), chi=exp_chi).samples)
    v5 = np.asarray(variance_trace(StateSpec.fock(exp_packet, 5), chi=exp_chi).samples)
    ok = np.isfinite(v1)
    assert np.array_equal(np.isfinite(v5), ok)
    assert np.max(np.abs(v5[ok] - 5 * v1[ok])) <= 1e-13 * np.max(v5[ok])


def test_near_singular_right_side(exp_packet, exp_chi):
    v = np.asarray(variance_trace(StateSpec.fock(exp_packet, 1), chi=exp_chi).samples)
    t = exp_chi.t
    sel = (t >= 0.002) & (t <= 0.02)
    law = 1 / (8 * math.pi**2 * t[sel])
    assert np.max(np.abs(v[sel] / law - 1)) < 0.01


def test_near_singular_left_side_exact_ratio(exp_packet, exp_chi):
    # for t < 0 the ratio to the 1/|t| law is [1 - sqrt(2 pi |t|) erfcx(sqrt(|t|/2)) / 2]^2
    v = np.asarray(variance_trace(StateSpec.fock(exp_packet, 1), chi=exp_chi).samples)
    t = exp_chi.t
    sel = (t <= -0.002) & (t >= -0.02)
    a = np.abs(t[sel])
    ratio = v[sel] * 8 * math.pi**2 * a
    ref = (1 - np.sqrt(2 * math.pi * a) * special.erfcx(np.sqrt(a / 2)) / 2) ** 2
    assert np.max(np.abs(ratio - ref)) < 1e-9
    # the deviation from the bare law is therefore 29% at |t| = 0.02
    assert 1 - ref[0] == pytest.approx(0.2925, abs=1e-3)


@pytest.mark.parametrize("delta", [0.0, 0.013, 0.5, 2.7])
def test_vacuum_covariance_against_quadrature(delta):
    g = TimeGrid(64, 0.1)
    F = g.f_max
    ref, _ = integrate.quad(lambda f: f * math.cos(2 * math.pi * f * delta), 0, F, epsabs=1e-13, limit=200)
    c = PhysConsts(Z=3.0, h=2.0)
    assert float(vacuum_covariance(g, delta, c)) == pytest.approx(0.5 * 3.0 * 2.0 * ref, rel=1e-10, abs=1e-12)


def test_vacuum_variance_is_zh_f_squared_over_four():
    g = TimeGrid(16, 0.01)
    assert float(vacuum_covariance(g, 0.0)) == pytest.approx(g.f_max**2 / 4)


def test_pointwise_covariance_matches_grid(exp_packet, exp_chi):
    s = StateSpec.fock(exp_packet, 2)
    idx = np.array([7000, 9000, 12000])
    t = exp_chi.t[idx]
    diag = voltage_covariance(s, t, t)
    grid = np.asarray(variance_trace(s, chi=exp_chi).samples)[idx]
    assert np.allclose(diag, grid, rtol=1e-12)
    off = voltage_covariance(s, t[0], t[1])
    w = exp_chi.voltage_response[idx]
    assert off == pytest.approx(2 / (64 * math.pi**2) * np.real(w[0] * np.conj(w[1])), rel=1e-12)


def test_band_limited_mode_renormalizes(exp_packet):
    chi, w = response(exp_packet, "band-limited")
    assert w == pytest.approx(0.5, abs=1e-12)
    from tdqo.packet import compute_chi

    base = compute_chi(exp_packet, "spectral", allow_partial_band=True)
    assert np.allclose(np.asarray(chi.chi.samples), np.asarray(base.chi.samples) / math.sqrt(0.5))
    with pytest.raises(ValueError):
        response(exp_packet, "band-limited", route="finite-part")
    with pytest.raises(ValueError):
        response(exp_packet, "classical")


def test_moment_report_metadata(exp_packet):
    p = make_packet(ExponentialDecay(1.0), TimeGrid(8192, 0.01, auto_t0(ExponentialDecay(1.0), 8192, 0.01)), tau=2.0)
    rep = moment_report(StateSpec.coherent(p, 0.5j), PhysConsts.si())
    md = rep.metadata
    for k in ("mode", "state", "N", "alpha", "tau", "f_max", "Z", "h", "version", "positive_frequency_weight", "route"):
        assert k in md
    assert md["route"] == "finite-part" and md["tau"] == 2.0 and md["Z"] == 50.0
    assert np.allclose(rep.t, p.grid.t + 2.0)
    res = rep.coherent_residual()
    ok = np.isfinite(res)
    assert np.sum(~ok) == 1
    assert np.max(np.abs(res[ok])) <= 1e-9 * float(rep.vac_var.samples[0])


def test_energy_of_states():
    p = make_packet(Gaussian(1.0, 10.0), TimeGrid.centered(4096, 0.01))
    assert energy_mean(StateSpec.fock(p, 2))[0] == pytest.approx(20.0, rel=1e-10)
    assert energy_mean(StateSpec.coherent(p, 2.0), PhysConsts(h=3.0))[0] == pytest.approx(120.0, rel=1e-10)
    assert energy_mean(StateSpec.vacuum(p)) == (0.0, 0.0)


def test_arrival_of_delayed_exponential():
    sh = ExponentialDecay(2.0)
    p = make_packet(sh, TimeGrid(2**15, 0.01, auto_t0(sh, 2**15, 0.01)), tau=5.0)
    rep = arrival_stats(StateSpec.fock(p, 3))
    assert rep.mean_arrival == pytest.approx(7.0, abs=1e-4)
    assert rep.intra_pulse_spread == pytest.approx(2.0, abs=1e-4)
    assert rep.theta_mean == pytest.approx(3 * rep.mean_arrival)
    assert rep.theta_variance is None


def test_oracle_theta_scales_with_photon_number():
    sh = ExponentialDecay(1.0)
    p = make_packet(sh, TimeGrid(8192, 0.01, auto_t0(sh, 8192, 0.01)))
    rep = arrival_stats(StateSpec.fock(p, 3), oracle=True)
    assert rep.oracle["theta_ratio"] == pytest.approx(3.0, rel=1e-9)
    assert rep.oracle["N_normal"] == pytest.approx(3.0, rel=1e-12)
    assert rep.theta_variance > 0
    assert rep.provenance["theta_variance"] == "matrix oracle"


def _fock_corpus():
    sys = ModeSystem(6, 2, 1.0)
    sp = SingleParticleRep(6, 1.0)
    return sys, [sp.min_residual_packet(r) for r in (0, 1)]


def test_uncertainty_margin_on_corpus():
    sys, packets = _fock_corpus()
    for c in packets:
        u = uncertainty_margin(packet_state(sys, c, "fock", 1), sys)
        assert u.margin >= 0
        assert u.robertson_margin >= -1e-12
        assert not u.h_eigenstate_like


def test_single_bin_state_is_flagged():
    sys, _ = _fock_corpus()
    c = np.zeros(6)
    c[2] = 1
    u = uncertainty_margin(packet_state(sys, c, "fock", 1), sys)
    assert u.h_eigenstate_like
    assert u.moments.H_var == pytest.approx(0.0, abs=1e-12)
