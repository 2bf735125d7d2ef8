"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run directly (``python tests/test_acceptance.py``) or under pytest, where
the lines are repeated in the terminal summary.  Criteria 1, 4 and 12 are
expected to fail; see the decisions ledger for the analysis.
"""

import json
import math
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tdqo.fieldconv import (
    calibrate_hilbert_sign,
    hilbert_pair_deviation,
    photon_flux,
    quadratures_from_voltage,
    voltage_from_quadratures,
)
from tdqo.opalgebra import ModeSystem, SingleParticleRep, commutator_suite, fock_commutator_check, packet_state
from tdqo.oracle import pv_quadrature_oracle
from tdqo.packet import Gaussian, chi_closed_form_exponential, compute_chi, compute_psi, make_packet
from tdqo.states import StateSpec, mean_voltage, moment_report, uncertainty_margin, vacuum_covariance, variance_trace
from tdqo.transforms import PhysConsts, Signal, TimeGrid, half_order_convolve, hilbert_paper
from tdqo.verification import random_bandlimited, signal_corpus


def record(n: int, ok: bool, text: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_near_singular_law(exp_packet):
    t0 = time.perf_counter()
    rep = moment_report(StateSpec.fock(exp_packet, 1))
    elapsed = time.perf_counter() - t0
    t = rep.t
    v = np.asarray(rep.var_v_subtracted.samples)
    c = PhysConsts()
    errs = {}
    for side, sel in (("t>tau", (t >= 0.002) & (t <= 0.02)), ("t<tau", (t <= -0.002) & (t >= -0.02))):
        law = c.Z * c.hbar / (4 * math.pi * np.abs(t[sel]) * 1.0)
        errs[side] = float(np.max(np.abs(v[sel] / law - 1)))
    worst = max(errs.values())
    ok = worst <= 0.10 and elapsed < 60
    record(1, ok, f"max rel dev {worst:.3g} (t>tau {errs['t>tau']:.3g}, t<tau {errs['t<tau']:.3g}) <= 0.1, {elapsed:.1f}s < 60s")
    assert ok


def test_criterion_02_coherent_identity(exp_packet, exp_chi, gauss_packet, gauss_chi):
    t0 = time.perf_counter()
    worst = 0.0
    for p, chi in ((exp_packet, exp_chi), (gauss_packet, gauss_chi)):
        vac = float(vacuum_covariance(p.grid, 0.0))
        for a in (1.0, 1j, 0.3 - 0.7j):
            s = StateSpec.coherent(p, a)
            m = np.asarray(mean_voltage(s, chi=chi).samples)
            var = np.asarray(variance_trace(s, chi=chi).samples)
            r = np.abs(var - m * m)
            # the sample at the exponential jump is singular and reported as NaN
            worst = max(worst, float(np.nanmax(r)) / vac)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 60
    record(2, ok, f"|var_sub - mean^2| / vac = {worst:.3g} <= 1e-9")
    assert ok


def test_criterion_03_fock_linearity(exp_packet, exp_chi):
    m = np.asarray(mean_voltage(StateSpec.fock(exp_packet, 1), chi=exp_chi).samples)
    v1 = np.asarray(variance_trace(StateSpec.fock(exp_packet, 1), chi=exp_chi).samples)
    v2 = np.asarray(variance_trace(StateSpec.fock(exp_packet, 2), chi=exp_chi).samples)
    f = np.isfinite(v1)
    lin = float(np.max(np.abs(v2[f] - 2 * v1[f]) / np.abs(v1[f]).max()))
    ok = not np.any(m) and lin <= 1e-12
    record(3, ok, f"max |mean| = {np.max(np.abs(m)):.3g}, N=2 vs 2 x N=1 rel {lin:.3g} <= 1e-12")
    assert ok


def test_criterion_04_chi_cross_validation(exp_chi):
    t = exp_chi.t
    s = np.asarray(exp_chi.chi.samples)
    sel = (np.abs(t) >= 0.1) & (np.abs(t) <= 5.0)
    printed = chi_closed_form_exponential(1.0, t[sel])
    closed = float(np.max(np.abs(s[sel] - printed) / np.abs(s[sel])))
    ratios = []
    for kw in (dict(sigma=1.0, f0=2.0, center=0.0), dict(sigma=0.5, f0=3.0, center=0.7)):
        p = make_packet(Gaussian(**kw), TimeGrid.centered(4096, 0.01))
        phi = np.abs(np.asarray(p.phi.samples))
        idx = np.flatnonzero(phi >= 1e-3 * phi.max())[::4]
        fp = compute_chi(p, times=p.grid.t[idx])
        psi = np.asarray(compute_psi(p).psi.samples)[idx] * p.norm_factor
        ratios.append(np.abs(fp) / np.abs(psi))
    r = np.concatenate(ratios)
    ratio = float(np.max(np.abs(r / (8 * math.pi) - 1)))
    ok = closed <= 1e-3 and ratio <= 1e-3
    record(4, ok, f"closed form rel err {closed:.3g} <= 1e-3; |chi|/|psi| vs 8 pi rel {ratio:.3g} <= 1e-3")
    assert ok


def test_criterion_05_hilbert_pair():
    s = calibrate_hilbert_sign()
    rng = np.random.default_rng(55)
    g = TimeGrid(4096, 1e-3)
    worst = 0.0
    for _ in range(20):
        v = random_bandlimited(g.n, rng, lo=8, hi_frac=0.3)
        assert abs(v.mean()) < 1e-15
        pair = quadratures_from_voltage(Signal(g, v, "volts"))
        worst = max(worst, hilbert_pair_deviation(pair, s))
    ok = worst <= 1e-9
    record(5, ok, f"sign {s:+d}, sup |q - s H(p)/pi| / |p| = {worst:.3g} <= 1e-9")
    assert ok


def test_criterion_06_sinusoid_flux():
    c = PhysConsts(Z=50.0, h=2.0)
    g = TimeGrid(8192, 1 / 8192)
    V0, f0 = 0.8, 123.0
    n = np.asarray(photon_flux(quadratures_from_voltage(Signal(g, V0 * np.cos(2 * np.pi * f0 * g.t), "volts"), c)).n.samples)
    mid = n[g.n // 4 : 3 * g.n // 4]
    rsd = float(np.std(mid) / np.mean(mid))
    lvl = float(abs(np.mean(mid) / (V0**2 / (c.Z * c.h * f0)) - 1))
    ok = rsd <= 1e-6 and lvl <= 1e-6
    record(6, ok, f"rel std {rsd:.3g} <= 1e-6, level rel err {lvl:.3g} <= 1e-6")
    assert ok


def test_criterion_07_round_trip():
    rng = np.random.default_rng(77)
    g = TimeGrid(4096, 1e-3)
    worst = 0.0
    for _ in range(10):
        v = random_bandlimited(g.n, rng)
        pair = quadratures_from_voltage(Signal(g, v, "volts"))
        back = np.asarray(voltage_from_quadratures(pair).samples)
        worst = max(worst, float(np.max(np.abs(back - v)[pair.valid])))
    ok = worst <= 1e-8
    record(7, ok, f"sup |v' - v| = {worst:.3g} <= 1e-8")
    assert ok


def test_criterion_08_commutators():
    t0 = time.perf_counter()
    worst = 0.0
    for M, nm in ((4, 3), (6, 2)):
        worst = max(worst, commutator_suite(ModeSystem(M, nm, 1.0)).max_residual)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 120
    record(8, ok, f"max residual {worst:.3g} <= 1e-12, {elapsed:.1f}s < 120s")
    assert ok


def test_criterion_09_time_energy_commutator():
    rep = SingleParticleRep(1024, 1.0)
    sp_worst = max(rep.residual(rep.gaussian(c, w)) for c in (256, 384, 512, 640, 768) for w in (20, 50))
    sys_ = ModeSystem(6, 2, 1.0)
    small = SingleParticleRep(6, 1.0)
    states = {f"sv{r}": packet_state(sys_, small.min_residual_packet(r), "fock", 1) for r in (0, 1)}
    fock_worst = max(r.residual for r in fock_commutator_check(sys_, states))
    c = np.zeros(6)
    c[3] = 1
    gap = fock_commutator_check(sys_, {"bin": packet_state(sys_, c, "fock", 1)})[0].expectation_gap
    single_bin_fails = gap >= 0.5
    ok = sp_worst <= 1e-3 and fock_worst <= 5e-2 and single_bin_fails
    record(9, ok, f"single-particle {sp_worst:.3g} <= 1e-3, Fock {fock_worst:.3g} <= 5e-2, single-bin gap {gap:.3g} (fails as required)")
    assert ok


def test_criterion_10_uncertainty():
    s2 = ModeSystem(6, 2, 1.0)
    s3 = ModeSystem(6, 3, 1.0)
    small = SingleParticleRep(6, 1.0)
    c0, c1 = small.min_residual_packet(0), small.min_residual_packet(1)
    cases = [
        (s2, packet_state(s2, c0, "fock", 1)),
        (s2, packet_state(s2, c1, "fock", 1)),
        (s3, packet_state(s3, c0, "fock", 2)),
        (s3, packet_state(s3, c0, "coherent", alpha=0.5)),
        (s3, packet_state(s3, c0, "coherent", alpha=1.0)),
    ]
    margins = [uncertainty_margin(v, s).margin / s.hbar for s, v in cases]
    ok = min(margins) >= 0
    record(10, ok, f"min margin {min(margins):.3g} hbar >= 0 over {len(cases)} states")
    assert ok


def test_criterion_11_pair_table():
    g, corpus = signal_corpus()
    routes = {
        "1/t": lambda s: hilbert_paper(s),
        "1/sqrt|t|": lambda s: half_order_convolve(s, "even"),
        "sgn/sqrt|t|": lambda s: half_order_convolve(s, "odd"),
        "H/sqrt(t)": lambda s: half_order_convolve(s, "forward"),
    }
    idx = np.linspace(g.n * 0.35, g.n * 0.65, 4).astype(int)
    worst = {}
    for kern, route in routes.items():
        w = 0.0
        for fn, x, sup in corpus:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                y = np.asarray(route(Signal(g, x)).samples)
            for j in idx:
                ref = pv_quadrature_oracle(fn, kern, float(g.t[j]), support=sup, tol=1e-11)
                w = max(w, abs(y[j] - ref) / np.max(np.abs(y)))
        worst[kern] = w
    m = max(worst.values())
    ok = m <= 1e-5
    record(11, ok, f"max spectral-vs-oracle residual {m:.3g} <= 1e-5 over {len(routes)} kernels")
    assert ok


def test_criterion_12_verify_all(tmp_path):
    out = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "tdqo.cli", "verify", "all", "--report", str(out)], capture_output=True, text=True
    )
    doc = json.loads(out.read_text())
    listed = sorted(int(k) for k in doc["criteria"])
    measured = all(c["measured"] is not None or c["informational"] for c in doc["checks"])
    failing = [k for k, v in doc["criteria"].items() if not v]
    ok = proc.returncode == 0 and listed == list(range(1, 13)) and measured
    record(12, ok, f"exit {proc.returncode} (failing criteria {', '.join(failing) or 'none'}), criteria listed {listed[0]}..{listed[-1]}")
    assert listed == list(range(1, 13)) and measured
    assert proc.returncode == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
