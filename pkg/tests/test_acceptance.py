"""Acceptance gate: the ten headline checks, one test (and one printed
PASS/FAIL line) each.  Everything here runs at desk scale; the slowest
criterion is the narrow-line decay fit at a few seconds."""
import time

import numpy as np
import pytest
from scipy.integrate import quad

from chainmapper.chainmap import (default_node_count, discretize,
                                  lightcone_length, recurrence_coefficients)
from chainmapper.cli import _build_density, figure_presets
from chainmapper.full_dynamics import (EvolutionControls, SpinBosonModel,
                                       build_model, convergence_sweep, evolve)
from chainmapper.single_excitation import (TridiagonalHamiltonian,
                                           default_fit_window, fit_decay_rate,
                                           front_speed, propagate, star_oracle)
from chainmapper.spectral import Lorentzian, Ohmic, Tabulated


def _report(num, ok, detail):
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


def test_01_asymptotic_coefficients():
    t0 = time.perf_counter()
    sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
    chain = recurrence_coefficients(discretize(sd, 400), 60)
    elapsed = time.perf_counter() - t0
    dw = np.abs(chain.omegas[19:] - 500.0).max()
    dk = np.abs(chain.kappas[19:] - 250.0).max()
    ok = dw < 5.0 and dk < 2.5 and elapsed < 1.0
    _report(1, ok, f"max|w_n-500|={dw:.3f} (<5), max|k_n-250|={dk:.3f} "
                   f"(<2.5) for n>=20, {elapsed:.2f}s (<1s)")


def test_02_shifted_legendre_oracle():
    t0 = time.perf_counter()
    flat = Tabulated(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    chain = recurrence_coefficients(discretize(flat, 400), 10)
    elapsed = time.perf_counter() - t0
    n = np.arange(1, 10)
    expect_k = np.sqrt(n**2 / (4.0 * (4.0 * n**2 - 1.0)))
    dw = np.abs(chain.omegas - 0.5).max()
    dk = np.abs(chain.kappas - expect_k).max()
    ok = dw < 1e-10 and dk < 1e-10 and elapsed < 0.1
    _report(2, ok, f"|w_n-1/2|={dw:.1e}, |k_n-closed form|={dk:.1e} "
                   f"(<1e-10), {elapsed*1e3:.0f}ms (<100ms)")


def test_03_kappa0_closed_form():
    sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
    chain = recurrence_coefficients(discretize(sd, 400), 10)
    expect = (1e4 / np.pi) * (1.0 - 11.0 * np.exp(-10.0))
    rel = abs(chain.kappa0**2 - expect) / expect
    ok = rel < 1e-8
    _report(3, ok, f"kappa0^2 rel err {rel:.2e} (<1e-8)")


def test_04_lorentzian_decay_rates():
    details = []
    ok = True
    for gamma, t_max in ((1.0, 1.5), (10.0, 0.2)):
        t0 = time.perf_counter()
        sd = Lorentzian(60.0, gamma, 100.0, hard_cutoff=1000.0)
        L = lightcone_length(sd.support, t_max)
        chain = recurrence_coefficients(
            discretize(sd, default_node_count(L)), L)
        psi0 = np.zeros(L)
        psi0[0] = 1.0
        times = np.linspace(0.0, t_max, 1501)
        traj = propagate(TridiagonalHamiltonian.from_chain(chain), psi0, times)
        rate = fit_decay_rate(times, traj.populations[:, 0],
                              default_fit_window(gamma, t_max))
        elapsed = time.perf_counter() - t0
        rel = abs(rate - gamma) / gamma
        ok = ok and rel < 0.10 and elapsed < 10.0
        details.append(f"gamma={gamma:g}: rate={rate:.4f} ({rel:.1%}), "
                       f"{elapsed:.1f}s")
    _report(4, ok, "; ".join(details) + " (tol 10%, <10s each)")


def test_05_star_chain_equivalence():
    # every preset measure at M=400, full-rank chain, |p1 difference| < 1e-8
    names = []
    for family in ("lorentz-T0", "lorentz-finiteT", "ohmic-T0", "ohmic-finiteT"):
        names += [c for c in figure_presets(family)]
    worst = 0.0
    times = np.linspace(0.0, 0.2, 101)
    for cfg in names:
        sd = _build_density(cfg.spectral)
        m = discretize(sd, 400)
        chain = recurrence_coefficients(m, len(m), headroom=1.0)
        psi0 = np.zeros(len(m))
        psi0[0] = 1.0
        traj = propagate(TridiagonalHamiltonian.from_chain(chain), psi0, times)
        dev = np.abs(traj.populations[:, 0] - star_oracle(m, times)).max()
        worst = max(worst, dev)
    ok = worst < 1e-8
    _report(5, ok, f"{len(names)} preset measures, worst max|p1_chain - "
                   f"p1_star| = {worst:.2e} (<1e-8)")


def test_06_front_speed_and_temperature_doubling():
    speeds = {}
    for T, t_max in ((0.0, 0.2), (300.0, 0.1)):
        sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
        if T > 0:
            sd = sd.thermalize(T)
        L = lightcone_length(sd.support, t_max)
        chain = recurrence_coefficients(
            discretize(sd, default_node_count(L)), L)
        psi0 = np.zeros(L)
        psi0[0] = 1.0
        times = np.linspace(0.0, t_max, 81)
        traj = propagate(TridiagonalHamiltonian.from_chain(chain), psi0, times)
        speeds[T] = front_speed(traj, threshold=1e-3)
    rel0 = abs(speeds[0.0] - 500.0) / 500.0
    ratio = speeds[300.0] / speeds[0.0]
    ok = rel0 < 0.10 and abs(ratio - 2.0) < 0.2
    _report(6, ok, f"T=0 speed {speeds[0.0]:.1f} vs 2*kappa_inf=500 "
                   f"({rel0:.1%}, tol 10%); T300/T0 ratio {ratio:.3f} "
                   f"(2 +- 10%)")


def test_07_number_conservation():
    worst = 0.0
    times = np.linspace(0.0, 0.2, 101)
    for family in ("lorentz-T0", "ohmic-T0", "ohmic-finiteT"):
        for cfg in figure_presets(family):
            sd = _build_density(cfg.spectral)
            L = lightcone_length(sd.support, times[-1])
            chain = recurrence_coefficients(
                discretize(sd, default_node_count(L)), L)
            psi0 = np.zeros(L)
            psi0[0] = 1.0
            traj = propagate(TridiagonalHamiltonian.from_chain(chain),
                             psi0, times)
            worst = max(worst, np.abs(traj.total_population() - 1.0).max())
    ok = worst < 1e-10
    _report(7, ok, f"worst |sum_x p_x - 1| = {worst:.2e} (<1e-10)")


def test_08_independent_boson_oracle():
    t0 = time.perf_counter()
    sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
    chain = recurrence_coefficients(discretize(sd, 400), 60)
    model = SpinBosonModel(delta=0.0, chain=chain, fock_dim=8)
    rec = evolve(model, EvolutionControls(t_max=0.05, dt=2e-4, chi_max=32,
                                          stride=5))
    oracle = []
    for t in rec.times:
        val, _ = quad(lambda w: sd.evaluate(w) * (1 - np.cos(w * t)) / w**2,
                      0.0, 1000.0, limit=400)
        oracle.append(0.5 * np.exp(-val))
    dev = np.abs(rec.coherence - np.array(oracle)).max()
    elapsed = time.perf_counter() - t0
    ok = dev < 1e-3
    _report(8, ok, f"L=60 d=8 chi=32 dt=2e-4 t<=0.05: max |coherence - "
                   f"closed form| = {dev:.2e} (<1e-3), {elapsed:.0f}s")


def test_09_mps_self_convergence():
    (cfg,) = figure_presets("full-ohmic-s1-T0")
    sd = _build_density(cfg.spectral)
    model = build_model(Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0), 0.0,
                        cfg.dynamics["delta"], t_max=0.01,
                        d=cfg.dynamics["fock_dim"])
    base = EvolutionControls(t_max=0.01, dt=cfg.dynamics["dt"],
                             chi_max=cfg.dynamics["chi_max"],
                             svd_cutoff=cfg.dynamics["svd_cutoff"], stride=5)
    rep_dt = convergence_sweep(model, base, [(0.5, 1.0, 0), (0.25, 1.0, 0)])
    d_half, d_quarter = rep_dt["sigma_x_deviation"]
    rep_chi = convergence_sweep(model, base, [(1.0, 2.0, 0)])
    d_chi = rep_chi["sigma_x_deviation"][0]
    ok = d_half < 4.0 * d_quarter and d_chi < 1e-3
    _report(9, ok, f"dt halving dev {d_half:.2e} < 4 x quartering dev "
                   f"{d_quarter:.2e}; chi doubling dev {d_chi:.2e} (<1e-3)")


def test_10_qualitative_reproductions():
    # (a) sub-Ohmic head accumulation at T=300 beats super-Ohmic by >= 2x
    heads = {}
    for s, d in ((0.5, 12), (2.0, 8)):
        model = build_model(Ohmic(1.0, s, 100.0, hard_cutoff=1000.0), 300.0,
                            70.0, t_max=0.02, d=d)
        rec = evolve(model, EvolutionControls(t_max=0.02, dt=2e-4, chi_max=64,
                                              stride=10))
        heads[s] = rec.occupations[-1, :3].sum()
    factor = heads[0.5] / heads[2.0]
    # (b) narrow Lorentzian confines excitation to the first two sites
    fracs = {}
    for T in (77.0, 300.0):
        model = build_model(Lorentzian(60.0, 0.001, 100.0, hard_cutoff=1000.0),
                            T, 70.0, t_max=0.03, d=12)
        rec = evolve(model, EvolutionControls(t_max=0.03, dt=2e-4, chi_max=64,
                                              stride=10))
        tot = rec.occupations.sum(axis=1)
        frac = rec.occupations[:, :2].sum(axis=1) / np.where(tot > 0, tot, 1.0)
        fracs[T] = frac[rec.times > 0.01].min()
    ok = factor >= 2.0 and fracs[77.0] >= 0.99 and fracs[300.0] >= 0.99
    _report(10, ok, f"sub/super-Ohmic head factor {factor:.1f} (>=2); "
                    f"site-1,2 fraction T=77: {fracs[77.0]:.5f}, "
                    f"T=300: {fracs[300.0]:.5f} (>=0.99)")
