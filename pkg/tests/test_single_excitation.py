import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from chainmapper.chainmap import (DiscretizedMeasure, default_node_count,
                                  discretize, lightcone_length,
                                  recurrence_coefficients)
from chainmapper.errors import ParameterError
from chainmapper.single_excitation import (TridiagonalHamiltonian,
                                           WavepacketTrajectory,
                                           beating_period, default_fit_window,
                                           fit_decay_rate, front_position,
                                           front_speed, localization_fraction,
                                           propagate, star_oracle)
from chainmapper.spectral import Lorentzian, Ohmic


def uniform_chain(n, kappa=1.0, omega=0.0):
    return TridiagonalHamiltonian(np.full(n, omega), np.full(n - 1, kappa))


class TestPropagate:
    def test_two_site_rabi(self):
        # p1(t) = cos^2(kappa t) for a degenerate dimer
        k = 0.7
        h = uniform_chain(2, kappa=k)
        times = np.linspace(0, 5, 101)
        traj = propagate(h, np.array([1.0, 0.0]), times)
        assert np.abs(traj.populations[:, 0] - np.cos(k * times) ** 2).max() < 1e-12

    def test_semi_infinite_bessel_front(self):
        # open uniform chain before boundary returns: method of images gives
        # p_x(t) = [J_{x-1}(2kt) + J_{x+1}(2kt)]^2
        n, k = 60, 1.0
        h = uniform_chain(n, kappa=k)
        psi0 = np.zeros(n)
        psi0[0] = 1.0
        times = np.linspace(0.0, 10.0, 41)  # front reaches ~site 20
        traj = propagate(h, psi0, times)
        for xi in (1, 3, 8):
            expect = (jv(xi - 1, 2 * k * times) + jv(xi + 1, 2 * k * times)) ** 2
            assert np.abs(traj.populations[:, xi - 1] - expect).max() < 1e-10

    def test_unitarity(self):
        sd = Ohmic(1.0, 1.0, 100.0, hard_cutoff=1000.0)
        chain = recurrence_coefficients(discretize(sd, 200), 40)
        h = TridiagonalHamiltonian.from_chain(chain)
        psi0 = np.zeros(40)
        psi0[0] = 1.0
        traj = propagate(h, psi0, np.linspace(0, 0.2, 101))
        assert np.abs(traj.total_population() - 1.0).max() < 1e-10

    def test_time_reversal(self):
        h = uniform_chain(12, kappa=0.9, omega=0.3)
        psi0 = np.zeros(12)
        psi0[0] = 1.0
        fwd = propagate(h, psi0, np.array([0.0, 1.3]))
        bwd = propagate(h, psi0, np.array([0.0, -1.3]))
        assert np.allclose(fwd.populations, bwd.populations, atol=1e-13)

    def test_truncation_flag_when_front_wraps(self):
        h = uniform_chain(10, kappa=1.0)
        psi0 = np.zeros(10)
        psi0[0] = 1.0
        traj = propagate(h, psi0, np.linspace(0, 50, 51))
        assert traj.metadata["truncation_warning"]

    def test_requires_normalized_state(self):
        h = uniform_chain(4)
        with pytest.raises(ParameterError):
            propagate(h, np.array([1.0, 1.0, 0.0, 0.0]), np.array([0.0]))

    def test_amplitudes_kept_on_request(self):
        h = uniform_chain(4)
        psi0 = np.zeros(4)
        psi0[0] = 1.0
        traj = propagate(h, psi0, np.array([0.0, 0.5]), keep_amplitudes=True)
        assert traj.amplitudes.shape == (2, 4)
        assert np.allclose(np.abs(traj.amplitudes) ** 2, traj.populations)


class TestStarOracle:
    def test_matches_chain_at_full_rank(self):
        # N = M chain is unitarily equivalent to the star
        sd = Lorentzian(60.0, 1.0, 100.0, hard_cutoff=1000.0)
        m = discretize(sd, 60)
        chain = recurrence_coefficients(m, len(m), headroom=1.0)
        h = TridiagonalHamiltonian.from_chain(chain)
        psi0 = np.zeros(len(m))
        psi0[0] = 1.0
        times = np.linspace(0, 0.05, 51)
        traj = propagate(h, psi0, times)
        star = star_oracle(m, times)
        assert np.abs(traj.populations[:, 0] - star).max() < 1e-12

    def test_initial_value(self):
        m = DiscretizedMeasure(np.array([1.0, 2.0]), np.array([0.3, 0.7]))
        assert star_oracle(m, np.array([0.0]))[0] == pytest.approx(1.0)


class TestDecayFit:
    def test_gamma_10_within_tolerance(self):
        sd = Lorentzian(60.0, 10.0, 100.0, hard_cutoff=1000.0)
        L = lightcone_length(sd.support, 0.2)
        chain = recurrence_coefficients(discretize(sd, default_node_count(L)), L)
        h = TridiagonalHamiltonian.from_chain(chain)
        psi0 = np.zeros(L)
        psi0[0] = 1.0
        times = np.linspace(0, 0.2, 801)
        traj = propagate(h, psi0, times)
        rate = fit_decay_rate(times, traj.populations[:, 0],
                              default_fit_window(10.0, 0.2))
        assert rate == pytest.approx(10.0, rel=0.1)

    def test_narrow_line_via_star(self):
        # gamma = 0.001 needs t ~ 1500; the star picture gives p1 directly
        sd = Lorentzian(60.0, 0.001, 100.0, hard_cutoff=1000.0)
        m = discretize(sd, 2000)
        times = np.linspace(0, 1500.0, 2001)
        rate = fit_decay_rate(times, star_oracle(m, times), (0.0, 1500.0))
        assert rate == pytest.approx(0.001, rel=0.02)

    def test_window_validation(self):
        times = np.linspace(0, 1, 11)
        surv = np.exp(-times)
        with pytest.raises(ParameterError):
            fit_decay_rate(times, surv, (0.9, 0.91))  # < 2 samples
        with pytest.raises(ParameterError):
            fit_decay_rate(times, -surv, (0.0, 1.0))


class TestFrontDiagnostics:
    def test_front_speed_uniform_chain(self):
        # Lieb-Robinson-style front moves at 2 kappa
        n, k = 220, 1.0
        h = uniform_chain(n, kappa=k)
        psi0 = np.zeros(n)
        psi0[0] = 1.0
        times = np.linspace(0.0, 90.0, 46)
        traj = propagate(h, psi0, times)
        speed = front_speed(traj, threshold=1e-3)
        assert speed == pytest.approx(2.0 * k, rel=0.1)

    def test_front_position_monotone(self):
        h = uniform_chain(80)
        psi0 = np.zeros(80)
        psi0[0] = 1.0
        traj = propagate(h, psi0, np.linspace(0, 30, 16))
        pos = front_position(traj, threshold=1e-3)
        assert (np.diff(pos) >= 0).all()
        assert pos[0] == 1

    def test_localization_fraction(self):
        h = uniform_chain(3, kappa=0.5)
        psi0 = np.array([1.0, 0.0, 0.0])
        traj = propagate(h, psi0, np.array([0.0, 1.0]))
        assert localization_fraction(traj, 3, 0.0) == pytest.approx(1.0)
        frac2 = localization_fraction(traj, 2, 1.0)
        assert 0.0 < frac2 <= 1.0

    def test_beating_period_dimer(self):
        k = 0.8
        h = uniform_chain(2, kappa=k)
        times = np.linspace(0, 20, 4001)
        traj = propagate(h, np.array([1.0, 0.0]), times)
        period = beating_period(times, traj.populations[:, 0])
        assert period == pytest.approx(np.pi / k, rel=1e-3)


class TestCsvExport:
    def test_header_and_round_trip(self):
        h = uniform_chain(3)
        psi0 = np.array([1.0, 0.0, 0.0])
        traj = propagate(h, psi0, np.linspace(0, 1, 5))
        buf = io.StringIO()
        traj.to_csv(buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == "t,p_1,p_2,p_3"
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1)
        assert data.shape == (5, 4)
        assert np.allclose(data[:, 1:], traj.populations)


@given(n=st.integers(min_value=2, max_value=25),
       seed=st.integers(min_value=0, max_value=9999),
       t=st.floats(min_value=0.0, max_value=20.0))
@settings(max_examples=50, deadline=None)
def test_unitarity_property(n, seed, t):
    rng = np.random.default_rng(seed)
    h = TridiagonalHamiltonian(rng.uniform(-2, 2, n), rng.uniform(0.1, 2, n - 1))
    psi0 = np.zeros(n)
    psi0[rng.integers(0, n)] = 1.0
    traj = propagate(h, psi0, np.array([t]))
    assert traj.total_population()[0] == pytest.approx(1.0, abs=1e-10)
    assert (traj.populations >= -1e-12).all()


@given(seed=st.integers(min_value=0, max_value=9999))
@settings(max_examples=30, deadline=None)
def test_energy_conserved_property(seed):
    rng = np.random.default_rng(seed)
    n = 12
    h = TridiagonalHamiltonian(rng.uniform(0, 3, n), rng.uniform(0.1, 1, n - 1))
    dense = np.diag(h.diag) + np.diag(h.offdiag, 1) + np.diag(h.offdiag, -1)
    psi0 = np.zeros(n)
    psi0[0] = 1.0
    traj = propagate(h, psi0, np.array([0.0, 3.7]), keep_amplitudes=True)
    e = [np.real(np.vdot(a, dense @ a)) for a in traj.amplitudes]
    assert e[0] == pytest.approx(e[1], abs=1e-10)
