"""Tests for the two-level annealing model."""

import math

import numpy as np
import pytest

from wscbench.instance import ValidationError
from wscbench.tts import is_unsolved
from wscbench.twolevel import (
    CurvePoint,
    double_scaling_curve,
    gap,
    hamiltonian,
    integrate_schrodinger,
    min_gap,
    noisy_success,
    tunneling_amplitude,
)


class TestHamiltonian:
    def test_amplitude_halves_per_two_sites(self):
        assert tunneling_amplitude(2) == 0.5
        assert tunneling_amplitude(4) == 0.25
        assert tunneling_amplitude(16) == 2.0**-8

    def test_endpoints(self):
        a = tunneling_amplitude(6)
        h0 = hamiltonian(0.0, 6)
        # At s=0 the Hamiltonian is minus a rank-one projector: the ground
        # state is (a, sqrt(1-a^2)) with energy -1, the other level sits at 0.
        gs = np.array([a, math.sqrt(1 - a * a)])
        np.testing.assert_allclose(h0 @ gs, -gs, atol=1e-15)
        ev = np.linalg.eigvalsh(h0)
        np.testing.assert_allclose(ev, [-1.0, 0.0], atol=1e-15)
        # At s=1 the valleys decouple and the target is (1, 0).
        np.testing.assert_allclose(hamiltonian(1.0, 6), np.diag([-1.0, 0.0]), atol=1e-15)

    def test_gap_matches_diagonalization(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            s = float(rng.random())
            n = int(rng.integers(1, 17))
            ev = np.linalg.eigvalsh(hamiltonian(s, n))
            assert gap(s, n) == pytest.approx(float(ev[1] - ev[0]), abs=1e-12)

    def test_min_gap_location_and_value(self):
        for n in (2, 8, 16):
            value, location = min_gap(n)
            assert value == tunneling_amplitude(n)
            assert location == 0.5
            # numerical check: nothing on a fine grid dips below, and the
            # closed form at 1/2 matches to full precision
            grid = np.linspace(0.45, 0.55, 4001)
            assert min(gap(s, n) for s in grid) >= value - 1e-10
            assert gap(0.5, n) == pytest.approx(value, abs=1e-10)

    def test_domain_checks(self):
        with pytest.raises(ValidationError):
            hamiltonian(-0.1, 4)
        with pytest.raises(ValidationError):
            gap(1.1, 4)
        with pytest.raises(ValidationError):
            tunneling_amplitude(0)


class TestIntegration:
    def test_norm_preserved(self):
        for n in (4, 12, 16):
            _, norm = integrate_schrodinger(n, 500.0, 0.01)
            assert abs(norm - 1.0) <= 1e-8

    def test_dt_refinement_converged(self):
        p_coarse, _ = integrate_schrodinger(12, 500.0, 0.01)
        p_fine, _ = integrate_schrodinger(12, 500.0, 0.005)
        assert abs(p_coarse - p_fine) < 1e-4

    def test_adiabatic_limit_small_system(self):
        # n = 2: gap 1/2, anneal time 500 is deeply adiabatic
        p, _ = integrate_schrodinger(2, 500.0, 0.01)
        assert p > 0.9999

    def test_diabatic_limit_large_system(self):
        # n = 16: min gap 2^-8; at T = 500 the crossing is mostly jumped
        p, _ = integrate_schrodinger(16, 500.0, 0.01)
        assert p < 0.05

    def test_short_anneal_stays_in_false_valley(self):
        p, _ = integrate_schrodinger(12, 0.5, 0.001)
        assert p < 0.01

    def test_validation(self):
        with pytest.raises(ValidationError):
            integrate_schrodinger(4, 0.0, 0.01)
        with pytest.raises(ValidationError):
            integrate_schrodinger(4, 1.0, 2.0)
        with pytest.raises(ValidationError):
            integrate_schrodinger(4, 1.0, -0.1)


class TestNoise:
    def test_exact_formula(self):
        assert noisy_success(0.5, 3, 0.1) == pytest.approx(0.5 * 0.9**3, rel=1e-15)
        assert noisy_success(1.0, 1, 0.0) == 1.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            noisy_success(0.5, 3, 1.0)
        with pytest.raises(ValidationError):
            noisy_success(0.5, 3, -0.1)
        with pytest.raises(ValidationError):
            noisy_success(1.5, 3, 0.1)
        with pytest.raises(ValidationError):
            noisy_success(0.5, 0, 0.1)


@pytest.fixture(scope="module")
def curve():
    return double_scaling_curve(n_max=16, t_ann=500.0, dt=0.01, noise=(0.0, 0.1))


class TestCurve:

    def test_shape(self, curve):
        assert len(curve) == 32
        assert all(isinstance(pt, CurvePoint) for pt in curve)
        assert {pt.q for pt in curve} == {0.0, 0.1}
        for pt in curve:
            assert pt.sqrt_n == pytest.approx(math.sqrt(pt.n))
            if pt.q == 0.0:
                assert pt.p_succ_noisy == pt.p_succ

    def test_noise_free_plateau_then_growth(self, curve):
        tts = {pt.n: pt.tts for pt in curve if pt.q == 0.0}
        # while p > 0.99 one repetition suffices: tts pins at the anneal time
        assert all(tts[n] == 500.0 for n in range(1, 6))
        # beyond the knee the cost grows strictly (tunneling amplitude halves)
        grown = [tts[n] for n in range(8, 17)]
        assert all(b > a for a, b in zip(grown, grown[1:]))
        assert tts[16] > 100 * 500.0

    def test_noise_lifts_and_steepens(self, curve):
        clean = {pt.n: pt.tts for pt in curve if pt.q == 0.0}
        noisy = {pt.n: pt.tts for pt in curve if pt.q == 0.1}
        assert all(noisy[n] > clean[n] for n in range(1, 17))
        seq = [noisy[n] for n in range(1, 17)]
        assert all(b > a for a, b in zip(seq, seq[1:]))

    def test_unsolved_propagates(self):
        pts = double_scaling_curve(n_max=1, t_ann=500.0, dt=0.01, noise=(0.0,))
        assert not is_unsolved(pts[0].tts)
        # a fully dephased-long chain: success prob hits zero only at q -> 1,
        # which the domain check forbids; nothing in range yields UNSOLVED
        assert all(math.isfinite(pt.tts) for pt in pts)

    def test_validation(self):
        with pytest.raises(ValidationError):
            double_scaling_curve(n_max=0)
