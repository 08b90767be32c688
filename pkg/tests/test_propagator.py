"""Tests for the fixed-step propagator and its failure modes."""
import math

import numpy as np
import pytest

from djsim import propagator, qcore
from djsim.errors import NumericalFailure, TruncationFailure
from djsim.model import Params, h_interaction_terms
from djsim.propagator import HamiltonianTerms, IntegratorSettings, evolve, evolve_with_stats
from djsim.qcore import MixtureState, StateVector, basis_state, make_space


def number_terms(space, freq=0.0, amp=1.0):
    return HamiltonianTerms(space, [(qcore.number_operator(space), amp, freq)])


class TestSettings:
    def test_rejects_coarse_stepping(self):
        with pytest.raises(ValueError):
            IntegratorSettings(steps_per_radian=2)

    def test_rejects_absurd_tolerance(self):
        with pytest.raises(ValueError):
            IntegratorSettings(unitarity_tol=0.5)


class TestBasics:
    def test_zero_hamiltonian_is_identity(self):
        space = make_space(4)
        h = HamiltonianTerms(space, [])
        psi0 = basis_state(space, "g", "e", 1)
        out, stats = evolve_with_stats(h, psi0, 0.0, 5.0)
        assert np.array_equal(out.amps, psi0.amps)
        assert stats.steps == 0

    def test_zero_duration(self):
        space = make_space(4)
        h = number_terms(space)
        psi0 = basis_state(space, "g", "g", 2)
        out, stats = evolve_with_stats(h, psi0, 1.0, 1.0)
        assert np.array_equal(out.amps, psi0.amps)

    def test_backwards_interval_rejected(self):
        space = make_space(4)
        with pytest.raises(ValueError):
            evolve(number_terms(space), basis_state(space, "g", "g", 0), 1.0, 0.0)

    def test_space_mismatch_rejected(self):
        h = number_terms(make_space(4))
        with pytest.raises(ValueError):
            evolve(h, basis_state(make_space(5), "g", "g", 0), 0.0, 1.0)

    def test_diagonal_phase_evolution(self):
        # H = N gives |n> -> e^{-i n t} |n>
        space = make_space(6)
        h = number_terms(space)
        t = 1.37
        amps = np.zeros(space.total_dim, dtype=complex)
        amps[space.flat_index(0, 0, 1)] = 1 / math.sqrt(2)
        amps[space.flat_index(0, 0, 3)] = 1 / math.sqrt(2)
        out = evolve(h, StateVector(space, amps), 0.0, t)
        expected = amps.copy()
        expected[space.flat_index(0, 0, 1)] *= np.exp(-1j * t)
        expected[space.flat_index(0, 0, 3)] *= np.exp(-3j * t)
        assert np.abs(out.amps - expected).max() < 1e-7

    def test_oscillating_scalar_term(self):
        # H(t) = cos(w t) * N via two counter-rotating terms; the phase on |n>
        # is n * sin(w t) / w, an exactly known answer.  F is kept well above
        # the populated level so the truncation monitor stays quiet.
        space = make_space(6)
        w = 2.0
        nop = qcore.number_operator(space)
        h = HamiltonianTerms(space, [(nop, 0.5, w), (nop, 0.5, -w)])
        t = 2.0
        psi0 = basis_state(space, "g", "g", 2)
        out = evolve(h, psi0, 0.0, t)
        phase = -2.0 * math.sin(w * t) / w
        expected = np.exp(1j * phase) * psi0.amps
        assert np.abs(out.amps - expected).max() < 1e-7

    def test_nonzero_start_time(self):
        # starting at t0 uses the coefficients at the shifted times
        space = make_space(4)
        w = 1.1
        nop = qcore.number_operator(space)
        h = HamiltonianTerms(space, [(nop, 0.5, w), (nop, 0.5, -w)])
        t0, t1 = 0.7, 2.3
        psi0 = basis_state(space, "g", "g", 1)
        out = evolve(h, psi0, t0, t1)
        phase = -(math.sin(w * t1) - math.sin(w * t0)) / w
        assert np.abs(out.amps - np.exp(1j * phase) * psi0.amps).max() < 1e-7


class TestAccuracy:
    def test_fourth_order_convergence(self, monkeypatch):
        # halving dt should shrink the error by about 2^4; accept anything
        # >= 8x to stay robust to rounding.  The adaptive dt rule is bypassed
        # so the step counts are exactly the ones under test.
        space = make_space(12)
        params = Params(g=1.0, delta=1.5, omega=3.0)
        terms = h_interaction_terms(params, space)
        t = 1.0
        psi0 = basis_state(space, "e", "g", 0)

        def run(nsteps):
            monkeypatch.setattr(
                propagator, "_choose_dt", lambda h, d, s: (d / nsteps, nsteps)
            )
            return evolve(terms, psi0, 0.0, t).amps

        ref = run(4096)
        errs = [np.linalg.norm(run(n) - ref) for n in (64, 128, 256)]
        assert errs[0] / errs[1] > 8.0
        assert errs[1] / errs[2] > 8.0

    def test_norm_preserved(self):
        space = make_space(24)
        params = Params(g=1.0, delta=math.sqrt(2.0), omega=10.0)
        terms = h_interaction_terms(params, space)
        psi0 = basis_state(space, "g", "e", 2)
        out, stats = evolve_with_stats(terms, psi0, 0.0, 4.0)
        assert stats.norm_drift <= 1e-6
        assert abs(out.norm() - 1.0) <= 1e-6

    def test_time_reversed_terms_invert(self):
        space = make_space(24)
        params = Params(g=1.0, delta=1.3, omega=5.0)
        terms = h_interaction_terms(params, space)
        t = 2.0
        psi0 = basis_state(space, "e", "g", 1)
        forward = evolve(terms, psi0, 0.0, t)
        back = evolve(terms.time_reversed(t), forward, 0.0, t)
        assert np.abs(back.amps - psi0.amps).max() < 1e-6


class TestFailureModes:
    def test_norm_drift_raises(self, monkeypatch):
        # The dt rule normally keeps the budget; force a coarse grid to prove
        # the guard actually fires when the budget is busted.
        space = make_space(10)
        params = Params(g=1.0, delta=2.0, omega=50.0)
        terms = h_interaction_terms(params, space)
        psi0 = basis_state(space, "e", "g", 0)
        duration = 20.0
        nsteps = 400  # far too few for omega = 50 over 20 time units
        monkeypatch.setattr(
            propagator, "_choose_dt", lambda h, d, s: (d / nsteps, nsteps)
        )
        with pytest.raises(NumericalFailure):
            evolve(terms, psi0, 0.0, duration, IntegratorSettings(leakage_tol=1e-2))

    def test_truncation_raises(self):
        # a resonant displacement walks up the ladder and must be caught
        space = make_space(6)
        a = qcore.annihilation(space)
        h = HamiltonianTerms(space, [(a + a.dagger(), 1.0, 0.0)])
        psi0 = basis_state(space, "g", "g", 0)
        with pytest.raises(TruncationFailure):
            evolve(h, psi0, 0.0, 3.0)

    def test_stats_reported(self):
        space = make_space(16)
        params = Params(g=1.0, delta=1.0, omega=2.0)
        terms = h_interaction_terms(params, space)
        out, stats = evolve_with_stats(terms, basis_state(space, "g", "g", 0), 0.0, 1.0)
        assert stats.steps >= 1
        assert stats.dt > 0
        assert 0.0 <= stats.max_leakage <= 1.0


class TestMixture:
    def test_componentwise_evolution(self):
        space = make_space(6)
        h = number_terms(space)
        mix = MixtureState(
            ((0.4, basis_state(space, "g", "g", 0)), (0.6, basis_state(space, "g", "g", 2)))
        )
        out = propagator.evolve_mixture(h, mix, 0.0, 1.0)
        assert [w for w, _ in out.components] == [0.4, 0.6]
        # diagonal states only acquire phases
        for (w, comp), (_, orig) in zip(out.components, mix.components):
            assert abs(qcore.fidelity_pure(comp.normalized(), orig) - 1.0) < 1e-8
