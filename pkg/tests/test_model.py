"""Tests for the closed-form model layer: coefficients, propagators, gate solver."""
import math

import numpy as np
import pytest
import scipy.integrate

from djsim import model, propagator, qcore
from djsim.errors import InfeasibleError
from djsim.model import (
    GateTarget,
    Params,
    SolverConstraints,
    abc_coefficients,
    controlled_phase_target,
    epr_quarter_target,
    solve_gate_params,
    u_effective,
    u_interaction_analytic,
)


def integrate_coefficients(g, delta, t):
    """Independent oracle: solve the defining ODEs with an adaptive integrator."""

    def rhs(time, y):
        b, c, _ = y
        bdot = g * np.exp(1j * delta * time)
        cdot = g * np.exp(-1j * delta * time)
        return [bdot, cdot, 1j * cdot * b]

    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, t), np.zeros(3, dtype=complex), rtol=1e-11, atol=1e-13
    )
    b, c, a = sol.y[:, -1]
    return a, b, c


def dressed_diagonal_unitary(omega, lam, t):
    """Independent construction of the full-period atomic unitary.

    Built from explicit |+->|+-> projectors instead of the packaged basis
    change, with phases exp(-i 2 Omega s t) exp(-i 2 lambda s^2 t) for the
    collective eigenvalues s = +1, 0, 0, -1.
    """
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    vecs = [np.kron(plus, plus), np.kron(plus, minus), np.kron(minus, plus), np.kron(minus, minus)]
    eigs = [1.0, 0.0, 0.0, -1.0]
    u = np.zeros((4, 4), dtype=complex)
    for v, s in zip(vecs, eigs):
        phase = np.exp(-2j * omega * s * t - 2j * lam * s * s * t)
        u += phase * np.outer(v, v)
    return u


class TestParams:
    def test_lambda(self):
        assert Params(g=1.0, delta=2.0, omega=0.0).lam == pytest.approx(0.25)

    def test_zero_detuning_rejected(self):
        with pytest.raises(ValueError):
            Params(g=1.0, delta=0.0, omega=1.0)

    def test_negative_drive_rejected(self):
        with pytest.raises(ValueError):
            Params(g=1.0, delta=1.0, omega=-1.0)


class TestCoefficients:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_ode_oracle(self, seed):
        rng = np.random.default_rng(1000 + seed)
        g = rng.uniform(0.2, 2.0)
        delta = rng.uniform(0.5, 5.0) * (1 if rng.random() < 0.5 else -1)
        t = rng.uniform(0.1, 8.0)
        a, b, c = integrate_coefficients(g, delta, t)
        abc = abc_coefficients(g, delta, t)
        assert abs(abc.A - a) < 1e-8
        assert abs(abc.B - b) < 1e-8
        assert abs(abc.C - c) < 1e-8

    def test_full_period_displacements_vanish(self):
        delta = 1.7
        t = 2.0 * math.pi / delta
        abc = abc_coefficients(1.0, delta, t)
        assert abs(abc.B) < 1e-12
        assert abs(abc.C) < 1e-12
        # A collapses to 2 lambda t = g^2 t / delta
        assert abc.A == pytest.approx(t / delta, abs=1e-12)

    def test_initial_values(self):
        abc = abc_coefficients(1.3, 0.9, 0.0)
        assert abc.A == 0 and abc.B == 0 and abc.C == 0


class TestEffectivePropagator:
    def test_unitary(self):
        space = qcore.make_space(14)
        u = u_effective(Params(g=1.0, delta=1.3, omega=0.0), 2.1, space).to_dense()
        sub = (u.conjugate().T @ u)[:40, :40]  # away from the truncation edge
        assert np.abs(sub - np.eye(40)).max() < 1e-8

    def test_matches_numerical_propagation(self):
        space = qcore.make_space(18)
        params = Params(g=1.0, delta=1.4, omega=0.0)
        t = 2.3
        psi0 = qcore.basis_state(space, "e", "g", 1)
        terms = model.h_effective_terms(params, space)
        settings = propagator.IntegratorSettings(steps_per_radian=40)
        final = propagator.evolve(terms, psi0, 0.0, t, settings)
        predicted = u_effective(params, t, space).apply(psi0)
        fid = qcore.fidelity_pure(final.normalized(), predicted.normalized())
        assert fid > 1.0 - 1e-7

    def test_zero_eigenvalue_sector_frozen(self):
        # the singlet |ge> - |eg> lives entirely in the s = 0 dressed sector
        # and must not move
        space = qcore.make_space(10)
        params = Params(g=1.0, delta=1.1, omega=0.0)
        amps = np.zeros(space.total_dim, dtype=complex)
        amps[space.flat_index(0, 1, 2)] = 1 / math.sqrt(2)
        amps[space.flat_index(1, 0, 2)] = -1 / math.sqrt(2)
        psi0 = qcore.StateVector(space, amps)
        out = u_effective(params, 3.7, space).apply(psi0)
        assert np.abs(out.amps - psi0.amps).max() < 1e-10


class TestInteractionAnalytic:
    @pytest.mark.parametrize("omega,delta,n", [(3.0, 1.5, 1), (11.0, 2.0, 3), (0.0, 0.7, 2)])
    def test_matches_independent_construction(self, omega, delta, n):
        t = 2.0 * math.pi * n / delta
        params = Params(g=1.0, delta=delta, omega=omega)
        u = u_interaction_analytic(params, t)
        expected = dressed_diagonal_unitary(omega, params.lam, t)
        assert np.abs(u - expected).max() < 1e-10

    def test_unitary(self):
        params = Params(g=1.0, delta=2.0, omega=5.0)
        u = u_interaction_analytic(params, math.pi)
        assert np.abs(u.conjugate().T @ u - np.eye(4)).max() < 1e-12

    def test_off_period_rejected(self):
        params = Params(g=1.0, delta=2.0, omega=5.0)
        with pytest.raises(ValueError):
            u_interaction_analytic(params, 1.0)

    def test_epr_generation_from_gg(self):
        params, timing = solve_gate_params(GateTarget.EPR_QUARTER)
        u = u_interaction_analytic(params, timing.t)
        out = u @ np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
        target = np.array([1.0, 0.0, 0.0, -1j]) / math.sqrt(2.0)
        assert qcore.match_up_to_global_phase(out, target) < 1e-12

    def test_epr_generation_from_eg(self):
        params, timing = solve_gate_params(GateTarget.EPR_QUARTER)
        u = u_interaction_analytic(params, timing.t)
        out = u @ np.array([0.0, 0.0, 1.0, 0.0], dtype=complex)
        target = np.array([0.0, -1j, 1.0, 0.0]) / math.sqrt(2.0)
        assert qcore.match_up_to_global_phase(out, target) < 1e-12


class TestGateSolver:
    def test_default_controlled_phase(self):
        params, timing = solve_gate_params(GateTarget.CONTROLLED_PHASE)
        assert timing.periods == 1
        assert params.delta == pytest.approx(2.0)
        assert timing.t == pytest.approx(math.pi)
        assert timing.lambda_t == pytest.approx(math.pi / 4.0)
        # Omega t = pi/4 + p pi with Omega >= 20 delta
        frac = (timing.omega_t - math.pi / 4.0) / math.pi
        assert frac == pytest.approx(round(frac), abs=1e-12)
        assert params.omega >= 20.0 * params.delta - 1e-9

    def test_default_epr(self):
        params, timing = solve_gate_params(GateTarget.EPR_QUARTER)
        m = timing.omega_t / math.pi
        assert m == pytest.approx(round(m), abs=1e-12)
        assert params.omega >= 20.0 * params.delta - 1e-9

    def test_strong_detuning_epr(self):
        constraints = SolverConstraints(delta_over_g=20.0)
        params, timing = solve_gate_params(GateTarget.EPR_QUARTER, constraints)
        assert timing.periods == 100
        assert timing.t == pytest.approx(10.0 * math.pi)
        assert params.omega == pytest.approx(400.0)

    def test_strong_detuning_controlled_phase(self):
        constraints = SolverConstraints(delta_over_g=20.0)
        params, timing = solve_gate_params(GateTarget.CONTROLLED_PHASE, constraints)
        assert params.omega == pytest.approx(400.025)

    def test_solution_hits_target_table(self):
        for target, expected in (
            (GateTarget.CONTROLLED_PHASE, controlled_phase_target()),
            (GateTarget.EPR_QUARTER, epr_quarter_target()),
        ):
            params, timing = solve_gate_params(target)
            u = u_interaction_analytic(params, timing.t)
            assert qcore.match_up_to_global_phase(u, expected) < 1e-12

    def test_incompatible_detuning_rejected(self):
        with pytest.raises(InfeasibleError):
            solve_gate_params(
                GateTarget.EPR_QUARTER, SolverConstraints(delta_over_g=3.0)
            )

    def test_targets_are_unitary(self):
        for m in (controlled_phase_target(), epr_quarter_target()):
            assert np.abs(m.conjugate().T @ m - np.eye(4)).max() < 1e-12


class TestHamiltonians:
    def test_interaction_hermitian(self):
        space = qcore.make_space(7)
        params = Params(g=1.0, delta=1.3, omega=4.0)
        for t in (0.0, 0.61, 2.9):
            assert model.h_interaction(params, t, space).hermiticity_defect() < 1e-12

    def test_drive_plus_effective_splits_interaction(self):
        # At Sx-diagonal level the effective model is the interaction model
        # with the exchange operator projected onto its Sx component; check
        # that the drive parts agree exactly.
        space = qcore.make_space(5)
        params = Params(g=1.0, delta=1.0, omega=3.0)
        drive_only = model.h_drive_terms(params, space).sample(0.0).to_dense()
        full0 = model.h_interaction(params, 0.0, space).to_dense()
        exchange0 = full0 - drive_only
        # the exchange part at t=0 couples different Fock levels only
        F = space.fock_cutoff
        for b in range(4):
            block = exchange0[b * F : (b + 1) * F, b * F : (b + 1) * F]
            assert np.abs(np.diag(block)).max() < 1e-12
