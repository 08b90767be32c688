"""Tests for the end-to-end Deutsch-Jozsa runner."""
import numpy as np
import pytest

from djsim.djrunner import BALANCED, CONSTANT, ideal_post_oracle, prepare_initial, run_dj
from djsim.gates import Analytic, FockInit, Oracle, Physical, ThermalInit


class TestPreparation:
    def test_analytic_initial_state(self):
        psi = prepare_initial(Analytic())
        assert np.allclose(psi.amps, [0.5, -0.5, 0.5, -0.5])

    def test_fock_initial_state_carries_cavity(self):
        mode = Physical(FockInit(2), 12)
        psi = prepare_initial(mode)
        space = psi.space
        for (a1, a2), sign in (((0, 0), 1), ((0, 1), -1), ((1, 0), 1), ((1, 1), -1)):
            assert psi.amps[space.flat_index(a1, a2, 2)] == pytest.approx(0.5 * sign)
        assert np.linalg.norm(psi.amps) == pytest.approx(1.0)

    def test_thermal_initial_state_is_mixture(self):
        mode = Physical(ThermalInit(0.5), 20)
        state = prepare_initial(mode)
        assert sum(w for w, _ in state.components) == pytest.approx(1.0, abs=1e-12)
        for _, comp in state.components:
            assert np.linalg.norm(comp.amps) == pytest.approx(1.0)


class TestIdealStates:
    def test_post_oracle_signs(self):
        # constant: +-(|g>+|e>)(|g>-|e>)/2; balanced: +-(|g>-|e>)(|g>-|e>)/2
        assert np.allclose(ideal_post_oracle(Oracle.F1), [0.5, -0.5, 0.5, -0.5])
        assert np.allclose(ideal_post_oracle(Oracle.F2), [-0.5, 0.5, -0.5, 0.5])
        assert np.allclose(ideal_post_oracle(Oracle.F3), [0.5, -0.5, -0.5, 0.5])
        assert np.allclose(ideal_post_oracle(Oracle.F4), [-0.5, 0.5, 0.5, -0.5])

    def test_post_oracle_normalized(self):
        for oracle in Oracle:
            assert np.linalg.norm(ideal_post_oracle(oracle)) == pytest.approx(1.0)


class TestAnalyticRuns:
    @pytest.mark.parametrize("oracle", list(Oracle))
    def test_single_query_exact(self, oracle):
        res = run_dj(oracle, Analytic())
        if oracle.is_constant:
            assert res.classification == CONSTANT
            assert res.p0 == pytest.approx(1.0, abs=1e-10)
        else:
            assert res.classification == BALANCED
            assert res.p1 == pytest.approx(1.0, abs=1e-10)
        assert res.state_fidelity == pytest.approx(1.0, abs=1e-10)
        assert res.p_correct(oracle) == pytest.approx(1.0, abs=1e-10)

    def test_probabilities_sum_to_one(self):
        res = run_dj(Oracle.F3, Analytic())
        assert res.p0 + res.p1 == pytest.approx(1.0, abs=1e-12)


class TestPhysicalRuns:
    def test_vacuum_f1_trivially_correct(self):
        # F1 contains no interaction windows, so physical mode is exact
        res = run_dj(Oracle.F1, Physical(FockInit(0), 12))
        assert res.classification == CONSTANT
        assert res.p0 == pytest.approx(1.0, abs=1e-10)

    def test_vacuum_f4_close_to_ideal(self):
        # one interaction window; full propagation inherits only the small
        # fast-term error
        res = run_dj(Oracle.F4, Physical(FockInit(0), 14))
        assert res.classification == BALANCED
        assert res.p1 > 0.99
        assert res.state_fidelity > 0.99
