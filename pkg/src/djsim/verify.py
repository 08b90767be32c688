"""Fast invariant and oracle checks behind ``djsim verify``.

Every check is designed to finish in well under a second so the whole table
can run on every install; the heavyweight sweep reproductions live in the
test suite instead.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.integrate

from . import djrunner, gates, model, propagator, qcore
from .gates import Oracle
from .model import Params

__all__ = ["run_all", "CHECKS"]


def _check_space_layout():
    space = qcore.make_space(3)
    assert space.total_dim == 12
    assert space.flat_index(1, 0, 0) == 6
    psi = qcore.basis_state(space, "e", "g", 2)
    assert psi.amps[8] == 1.0
    return "index layout (a1*2+a2)*F+n"


def _check_commutator():
    space = qcore.make_space(8)
    a = qcore.annihilation(space)
    comm = (a @ a.dagger() + (-1.0) * (a.dagger() @ a)).to_dense()
    # identity away from the truncation boundary
    for block in range(4):
        sub = comm[block * 8 : block * 8 + 7, block * 8 : block * 8 + 7]
        assert np.abs(sub - np.eye(7)).max() < 1e-12
    return "[a, a^dag] = 1 below the truncation boundary"


def _check_thermal_weights():
    w = qcore.thermal_weights(0.5, 15)
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.all(np.diff(w) <= 0)
    assert qcore.thermal_tail(0.5, 15) < 1e-6
    return "thermal weights normalized and nonincreasing"


def _check_abc_ode():
    g, delta, t = 1.0, math.sqrt(2.0), 1.7

    def rhs(time, y):
        b, c, a = y
        bdot = g * np.exp(1j * delta * time)
        cdot = g * np.exp(-1j * delta * time)
        return [bdot, cdot, 1j * cdot * b]

    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, t), np.zeros(3, dtype=complex), rtol=1e-11, atol=1e-12
    )
    b, c, a = sol.y[:, -1]
    abc = model.abc_coefficients(g, delta, t)
    assert abs(abc.B - b) < 1e-8 and abs(abc.C - c) < 1e-8 and abs(abc.A - a) < 1e-8
    return "closed-form coefficients match their defining ODEs"


def _check_gate_tables():
    cp = gates.controlled_phase_schedule().analytic_matrix()
    assert qcore.match_up_to_global_phase(cp, model.controlled_phase_target()) < 1e-12
    cnot = gates.cnot_schedule().analytic_matrix()
    ideal = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    assert qcore.match_up_to_global_phase(cnot, ideal) < 1e-12
    return "controlled-phase and CNOT truth tables"


def _check_dj_analytic():
    for oracle in Oracle:
        res = djrunner.run_dj(oracle, gates.Analytic())
        want_p0 = 1.0 if oracle.is_constant else 0.0
        assert abs(res.p0 - want_p0) < 1e-10
        assert res.state_fidelity > 1.0 - 1e-10
    return "single-query classification, all four oracles"


def _check_hermiticity():
    space = qcore.make_space(6)
    params = Params(g=1.0, delta=math.sqrt(2.0), omega=20.0 * math.sqrt(2.0))
    for t in (0.0, 0.37, 1.91):
        assert model.h_interaction(params, t, space).hermiticity_defect() < 1e-12
        assert model.h_effective(params, t, space).hermiticity_defect() < 1e-12
    return "Hamiltonians Hermitian at sampled times"


def _check_schedule_roundtrip():
    sched = gates.oracle_schedule(Oracle.F2)
    text = gates.schedule_to_text(sched)
    assert gates.schedule_from_text(text) == sched
    return "schedule text round-trip"


def _check_propagator_smoke():
    space = qcore.make_space(16)
    params = Params(g=1.0, delta=2.0, omega=8.0)
    t = math.pi  # one detuning period
    psi0 = qcore.basis_state(space, "e", "g", 0)
    terms = model.h_full_effective_terms(params, space)
    settings = propagator.IntegratorSettings(steps_per_radian=60)
    final = propagator.evolve(terms, psi0, 0.0, t, settings)
    target4 = model.u_interaction_analytic(params, t) @ np.array([0, 0, 1, 0], complex)
    target = np.kron(target4, np.eye(16, dtype=complex)[0])
    fid = abs(np.vdot(target, final.amps)) ** 2
    assert fid > 1.0 - 1e-8
    return "propagated effective model matches the analytic unitary"


CHECKS = [
    ("space-layout", _check_space_layout),
    ("ladder-commutator", _check_commutator),
    ("thermal-weights", _check_thermal_weights),
    ("coefficient-odes", _check_abc_ode),
    ("gate-truth-tables", _check_gate_tables),
    ("dj-analytic", _check_dj_analytic),
    ("hermiticity", _check_hermiticity),
    ("schedule-roundtrip", _check_schedule_roundtrip),
    ("propagator-oracle", _check_propagator_smoke),
]


def run_all(out=print) -> bool:
    """Run every check; prints one pass/fail line each, returns overall pass."""
    ok = True
    for name, fn in CHECKS:
        try:
            detail = fn()
            out(f"PASS  {name:<22} {detail}")
        except Exception as exc:  # noqa: BLE001 - report and keep going
            ok = False
            out(f"FAIL  {name:<22} {exc!r}")
    return ok
