"""End-to-end Deutsch-Jozsa runs on the two-atom register.

Protocol: prepare |g>|e>, Hadamard both atoms, apply the oracle, Hadamard the
query atom (atom 1) and read it out.  A constant function leaves the query
atom in |g> (read as 0), a balanced one flips it to |e> (read as 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates, qcore
from .gates import Oracle
from .model import SolverConstraints
from .qcore import MixtureState, StateVector

__all__ = ["DJResult", "prepare_initial", "ideal_post_oracle", "run_dj"]

CONSTANT = "constant"
BALANCED = "balanced"


@dataclass(frozen=True)
class DJResult:
    p0: float
    p1: float
    classification: str
    state_fidelity: float

    def p_correct(self, oracle: Oracle) -> float:
        return self.p0 if oracle.is_constant else self.p1


def _query_superposition_amps() -> np.ndarray:
    # (|g> + |e>)(|g> - |e>) / 2 in (gg, ge, eg, ee) order
    return np.array([0.5, -0.5, 0.5, -0.5], dtype=complex)


def prepare_initial(mode):
    """|g>|e> followed by a Hadamard on each atom, tensored with the cavity."""
    space = gates.space_for_mode(mode)
    comps = gates.cavity_components(mode)
    amps4 = _query_superposition_amps()
    F = space.fock_cutoff

    def pure(n: int) -> StateVector:
        full = np.zeros(space.total_dim, dtype=complex)
        full[n::F] = amps4
        return StateVector(space, full)

    if len(comps) == 1:
        return pure(comps[0][1])
    return MixtureState(tuple((w, pure(n)) for w, n in comps))


def ideal_post_oracle(oracle: Oracle) -> np.ndarray:
    """Exact post-oracle atomic state [(-1)^f0 |g> + (-1)^f1 |e>](|g> - |e>)/2."""
    f0, f1 = oracle.value
    s0, s1 = (-1.0) ** f0, (-1.0) ** f1
    return 0.5 * np.array([s0, -s0, s1, -s1], dtype=complex)


def run_dj_with_stats(
    oracle: Oracle,
    mode,
    constraints: SolverConstraints = SolverConstraints(),
):
    """Full protocol run; returns (result, per-interaction evolution stats)."""
    schedule = gates.oracle_schedule(oracle, constraints)
    state = prepare_initial(mode)
    post, stats = gates.execute_with_stats(schedule, state, mode)
    fid = qcore.atomic_fidelity(post, ideal_post_oracle(oracle))
    final_h = gates.Schedule((gates.Local(1, gates.HADAMARD),))
    readout = gates.execute(final_h, post, mode)
    p0, p1 = qcore.atom1_outcome_probs(readout)
    total = p0 + p1
    p0, p1 = p0 / total, p1 / total
    classification = CONSTANT if p0 >= 0.5 else BALANCED
    result = DJResult(p0=p0, p1=p1, classification=classification, state_fidelity=fid)
    return result, stats


def run_dj(
    oracle: Oracle,
    mode,
    constraints: SolverConstraints = SolverConstraints(),
) -> DJResult:
    result, _ = run_dj_with_stats(oracle, mode, constraints)
    return result
