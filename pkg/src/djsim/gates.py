"""Gate alphabet, pulse schedules and their execution.

A :class:`Schedule` lists steps in chronological order.  Each step is either a
local (instantaneous) single-atom unitary, an atom-cavity interaction window
satisfying the full-period condition delta * t = 2 pi N, or an idle step.

Two execution modes are supported:

* ``Analytic`` applies the exact cavity-independent 4x4 unitaries; valid on
  any space (the cavity factor is untouched).
* ``Physical`` integrates the full interaction-picture Hamiltonian for every
  interaction window, with local gates still applied instantaneously (the
  single-qubit pulses are treated as negligibly short).  Each interaction
  window restarts its own phase clock at t = 0.  A shared multiplicative
  duration error (1 + pulse_error) and a drive scaling (1 + omega_jitter) can
  be applied to every interaction step.

Single-atom gate conventions (basis order g, e):

* Hadamard: |g> -> (|g>+|e>)/sqrt2, |e> -> (|g>-|e>)/sqrt2.
* PauliX: swaps |g> and |e>.
* PauliZ: |g> -> |g>, |e> -> -|e>  (computational Z with g = 0; note this is
  the negative of the sigma_z = |e><e| - |g><g| operator convention).
* Ramsey(phi): |g> -> e^{i phi}|e>, |e> -> -e^{-i phi}|g>; Ramsey(0) is the
  pi-pulse, Ramsey(pi) its phase-shifted partner, and the two are mutually
  inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import model, propagator, qcore
from .errors import ConfigError
from .model import GateTarget, GateTiming, Params, SolverConstraints, solve_gate_params
from .propagator import EvolveStats, IntegratorSettings
from .qcore import MixtureState, SpaceDescriptor, StateVector

__all__ = [
    "LocalGate",
    "Local",
    "Interaction",
    "Idle",
    "Schedule",
    "ExecMode",
    "Analytic",
    "Physical",
    "FockInit",
    "ThermalInit",
    "Oracle",
    "local_matrix",
    "controlled_phase_schedule",
    "cnot_schedule",
    "oracle_schedule",
    "epr_schedule",
    "execute",
    "execute_with_stats",
    "cavity_components",
    "initial_state",
    "schedule_to_text",
    "schedule_from_text",
]


@dataclass(frozen=True)
class LocalGate:
    kind: str  # hadamard | pauli_x | pauli_z | ramsey
    phase: float = 0.0

    _KINDS = ("hadamard", "pauli_x", "pauli_z", "ramsey")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown local gate kind {self.kind!r}")


HADAMARD = LocalGate("hadamard")
PAULI_X = LocalGate("pauli_x")
PAULI_Z = LocalGate("pauli_z")


def ramsey(phase: float = 0.0) -> LocalGate:
    return LocalGate("ramsey", phase)


def local_matrix(gate: LocalGate) -> np.ndarray:
    if gate.kind == "hadamard":
        return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
    if gate.kind == "pauli_x":
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if gate.kind == "pauli_z":
        return np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    phi = gate.phase
    return np.array(
        [[0.0, -np.exp(-1j * phi)], [np.exp(1j * phi), 0.0]], dtype=complex
    )


def _local_inverse(gate: LocalGate) -> LocalGate:
    if gate.kind == "ramsey":
        return LocalGate("ramsey", gate.phase + math.pi)
    return gate  # hadamard, pauli_x, pauli_z are self-inverse


@dataclass(frozen=True)
class Local:
    atom: int
    gate: LocalGate

    def __post_init__(self):
        if self.atom not in (1, 2):
            raise ValueError("atom must be 1 or 2")


@dataclass(frozen=True)
class Interaction:
    params: Params
    timing: GateTiming
    dagger: bool = False

    def __post_init__(self):
        period_err = abs(
            self.params.delta * self.timing.t - 2.0 * math.pi * self.timing.periods
        )
        if period_err > model.PERIOD_TOL:
            raise ValueError(
                f"interaction window violates delta * t = 2 pi N by {period_err:.3e}"
            )


@dataclass(frozen=True)
class Idle:
    pass


@dataclass(frozen=True)
class Schedule:
    steps: tuple

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    def analytic_matrix(self) -> np.ndarray:
        """Exact 4x4 atomic unitary; steps compose right-to-left in time order."""
        u = np.eye(4, dtype=complex)
        for step in self.steps:
            u = _step_matrix(step) @ u
        return u

    def inverse(self) -> "Schedule":
        inv = []
        for step in reversed(self.steps):
            if isinstance(step, Local):
                inv.append(Local(step.atom, _local_inverse(step.gate)))
            elif isinstance(step, Interaction):
                inv.append(Interaction(step.params, step.timing, dagger=not step.dagger))
            else:
                inv.append(step)
        return Schedule(tuple(inv))


def _step_matrix(step) -> np.ndarray:
    if isinstance(step, Idle):
        return np.eye(4, dtype=complex)
    if isinstance(step, Local):
        m = local_matrix(step.gate)
        i2 = np.eye(2, dtype=complex)
        return np.kron(m, i2) if step.atom == 1 else np.kron(i2, m)
    u = model.u_interaction_analytic(step.params, step.timing.t)
    return u.conjugate().transpose() if step.dagger else u


# -- cavity initialisation ---------------------------------------------------


@dataclass(frozen=True)
class FockInit:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("Fock number must be >= 0")


@dataclass(frozen=True)
class ThermalInit:
    nbar: float
    tail_tol: float = 1e-6

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("nbar must be >= 0")


@dataclass(frozen=True)
class Analytic:
    pass


@dataclass(frozen=True)
class Physical:
    cavity: object  # FockInit | ThermalInit
    fock_cutoff: int
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)
    pulse_error: float = 0.0
    omega_jitter: float = 0.0

    def __post_init__(self):
        if not -0.2 <= self.pulse_error <= 0.2:
            raise ValueError("pulse_error must lie in [-0.2, 0.2]")
        if isinstance(self.cavity, FockInit) and self.fock_cutoff < self.cavity.n + 10:
            raise ValueError("physical mode needs fock_cutoff >= n + 10 for a Fock start")
        if isinstance(self.cavity, ThermalInit):
            need = qcore.min_cutoff_for_tail(self.cavity.nbar, self.cavity.tail_tol)
            if self.fock_cutoff < need:
                raise ValueError(
                    f"fock_cutoff {self.fock_cutoff} leaves a thermal tail above "
                    f"{self.cavity.tail_tol:g} (need >= {need})"
                )


ExecMode = object  # Analytic | Physical


def space_for_mode(mode) -> SpaceDescriptor:
    if isinstance(mode, Analytic):
        return qcore.make_space(1)
    return qcore.make_space(mode.fock_cutoff)


def cavity_components(mode) -> list:
    """(weight, fock_number) pairs of the initial cavity ensemble."""
    if isinstance(mode, Analytic):
        return [(1.0, 0)]
    if isinstance(mode.cavity, FockInit):
        return [(1.0, mode.cavity.n)]
    weights = qcore.thermal_weights(mode.cavity.nbar, mode.fock_cutoff)
    keep = qcore.min_cutoff_for_tail(mode.cavity.nbar, mode.cavity.tail_tol)
    w = weights[:keep] / weights[:keep].sum()
    return [(float(w[n]), n) for n in range(keep)]


def initial_state(mode, a1: str, a2: str):
    """Atomic product state tensored with the mode's cavity initialisation.

    Returns a :class:`StateVector` for Analytic / Fock starts and a
    :class:`MixtureState` for thermal starts.
    """
    space = space_for_mode(mode)
    comps = cavity_components(mode)
    if len(comps) == 1:
        return qcore.basis_state(space, a1, a2, comps[0][1])
    return MixtureState(
        tuple((w, qcore.basis_state(space, a1, a2, n)) for w, n in comps)
    )


# -- schedule constructors ---------------------------------------------------


def controlled_phase_schedule(constraints: SolverConstraints = SolverConstraints()) -> Schedule:
    params, timing = solve_gate_params(GateTarget.CONTROLLED_PHASE, constraints)
    return Schedule((Interaction(params, timing),))


def epr_schedule(constraints: SolverConstraints = SolverConstraints()) -> Schedule:
    """Single interaction window turning |gg> into the (|gg> - i|ee>)/sqrt2 pair."""
    params, timing = solve_gate_params(GateTarget.EPR_QUARTER, constraints)
    return Schedule((Interaction(params, timing),))


def cnot_schedule(constraints: SolverConstraints = SolverConstraints()) -> Schedule:
    """CNOT with atom 1 as control, built around the controlled-phase window."""
    cp = controlled_phase_schedule(constraints).steps
    return Schedule(
        (
            Local(1, PAULI_X),
            Local(1, HADAMARD),
            *cp,
            Local(1, HADAMARD),
            Local(1, PAULI_X),
            Local(1, PAULI_Z),
        )
    )


class Oracle(Enum):
    """The four binary functions on one bit, as (f(0), f(1))."""

    F1 = (0, 0)
    F2 = (1, 1)
    F3 = (0, 1)
    F4 = (1, 0)

    @property
    def is_constant(self) -> bool:
        return self.value[0] == self.value[1]


def oracle_schedule(which: Oracle, constraints: SolverConstraints = SolverConstraints()) -> Schedule:
    if which is Oracle.F1:
        return Schedule((Idle(),))
    cnot = cnot_schedule(constraints).steps
    if which is Oracle.F3:
        return Schedule(cnot)
    if which is Oracle.F2:
        return Schedule((*cnot, Local(1, ramsey(0.0)), *cnot, Local(1, ramsey(math.pi))))
    return Schedule((Local(1, ramsey(0.0)), *cnot, Local(1, ramsey(math.pi))))


# -- execution ---------------------------------------------------------------


def _execute_pure(schedule: Schedule, state: StateVector, mode) -> tuple:
    stats: list[EvolveStats] = []
    space = state.space
    if isinstance(mode, Analytic):
        u = schedule.analytic_matrix()
        out = qcore.embed_atoms(space, u).apply(state)
        return out, stats
    if space.fock_cutoff != mode.fock_cutoff:
        raise ValueError("state space does not match the execution mode's cutoff")
    psi = state
    for step in schedule:
        if isinstance(step, Idle):
            continue
        if isinstance(step, Local):
            psi = qcore.embed_atom(space, step.atom, local_matrix(step.gate)).apply(psi)
            continue
        params = Params(
            g=step.params.g,
            delta=step.params.delta,
            omega=step.params.omega * (1.0 + mode.omega_jitter),
        )
        duration = step.timing.t * (1.0 + mode.pulse_error)
        terms = model.h_interaction_terms(params, space)
        if step.dagger:
            terms = terms.time_reversed(duration)
        psi, st = propagator.evolve_with_stats(terms, psi, 0.0, duration, mode.settings)
        stats.append(st)
    return psi, stats


def execute_with_stats(schedule: Schedule, state, mode):
    """Run a schedule; returns (output_state, list_of_evolution_stats)."""
    if isinstance(state, MixtureState):
        stats: list[EvolveStats] = []
        comps = []
        for w, comp in state.components:
            out, st = _execute_pure(schedule, comp, mode)
            comps.append((w, out))
            stats.extend(st)
        return MixtureState(tuple(comps)), stats
    return _execute_pure(schedule, state, mode)


def execute(schedule: Schedule, state, mode):
    out, _ = execute_with_stats(schedule, state, mode)
    return out


# -- serialization -----------------------------------------------------------

_GATE_NAMES = {"hadamard": "H", "pauli_x": "X", "pauli_z": "Z", "ramsey": "RAMSEY"}
_GATE_KINDS = {v: k for k, v in _GATE_NAMES.items()}


def schedule_to_text(schedule: Schedule) -> str:
    """One step per line: LOCAL / INTERACT / IDLE records."""
    lines = []
    for step in schedule:
        if isinstance(step, Idle):
            lines.append("IDLE")
        elif isinstance(step, Local):
            name = _GATE_NAMES[step.gate.kind]
            if step.gate.kind == "ramsey":
                lines.append(f"LOCAL {step.atom} {name} {step.gate.phase!r}")
            else:
                lines.append(f"LOCAL {step.atom} {name}")
        else:
            if step.dagger:
                raise ValueError("daggered interaction steps have no text form")
            lines.append(
                f"INTERACT {step.params.delta!r} {step.params.omega!r} "
                f"{step.timing.t!r} {step.timing.periods}"
            )
    return "\n".join(lines) + "\n"


def schedule_from_text(text: str) -> Schedule:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            if kind == "IDLE":
                steps.append(Idle())
            elif kind == "LOCAL":
                atom = int(parts[1])
                gate_kind = _GATE_KINDS[parts[2].upper()]
                phase = float(parts[3]) if len(parts) > 3 else 0.0
                steps.append(Local(atom, LocalGate(gate_kind, phase)))
            elif kind == "INTERACT":
                delta, omega, t = (float(x) for x in parts[1:4])
                periods = int(parts[4])
                params = Params(g=1.0, delta=delta, omega=omega)
                lam_t = params.lam * t
                steps.append(
                    Interaction(params, GateTiming(t, periods, lam_t, omega * t))
                )
            else:
                raise ValueError(f"unknown step kind {parts[0]!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ConfigError(f"schedule line {lineno}: {raw.strip()!r}: {exc}") from exc
    return Schedule(tuple(steps))
