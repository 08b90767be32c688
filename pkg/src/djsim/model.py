"""Hamiltonians and closed-form evolution operators for the driven two-atom cavity model.

Everything is expressed in units of the atom-cavity coupling ``g`` (time in
1/g).  The simulation frame is the interaction picture, where the model reads

    H_I(t) = sum_j [ Omega (s_j^+ + s_j^-)
                     + g (e^{-i delta t} a^dag s_j^- + e^{+i delta t} a s_j^+) ]

with detuning ``delta`` between the atomic transition and the cavity mode.
In the dressed basis |+-> = (|g> +- |e>)/sqrt(2) this splits into a static
drive part H_0 = 2 Omega Sx and an exchange part which, for a strong drive
(Omega >> delta, g), reduces to

    H_e(t) = g (e^{-i delta t} a^dag + e^{+i delta t} a) Sx,
    Sx     = (1/2) sum_j (s_j^+ + s_j^-).

H_e admits the exact time-ordered propagator

    U_e(t) = e^{-i A(t) Sx^2} e^{-i B(t) Sx a} e^{-i C(t) Sx a^dag}

whose scalar coefficients solve Bdot = g e^{i delta t}, Cdot = g e^{-i delta t}
and Adot = i Cdot B.  Whenever delta * t is a multiple of 2 pi the cavity
factors cancel (B = C = 0) and the combined evolution collapses to the
cavity-independent atomic unitary

    U(t) = e^{-i 2 Omega Sx t - i 2 lambda Sx^2 t},   lambda = g^2 / (2 delta),

which is diagonal in the |+->|+-> basis with phases e^{-i 2 Omega s t} *
e^{-i 2 lambda s^2 t} for total Sx eigenvalue s in {+1, 0, 0, -1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InfeasibleError
from .propagator import HamiltonianTerms
from .qcore import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SparseOperator,
    SpaceDescriptor,
    match_up_to_global_phase,
)

__all__ = [
    "Params",
    "AbcCoefficients",
    "GateTiming",
    "GateTarget",
    "SolverConstraints",
    "h_interaction",
    "h_interaction_terms",
    "h_effective",
    "h_effective_terms",
    "h_drive_terms",
    "h_full_effective_terms",
    "abc_coefficients",
    "u_effective",
    "u_interaction_analytic",
    "solve_gate_params",
    "controlled_phase_target",
    "epr_quarter_target",
    "PERIOD_TOL",
]

# Tolerance on |delta * t - 2 pi N| for the analytic atomic unitary to exist.
PERIOD_TOL = 1e-9

# (|g>, |e>) -> (|+>, |->) basis change for one atom; real, symmetric, self-inverse.
_H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_W4 = np.kron(_H2, _H2)
# Collective Sx eigenvalues in the (++, +-, -+, --) dressed product order.
_SX_EIGS = np.array([1.0, 0.0, 0.0, -1.0])


@dataclass(frozen=True)
class Params:
    """Physical parameters in units of the coupling (g normally 1)."""

    g: float
    delta: float
    omega: float

    def __post_init__(self):
        if self.delta == 0.0:
            raise ValueError("delta must be nonzero")
        if self.omega < 0.0:
            raise ValueError("omega must be >= 0")

    @property
    def lam(self) -> float:
        """Dispersive rate lambda = g^2 / (2 delta); always recomputed."""
        return self.g**2 / (2.0 * self.delta)


@dataclass(frozen=True)
class AbcCoefficients:
    A: complex
    B: complex
    C: complex


@dataclass(frozen=True)
class GateTiming:
    """Interaction window satisfying delta * t = 2 pi N."""

    t: float
    periods: int
    lambda_t: float
    omega_t: float

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError("periods must be >= 1")
        if self.t <= 0:
            raise ValueError("duration must be positive")


def _atomic_sum(m: np.ndarray) -> sp.csr_matrix:
    """m on atom 1 plus m on atom 2, as a 4x4 sparse matrix."""
    i2 = sp.identity(2, dtype=complex)
    m = sp.csr_matrix(m)
    return (sp.kron(m, i2) + sp.kron(i2, m)).tocsr()


def _kron_cavity(atomic4, cavity) -> sp.csr_matrix:
    return sp.kron(sp.csr_matrix(atomic4), sp.csr_matrix(cavity)).tocsr()


def _fock_annihilation(F: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, F, dtype=float)), 1, format="csr").astype(complex)


def h_interaction_terms(params: Params, space: SpaceDescriptor) -> HamiltonianTerms:
    """Full interaction-picture Hamiltonian as harmonic terms."""
    F = space.fock_cutoff
    a = _fock_annihilation(F)
    adag = a.conjugate().transpose().tocsr()
    drive = SparseOperator(space, _kron_cavity(_atomic_sum(SIGMA_X), sp.identity(F, dtype=complex)))
    lower = SparseOperator(space, _kron_cavity(_atomic_sum(SIGMA_MINUS), adag))
    raise_ = SparseOperator(space, _kron_cavity(_atomic_sum(SIGMA_PLUS), a))
    return HamiltonianTerms(
        space,
        [
            (drive, params.omega, 0.0),
            (lower, params.g, -params.delta),
            (raise_, params.g, +params.delta),
        ],
    )


def h_interaction(params: Params, t: float, space: SpaceDescriptor) -> SparseOperator:
    """The full Hamiltonian frozen at time ``t``."""
    return h_interaction_terms(params, space).sample(t)


def _collective_sx4() -> sp.csr_matrix:
    return (0.5 * _atomic_sum(SIGMA_X)).tocsr()


def h_effective_terms(params: Params, space: SpaceDescriptor) -> HamiltonianTerms:
    """Strong-drive effective exchange Hamiltonian (drive part excluded)."""
    F = space.fock_cutoff
    a = _fock_annihilation(F)
    adag = a.conjugate().transpose().tocsr()
    sx4 = _collective_sx4()
    up = SparseOperator(space, _kron_cavity(sx4, adag))
    down = SparseOperator(space, _kron_cavity(sx4, a))
    return HamiltonianTerms(
        space,
        [
            (up, params.g, -params.delta),
            (down, params.g, +params.delta),
        ],
    )


def h_effective(params: Params, t: float, space: SpaceDescriptor) -> SparseOperator:
    return h_effective_terms(params, space).sample(t)


def h_drive_terms(params: Params, space: SpaceDescriptor) -> HamiltonianTerms:
    """Static drive part 2 Omega Sx (the dressed-basis splitting)."""
    F = space.fock_cutoff
    op = SparseOperator(
        space, _kron_cavity(2.0 * _collective_sx4(), sp.identity(F, dtype=complex))
    )
    return HamiltonianTerms(space, [(op, params.omega, 0.0)])


def h_full_effective_terms(params: Params, space: SpaceDescriptor) -> HamiltonianTerms:
    """Drive plus effective exchange; the model behind the analytic unitary."""
    drive = h_drive_terms(params, space)
    eff = h_effective_terms(params, space)
    return HamiltonianTerms(space, list(drive.terms) + list(eff.terms))


def abc_coefficients(g: float, delta: float, t: float) -> AbcCoefficients:
    """Closed-form coefficients of the factored effective propagator."""
    if delta == 0.0:
        raise ValueError("delta must be nonzero (coefficients are singular)")
    i_delta = 1j * delta
    B = g * (np.exp(1j * delta * t) - 1.0) / i_delta
    C = -g * (np.exp(-1j * delta * t) - 1.0) / i_delta
    A = g**2 * (t + (np.exp(-1j * delta * t) - 1.0) / i_delta) / delta
    return AbcCoefficients(complex(A), complex(B), complex(C))


def u_effective(params: Params, t: float, space: SpaceDescriptor) -> SparseOperator:
    """Exact propagator of the effective exchange Hamiltonian on [0, t].

    Evaluated blockwise in the dressed atomic basis: for collective Sx
    eigenvalue s the cavity factor is e^{-i A s^2} e^{-i B s a} e^{-i C s a^dag},
    a finite triangular series under truncation.
    """
    abc = abc_coefficients(params.g, params.delta, t)
    F = space.fock_cutoff
    a = _fock_annihilation(F).toarray()
    adag = a.conjugate().transpose()
    blocks = {}
    for s in (-1.0, 0.0, 1.0):
        if s == 0.0:
            blocks[s] = np.eye(F, dtype=complex)
        else:
            # Collapse e^{-iBsa} e^{-iCsa^dag} into the displacement operator
            # D(-iCs) (with C = conj(B), the BCH scalar e^{-|C|^2 s^2 / 2}
            # cancels against Im A exactly): expm of an anti-Hermitian
            # generator stays unitary under truncation, unlike the raw
            # triangular factors whose huge entries must cancel.
            alpha = -1j * abc.C * s
            disp = scipy.linalg.expm(alpha * adag - np.conjugate(alpha) * a)
            blocks[s] = np.exp(-1j * abc.A.real * s * s) * disp
    dressed = scipy.linalg.block_diag(*[blocks[s] for s in _SX_EIGS])
    w = np.kron(_W4, np.eye(F))
    return SparseOperator(space, sp.csr_matrix(w @ dressed @ w))


def u_interaction_analytic(params: Params, t: float) -> np.ndarray:
    """Cavity-independent atomic 4x4 unitary at a full detuning period.

    Requires delta * t = 2 pi N (N >= 1); otherwise the cavity factors do not
    cancel and no atomic-only operator exists.  Diagonal in the dressed basis:
    |++> picks up e^{-i 2 Omega t} e^{-i 2 lambda t}, |+-> and |-+> are fixed,
    |--> picks up e^{+i 2 Omega t} e^{-i 2 lambda t}.  Returned in the
    (gg, ge, eg, ee) computational basis.
    """
    cycles = params.delta * t / (2.0 * math.pi)
    n = round(cycles)
    if n < 1 or abs(params.delta * t - 2.0 * math.pi * n) > PERIOD_TOL:
        raise ValueError(
            f"delta * t = {params.delta * t:.12g} is not a positive multiple of 2 pi"
        )
    phases = np.exp(-2j * params.omega * t * _SX_EIGS - 2j * params.lam * t * _SX_EIGS**2)
    return _W4 @ np.diag(phases) @ _W4


class GateTarget(Enum):
    CONTROLLED_PHASE = "controlled-phase"
    EPR_QUARTER = "epr-quarter"


@dataclass(frozen=True)
class SolverConstraints:
    n_min: int = 1
    omega_over_delta_min: float = 20.0
    delta_over_g: float | None = None

    def __post_init__(self):
        if self.n_min < 1:
            raise InfeasibleError("n_min must be >= 1")
        if self.omega_over_delta_min < 0:
            raise InfeasibleError("omega_over_delta_min must be >= 0")


def controlled_phase_target() -> np.ndarray:
    """diag(-1, 1, 1, 1) in the dressed basis, in the computational basis."""
    return _W4 @ np.diag([-1.0, 1.0, 1.0, 1.0]).astype(complex) @ _W4


def epr_quarter_target() -> np.ndarray:
    """Quarter entangler: dressed phases (-i, 1, 1, -i), computational basis."""
    return _W4 @ np.diag([-1j, 1.0, 1.0, -1j]) @ _W4


def solve_gate_params(
    target: GateTarget,
    constraints: SolverConstraints = SolverConstraints(),
    g: float = 1.0,
) -> tuple[Params, GateTiming]:
    """Solve the phase congruences for a gate-grade interaction window.

    Both targets need lambda * t = pi / 4, which together with the period
    condition delta * t = 2 pi N pins delta = 2 g sqrt(N).  The drive phase
    then satisfies, for the controlled-phase gate, Omega t = pi/4 + p pi
    (dressed phases -1 / 1 / 1 / 1) and for the quarter entangler
    Omega t = m pi (dressed phases -i / 1 / 1 / -i).  The returned parameters
    are verified against the target truth table before being handed back.
    """
    if constraints.delta_over_g is not None:
        delta = constraints.delta_over_g * g
        n_real = (delta / (2.0 * g)) ** 2
        n = round(n_real)
        if n < constraints.n_min or abs(n_real - n) > 1e-9:
            raise InfeasibleError(
                f"delta = {constraints.delta_over_g} g is incompatible with "
                "lambda * t = pi/4 at a whole number of detuning periods"
            )
    else:
        n = constraints.n_min
        delta = 2.0 * g * math.sqrt(n)
    t = 2.0 * math.pi * n / delta
    lambda_t = math.pi / 4.0
    omega_floor = constraints.omega_over_delta_min * delta * t
    if target is GateTarget.CONTROLLED_PHASE:
        p = max(0, math.ceil((omega_floor - math.pi / 4.0) / math.pi - 1e-12))
        omega_t = math.pi / 4.0 + p * math.pi
        expected = controlled_phase_target()
    elif target is GateTarget.EPR_QUARTER:
        m = max(1, math.ceil(omega_floor / math.pi - 1e-12))
        omega_t = m * math.pi
        expected = epr_quarter_target()
    else:
        raise InfeasibleError(f"unknown gate target {target}")
    params = Params(g=g, delta=delta, omega=omega_t / t)
    timing = GateTiming(t=t, periods=n, lambda_t=lambda_t, omega_t=omega_t)
    # Phase roundoff in exp(-2i Omega t) grows linearly with Omega t, so the
    # self-check tolerance has to follow suit for strongly driven solutions.
    defect = match_up_to_global_phase(u_interaction_analytic(params, t), expected)
    if defect > max(1e-12, 5e-15 * omega_t):
        raise InfeasibleError(
            f"solved parameters miss the target truth table (defect {defect:.3e})"
        )
    return params, timing
