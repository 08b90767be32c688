"""Linear algebra over the two-atom + cavity Hilbert space.

The composite space is atom1 (x) atom2 (x) cavity with the cavity truncated to
``F`` Fock levels.  The flat index layout is fixed throughout the package:

    index = (a1 * 2 + a2) * F + n

with ``a1, a2 in {0, 1}`` (0 = |g>, 1 = |e>) and ``n`` the Fock number.  Atom-1
is the major axis so its measurement marginals are contiguous.

Sign conventions: sigma_z = |e><e| - |g><g| (so sigma_z|e> = +|e>).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SpaceDescriptor",
    "StateVector",
    "SparseOperator",
    "MixtureState",
    "make_space",
    "basis_state",
    "embed_atom",
    "embed_atoms",
    "annihilation",
    "creation",
    "number_operator",
    "identity_operator",
    "fidelity_pure",
    "fidelity_mixture",
    "atoms_reduced_density",
    "atomic_fidelity",
    "thermal_weights",
    "thermal_tail",
    "min_cutoff_for_tail",
    "atom1_outcome_probs",
    "match_up_to_global_phase",
    "SIGMA_X",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
]

ATOM_LEVELS = {"g": 0, "e": 1}

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)  # |e><e| - |g><g|
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |e><g|
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|


@dataclass(frozen=True)
class SpaceDescriptor:
    """Two atoms tensored with an ``F``-level cavity mode."""

    fock_cutoff: int

    atom_count = 2

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ValueError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")

    @property
    def total_dim(self) -> int:
        return 4 * self.fock_cutoff

    def flat_index(self, a1: int, a2: int, n: int) -> int:
        F = self.fock_cutoff
        if not 0 <= n < F:
            raise IndexError(f"Fock number {n} outside [0, {F})")
        return (a1 * 2 + a2) * F + n


def make_space(fock_cutoff: int) -> SpaceDescriptor:
    """Build a space descriptor; ``fock_cutoff`` counts cavity levels 0..F-1."""
    return SpaceDescriptor(int(fock_cutoff))


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a :class:`SpaceDescriptor`."""

    space: SpaceDescriptor
    amps: np.ndarray

    def __post_init__(self):
        if self.amps.shape != (self.space.total_dim,):
            raise ValueError(
                f"amplitude length {self.amps.shape} does not match dim {self.space.total_dim}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amps / n)


@dataclass(frozen=True)
class MixtureState:
    """Weighted ensemble of pure states sharing one space."""

    components: tuple

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        space = self.components[0][1].space
        total = 0.0
        for w, state in self.components:
            if w < 0:
                raise ValueError("mixture weights must be nonnegative")
            if state.space != space:
                raise ValueError("mixture components must share one space")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")

    @property
    def space(self) -> SpaceDescriptor:
        return self.components[0][1].space


class SparseOperator:
    """Sparse linear operator on a composite space; matvec cost is O(nnz)."""

    def __init__(self, space: SpaceDescriptor, mat):
        mat = sp.csr_matrix(mat, dtype=complex)
        if mat.shape != (space.total_dim, space.total_dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {space.total_dim}")
        self.space = space
        self.mat = mat

    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def apply(self, state: StateVector) -> StateVector:
        if state.space != self.space:
            raise ValueError("operator and state live on different spaces")
        return StateVector(self.space, self.mat @ state.amps)

    def dagger(self) -> "SparseOperator":
        return SparseOperator(self.space, self.mat.conjugate().transpose().tocsr())

    def hermiticity_defect(self) -> float:
        diff = self.mat - self.mat.conjugate().transpose()
        if diff.nnz == 0:
            return 0.0
        return float(np.abs(diff.data).max())

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        if other.space != self.space:
            raise ValueError("operators live on different spaces")
        return SparseOperator(self.space, self.mat @ other.mat)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        return SparseOperator(self.space, self.mat + other.mat)

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.space, self.mat * scalar)

    __rmul__ = __mul__

    def to_dense(self) -> np.ndarray:
        return self.mat.toarray()


def basis_state(space: SpaceDescriptor, a1: str, a2: str, n: int) -> StateVector:
    """Product basis ket |a1>|a2>|n> with a1, a2 in {"g", "e"}."""
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[space.flat_index(ATOM_LEVELS[a1], ATOM_LEVELS[a2], n)] = 1.0
    return StateVector(space, amps)


def identity_operator(space: SpaceDescriptor) -> SparseOperator:
    return SparseOperator(space, sp.identity(space.total_dim, dtype=complex, format="csr"))


def embed_atom(space: SpaceDescriptor, which_atom: int, m: np.ndarray) -> SparseOperator:
    """Embed a 2x2 matrix acting on atom 1 or atom 2 into the full space."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("single-atom operator must be 2x2")
    if which_atom not in (1, 2):
        raise ValueError("which_atom must be 1 or 2")
    i2 = sp.identity(2, dtype=complex)
    icav = sp.identity(space.fock_cutoff, dtype=complex)
    if which_atom == 1:
        full = sp.kron(sp.kron(sp.csr_matrix(m), i2), icav)
    else:
        full = sp.kron(sp.kron(i2, sp.csr_matrix(m)), icav)
    return SparseOperator(space, full)


def embed_atoms(space: SpaceDescriptor, m4: np.ndarray) -> SparseOperator:
    """Embed a 4x4 two-atom matrix (identity on the cavity factor)."""
    m4 = np.asarray(m4, dtype=complex)
    if m4.shape != (4, 4):
        raise ValueError("two-atom operator must be 4x4")
    icav = sp.identity(space.fock_cutoff, dtype=complex)
    return SparseOperator(space, sp.kron(sp.csr_matrix(m4), icav))


def _fock_annihilation(F: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, F, dtype=float)), 1, format="csr").astype(complex)


def annihilation(space: SpaceDescriptor) -> SparseOperator:
    """Cavity lowering operator a|n> = sqrt(n)|n-1>, identity on the atoms."""
    i4 = sp.identity(4, dtype=complex)
    return SparseOperator(space, sp.kron(i4, _fock_annihilation(space.fock_cutoff)))


def creation(space: SpaceDescriptor) -> SparseOperator:
    return annihilation(space).dagger()


def number_operator(space: SpaceDescriptor) -> SparseOperator:
    i4 = sp.identity(4, dtype=complex)
    nd = sp.diags(np.arange(space.fock_cutoff, dtype=float), 0, format="csr").astype(complex)
    return SparseOperator(space, sp.kron(i4, nd))


def fidelity_pure(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; symmetric and invariant under global phases."""
    if a.space != b.space:
        raise ValueError("states live on different spaces")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def fidelity_mixture(mix: MixtureState, target: StateVector) -> float:
    """<target|rho|target> for the ensemble density matrix rho."""
    return float(sum(w * fidelity_pure(state, target) for w, state in mix.components))


def atoms_reduced_density(state) -> np.ndarray:
    """4x4 reduced density matrix of the two atoms (cavity traced out)."""
    if isinstance(state, MixtureState):
        rho = np.zeros((4, 4), dtype=complex)
        for w, comp in state.components:
            rho += w * atoms_reduced_density(comp)
        return rho
    m = state.amps.reshape(4, state.space.fock_cutoff)
    return m @ m.conjugate().transpose()


def atomic_fidelity(state, target4: np.ndarray) -> float:
    """<t|Tr_cav(rho)|t> for a pure or mixed state and a 4-dim atomic target."""
    target4 = np.asarray(target4, dtype=complex).reshape(4)
    rho = atoms_reduced_density(state)
    return float(np.real(np.vdot(target4, rho @ target4)))


def thermal_weights(nbar: float, F: int) -> np.ndarray:
    """Bose-Einstein Fock weights p_n ~ nbar^n/(1+nbar)^(n+1), renormalized.

    Renormalization after truncation keeps the weights an exact probability
    distribution on the F retained levels.
    """
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    if F < 1:
        raise ValueError(f"F must be >= 1, got {F}")
    if nbar == 0:
        w = np.zeros(F)
        w[0] = 1.0
        return w
    q = nbar / (1.0 + nbar)
    w = (1.0 - q) * q ** np.arange(F)
    return w / w.sum()


def thermal_tail(nbar: float, F: int) -> float:
    """Probability mass discarded by truncating the thermal state at F levels."""
    if nbar <= 0:
        return 0.0
    return float((nbar / (1.0 + nbar)) ** F)


def min_cutoff_for_tail(nbar: float, tol: float) -> int:
    """Smallest F whose truncated thermal tail is below ``tol``."""
    F = 1
    while thermal_tail(nbar, F) >= tol:
        F += 1
    return F


def atom1_outcome_probs(state) -> tuple:
    """(p_g, p_e) readout probabilities for atom 1."""
    if isinstance(state, MixtureState):
        pg = pe = 0.0
        for w, comp in state.components:
            g, e = atom1_outcome_probs(comp)
            pg += w * g
            pe += w * e
        return pg, pe
    half = 2 * state.space.fock_cutoff
    pg = float(np.sum(np.abs(state.amps[:half]) ** 2))
    pe = float(np.sum(np.abs(state.amps[half:]) ** 2))
    return pg, pe


def match_up_to_global_phase(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max entrywise deviation after removing one global phase.

    Works for matrices and vectors; the phase is read off the largest entry of
    ``expected``.
    """
    actual = np.asarray(actual, dtype=complex)
    expected = np.asarray(expected, dtype=complex)
    if actual.shape != expected.shape:
        raise ValueError("shape mismatch")
    k = np.argmax(np.abs(expected))
    ref = expected.reshape(-1)[k]
    cand = actual.reshape(-1)[k]
    if abs(cand) < 1e-300:
        return float(np.abs(actual - expected).max())
    phase = ref / cand * abs(cand) / abs(ref)
    return float(np.abs(actual * phase - expected).max())
