"""Fixed-step 4th-order propagation of time-dependent sparse Hamiltonians.

Hamiltonians are represented as sums of harmonic terms

    H(t) = sum_k  amp_k * exp(i * freq_k * t) * O_k

which covers every Hamiltonian in this package (the drive term is static and
the atom-cavity exchange terms rotate at +/- the detuning).  The RK4 kernel
evaluates the exponential phases exactly at every substep, so the classical
4th order is preserved for oscillatory coefficients.

The step size is chosen from two deterministic rules and the smaller wins:

* a frequency rule: ``dt <= 1 / (steps_per_radian * w_max)`` where ``w_max``
  bounds both the Hamiltonian spectral radius and the coefficient frequencies;
* a drift budget: RK4 shrinks the norm by about ``theta^6 / 144`` per step at
  phase-per-step ``theta``; the budget keeps the accumulated drift below half
  of ``unitarity_tol``.

Norm drift and population in the top two Fock levels are monitored; exceeding
the configured tolerances raises instead of silently returning bad physics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NumericalFailure, TruncationFailure
from .qcore import MixtureState, SparseOperator, SpaceDescriptor, StateVector

__all__ = [
    "IntegratorSettings",
    "EvolveStats",
    "HamiltonianTerms",
    "evolve",
    "evolve_with_stats",
    "evolve_mixture",
]


@dataclass(frozen=True)
class IntegratorSettings:
    steps_per_radian: float = 20.0
    unitarity_tol: float = 1e-6
    leakage_tol: float = 1e-6

    def __post_init__(self):
        if self.steps_per_radian < 5:
            raise ValueError("steps_per_radian must be >= 5")
        for name in ("unitarity_tol", "leakage_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2]")


@dataclass(frozen=True)
class EvolveStats:
    steps: int
    dt: float
    norm_drift: float
    max_leakage: float


class HamiltonianTerms:
    """Time-dependent operator source: sum of e^{i w t}-modulated sparse terms."""

    def __init__(self, space: SpaceDescriptor, terms):
        self.space = space
        self.terms = tuple((op, complex(amp), float(freq)) for op, amp, freq in terms)
        for op, _, _ in self.terms:
            if op.space != space:
                raise ValueError("all terms must share the target space")
        rows, cols, vals, tids = [], [], [], []
        for k, (op, _, _) in enumerate(self.terms):
            coo = op.mat.tocoo()
            rows.append(coo.row.astype(np.int64))
            cols.append(coo.col.astype(np.int64))
            vals.append(coo.data.astype(np.complex128))
            tids.append(np.full(coo.nnz, k, dtype=np.int64))
        if self.terms:
            self._rows = np.concatenate(rows)
            self._cols = np.concatenate(cols)
            self._vals = np.concatenate(vals)
            self._tids = np.concatenate(tids)
            order = np.argsort(self._rows, kind="stable")
            self._rows = self._rows[order]
            self._cols = self._cols[order]
            self._vals = self._vals[order]
            self._tids = self._tids[order]
            self._amps = np.array([amp for _, amp, _ in self.terms], dtype=np.complex128)
            self._freqs = np.array([freq for _, _, freq in self.terms], dtype=np.float64)
        else:
            self._rows = np.zeros(0, dtype=np.int64)
            self._cols = np.zeros(0, dtype=np.int64)
            self._vals = np.zeros(0, dtype=np.complex128)
            self._tids = np.zeros(0, dtype=np.int64)
            self._amps = np.zeros(0, dtype=np.complex128)
            self._freqs = np.zeros(0, dtype=np.float64)

    def sample(self, t: float) -> SparseOperator:
        """The Hamiltonian frozen at time ``t`` as a sparse operator."""
        dim = self.space.total_dim
        import scipy.sparse as sp

        acc = sp.csr_matrix((dim, dim), dtype=complex)
        for op, amp, freq in self.terms:
            acc = acc + (amp * np.exp(1j * freq * t)) * op.mat
        return SparseOperator(self.space, acc)

    def max_frequency(self) -> float:
        """Bound on max(spectral radius of H(t), coefficient frequencies)."""
        norm_bound = 0.0
        for op, amp, _ in self.terms:
            row_sums = np.abs(op.mat).sum(axis=1)
            norm_bound += abs(amp) * float(row_sums.max()) if op.mat.nnz else 0.0
        freq_bound = float(np.max(np.abs(self._freqs))) if len(self.terms) else 0.0
        return max(norm_bound, freq_bound)

    def time_reversed(self, duration: float) -> "HamiltonianTerms":
        """Terms generating the inverse evolution of [0, duration].

        Propagating ``psi`` under the returned source for the same duration
        applies U(duration)^dagger: H'(tau) = -H(duration - tau) stays within
        the harmonic-term representation.
        """
        flipped = [
            (op, -amp * np.exp(1j * freq * duration), -freq)
            for op, amp, freq in self.terms
        ]
        return HamiltonianTerms(self.space, flipped)


@njit(cache=True, nogil=True)
def _rhs(rows, cols, vals, tids, coeffs, y, out):
    out[:] = 0.0 + 0.0j
    for i in range(rows.shape[0]):
        out[rows[i]] += coeffs[tids[i]] * vals[i] * y[cols[i]]
    for j in range(out.shape[0]):
        out[j] *= -1j


@njit(cache=True, nogil=True)
def _set_coeffs(amps, freqs, t, out):
    for k in range(amps.shape[0]):
        out[k] = amps[k] * np.exp(1j * freqs[k] * t)


@njit(cache=True, nogil=True)
def _leak_fraction(psi, leak_idx):
    total = 0.0
    for j in range(psi.shape[0]):
        total += psi[j].real ** 2 + psi[j].imag ** 2
    leak = 0.0
    for i in range(leak_idx.shape[0]):
        leak += psi[leak_idx[i]].real ** 2 + psi[leak_idx[i]].imag ** 2
    if total == 0.0:
        return 0.0
    return leak / total


@njit(cache=True, nogil=True)
def _rk4_run(rows, cols, vals, tids, amps, freqs, psi, t0, dt, nsteps, leak_idx, check_every):
    n = psi.shape[0]
    nterms = amps.shape[0]
    coeffs = np.empty(nterms, dtype=np.complex128)
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    max_leak = 0.0
    for step in range(nsteps):
        t = t0 + step * dt
        _set_coeffs(amps, freqs, t, coeffs)
        _rhs(rows, cols, vals, tids, coeffs, psi, k1)
        for j in range(n):
            tmp[j] = psi[j] + 0.5 * dt * k1[j]
        _set_coeffs(amps, freqs, t + 0.5 * dt, coeffs)
        _rhs(rows, cols, vals, tids, coeffs, tmp, k2)
        for j in range(n):
            tmp[j] = psi[j] + 0.5 * dt * k2[j]
        _rhs(rows, cols, vals, tids, coeffs, tmp, k3)
        _set_coeffs(amps, freqs, t + dt, coeffs)
        for j in range(n):
            tmp[j] = psi[j] + dt * k3[j]
        _rhs(rows, cols, vals, tids, coeffs, tmp, k4)
        sixth = dt / 6.0
        for j in range(n):
            psi[j] += sixth * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j])
        if leak_idx.shape[0] > 0 and (step + 1) % check_every == 0:
            leak = _leak_fraction(psi, leak_idx)
            if leak > max_leak:
                max_leak = leak
    if leak_idx.shape[0] > 0:
        leak = _leak_fraction(psi, leak_idx)
        if leak > max_leak:
            max_leak = leak
    return max_leak


def _leak_indices(space: SpaceDescriptor) -> np.ndarray:
    # Truncation is monitored on the top two Fock levels; for F < 3 the
    # monitor would cover the whole cavity and is disabled.
    F = space.fock_cutoff
    if F < 3:
        return np.zeros(0, dtype=np.int64)
    idx = []
    for block in range(4):
        idx.extend((block * F + F - 2, block * F + F - 1))
    return np.array(idx, dtype=np.int64)


def _choose_dt(h: HamiltonianTerms, duration: float, settings: IntegratorSettings):
    w = h.max_frequency()
    if w == 0.0 or duration == 0.0:
        return duration if duration > 0 else 0.0, 1
    dt_freq = 1.0 / (settings.steps_per_radian * w)
    # Drift budget: accumulated RK4 norm loss ~ radians * theta^5 / 144.
    radians = w * duration
    theta = (144.0 * 0.5 * settings.unitarity_tol / radians) ** 0.2
    dt_drift = theta / w
    dt = min(dt_freq, dt_drift)
    nsteps = max(1, math.ceil(duration / dt))
    return duration / nsteps, nsteps


def evolve_with_stats(
    h: HamiltonianTerms,
    psi0: StateVector,
    t0: float,
    t1: float,
    settings: IntegratorSettings = IntegratorSettings(),
):
    """Integrate i dpsi/dt = H(t) psi from t0 to t1; returns (state, stats)."""
    if psi0.space != h.space:
        raise ValueError("state and Hamiltonian live on different spaces")
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    duration = t1 - t0
    psi = psi0.amps.astype(np.complex128).copy()
    dt, nsteps = _choose_dt(h, duration, settings)
    if duration == 0.0 or len(h.terms) == 0 or h.max_frequency() == 0.0:
        return StateVector(h.space, psi), EvolveStats(0, 0.0, 0.0, 0.0)
    leak_idx = _leak_indices(h.space)
    check_every = max(1, nsteps // 256)
    max_leak = _rk4_run(
        h._rows, h._cols, h._vals, h._tids, h._amps, h._freqs,
        psi, float(t0), dt, nsteps, leak_idx, check_every,
    )
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    stats = EvolveStats(nsteps, dt, drift, float(max_leak))
    # `not (<=)` instead of `>` so a NaN norm (blown-up integration) still fails
    if not drift <= settings.unitarity_tol:
        raise NumericalFailure(
            f"norm drift {drift:.3e} exceeds {settings.unitarity_tol:.1e}; "
            "raise steps_per_radian"
        )
    if max_leak > settings.leakage_tol:
        raise TruncationFailure(
            f"top-level Fock population {max_leak:.3e} exceeds "
            f"{settings.leakage_tol:.1e}; raise the fock cutoff"
        )
    return StateVector(h.space, psi), stats


def evolve(
    h: HamiltonianTerms,
    psi0: StateVector,
    t0: float,
    t1: float,
    settings: IntegratorSettings = IntegratorSettings(),
) -> StateVector:
    state, _ = evolve_with_stats(h, psi0, t0, t1, settings)
    return state


def evolve_mixture(
    h: HamiltonianTerms,
    mix: MixtureState,
    t0: float,
    t1: float,
    settings: IntegratorSettings = IntegratorSettings(),
) -> MixtureState:
    """Component-wise evolution; unitary dynamics leave the weights unchanged."""
    out = tuple(
        (w, evolve(h, state, t0, t1, settings)) for w, state in mix.components
    )
    return MixtureState(out)
