"""djsim: two driven two-level atoms in a thermal cavity running Deutsch-Jozsa.

All quantities are in units of the atom-cavity coupling g (time in 1/g); the
physical coupling only sets the overall scale and never enters a fidelity.
"""

from .djrunner import DJResult, prepare_initial, run_dj
from .errors import ConfigError, InfeasibleError, NumericalFailure, TruncationFailure
from .gates import (
    Analytic,
    ExecMode,
    FockInit,
    Interaction,
    Local,
    LocalGate,
    Oracle,
    Physical,
    Schedule,
    ThermalInit,
    cnot_schedule,
    controlled_phase_schedule,
    epr_schedule,
    execute,
    oracle_schedule,
)
from .model import (
    AbcCoefficients,
    GateTarget,
    GateTiming,
    Params,
    SolverConstraints,
    abc_coefficients,
    solve_gate_params,
    u_effective,
    u_interaction_analytic,
)
from .propagator import HamiltonianTerms, IntegratorSettings, evolve, evolve_mixture
from .qcore import (
    MixtureState,
    SparseOperator,
    SpaceDescriptor,
    StateVector,
    basis_state,
    fidelity_mixture,
    fidelity_pure,
    make_space,
    thermal_weights,
)

__version__ = "0.1.0"
