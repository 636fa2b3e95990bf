"""Steady-state simulator for quantum-interference photon blockade in a driven
two-level-emitter/cavity system: Hamiltonian and Liouvillian assembly, direct
steady-state solves, two-time correlations, closed-form interference optima,
and a sweep CLI that emits reproducible CSV datasets."""

from .errors import ConfigError, SingularSystemError, SolverError, ValidationError
from .hilbert import (
    DensityMatrix,
    Operator,
    SpaceDims,
    SpaceOps,
    basis_state,
    fock_annihilation,
    qubit_lowering,
    space_ops,
    tensor,
)
from .model import (
    OptimalConditions,
    RateConvention,
    SystemParams,
    amplitude_decays,
    build_hamiltonian,
    jc_eigenvalues,
    optimal_conditions,
)
from .analytic import (
    AmplitudeSet,
    analytic_g2_estimate,
    solve_amplitudes,
    stationarity_residuals,
    steady_relations_check,
    weak_drive_amplitudes,
)
from .lindblad import (
    SteadyState,
    Superoperator,
    build_liouvillian,
    dissipator,
    propagate,
    steady_state,
    step_propagator,
    unvectorize,
    vectorize,
    zero_mode_count,
)
from .observables import (
    ObservableRecord,
    g2_tau,
    g2_zero,
    photon_distribution,
    photon_number,
    record_from_state,
)

__version__ = "0.1.0"
