"""Dimension-generic simulator for two damped single-spin master equations.

The package integrates two nonlinear relaxation dynamics for a spin-s
density matrix, evaluates spin expectations and covariances along the
trajectories, and quantifies whether one dynamics is a constant temporal
rescaling of the other.  For spin 1/2 the rescaling is exact; from spin 1
upward the built-in scenarios show it fails, which is the point of the
analysis pipeline.

Hot loops run through numba when available; set ``QSPINDYN_BACKEND=numpy``
to force the pure-numpy fallback and ``QSPINDYN_THREADS`` to cap the
misfit-scan parallelism.
"""

from ._kernels import BACKEND
from .densmat import (
    DensityMatrix,
    commutator,
    anticommutator,
    eigenvalues_hermitian,
    solve_implicit_rhs,
)
from .dynamics import (
    DynamicsKind,
    IntegrationError,
    IntegratorConfig,
    IntegratorMethod,
    PositivityError,
    Trajectory,
    integrate,
    rhs,
)
from .hamiltonian import (
    HamiltonianMatrix,
    HamiltonianSpec,
    build_hamiltonian,
    gellmann_decompose,
    triple_commutator_check,
)
from .misfit import (
    EquivalenceVerdict,
    MisfitCurve,
    ObservableSeries,
    equivalence_verdict,
    misfit_curves,
    misfit_magnitude_compare,
    misfit_value,
)
from .observables import (
    COMPONENT_LABELS,
    CovarianceMatrix,
    FluctuationSummary,
    SpinExpectation,
    covariance,
    fluctuation_summary,
    spin_expectation,
    trajectory_observables,
)
from .scenarios_cli import (
    ConfigError,
    RunArtifact,
    ScenarioConfig,
    ScenarioResult,
    list_presets,
    preset_config,
    rerun_misfit,
    run_scenario,
    simulate_scenario,
    validate_config,
)
from .spin_algebra import (
    CoherenceVector,
    ExplicitState,
    GellMannBasis,
    QutritMixtureState,
    SpinOperators,
    SpinQuantumNumber,
    SpinTypeState,
    build_initial_state,
    from_coherence_vector,
    make_gell_mann,
    make_spin_operators,
    spin_from_gellmann_check,
    to_coherence_vector,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # densmat
    "DensityMatrix",
    "commutator",
    "anticommutator",
    "eigenvalues_hermitian",
    "solve_implicit_rhs",
    # spin_algebra
    "SpinQuantumNumber",
    "SpinOperators",
    "GellMannBasis",
    "CoherenceVector",
    "SpinTypeState",
    "QutritMixtureState",
    "ExplicitState",
    "make_spin_operators",
    "make_gell_mann",
    "spin_from_gellmann_check",
    "build_initial_state",
    "to_coherence_vector",
    "from_coherence_vector",
    # hamiltonian
    "HamiltonianSpec",
    "HamiltonianMatrix",
    "build_hamiltonian",
    "gellmann_decompose",
    "triple_commutator_check",
    # dynamics
    "DynamicsKind",
    "IntegratorMethod",
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "PositivityError",
    "rhs",
    "integrate",
    # observables
    "COMPONENT_LABELS",
    "SpinExpectation",
    "CovarianceMatrix",
    "FluctuationSummary",
    "spin_expectation",
    "covariance",
    "fluctuation_summary",
    "trajectory_observables",
    # misfit
    "ObservableSeries",
    "MisfitCurve",
    "EquivalenceVerdict",
    "misfit_value",
    "misfit_curves",
    "equivalence_verdict",
    "misfit_magnitude_compare",
    # scenarios
    "ConfigError",
    "ScenarioConfig",
    "ScenarioResult",
    "RunArtifact",
    "list_presets",
    "preset_config",
    "validate_config",
    "simulate_scenario",
    "run_scenario",
    "rerun_misfit",
]
