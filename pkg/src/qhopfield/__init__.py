"""Dissipative quantum Hopfield network simulator.

A network of N qubits with thermal single-spin jump operators built from
Hebbian local fields and a transverse-field Hamiltonian.  The package
integrates the master equation, unravels it into quantum-jump trajectories,
analyzes the spectrum of the vectorized generator, and provides the
matching classical Monte Carlo baseline, plus a CLI experiment harness
(``qhopfield --help``).
"""

from .classical import classical_master_matrix, glauber_sweep, run_mcs
from .errors import IntegrationError, NumericalError, SpectralError, UsageError
from .fitting import DecayFit, PowerLawFit, collapse_check, fit_decay_constant, fit_power_law
from .lindblad import (
    IntegrationConfig,
    SteadyStateResult,
    integrate,
    lindblad_rhs,
    steady_state_by_integration,
)
from .model import (
    ModelSpec,
    PatternSet,
    generate_patterns,
    hamiltonian,
    hebb_weights,
    jump_operators,
    local_field_operator,
    pattern_projector,
    pattern_state,
    thermal_amplitudes,
)
from .observables import (
    EnvelopePoints,
    abs_overlap_operator,
    histogram,
    overlap_operator,
    peak_envelope,
)
from .operators import (
    QuantumOperator,
    basis_state,
    devectorize,
    embed,
    expectation,
    pauli,
    vectorize,
)
from .series import BatchSeries, ObservableSeries
from .spectra import (
    SpectrumReport,
    build_liouvillian,
    oscillation_gap,
    spectral_propagate,
    spectrum,
    steady_state_from_kernel,
)
from .trajectories import (
    TrajectoryConfig,
    TrajectoryResult,
    effective_hamiltonian,
    run_batch,
    run_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSeries",
    "DecayFit",
    "EnvelopePoints",
    "IntegrationConfig",
    "IntegrationError",
    "ModelSpec",
    "NumericalError",
    "ObservableSeries",
    "PatternSet",
    "PowerLawFit",
    "QuantumOperator",
    "SpectralError",
    "SpectrumReport",
    "SteadyStateResult",
    "TrajectoryConfig",
    "TrajectoryResult",
    "UsageError",
    "abs_overlap_operator",
    "basis_state",
    "build_liouvillian",
    "classical_master_matrix",
    "collapse_check",
    "devectorize",
    "effective_hamiltonian",
    "embed",
    "expectation",
    "fit_decay_constant",
    "fit_power_law",
    "generate_patterns",
    "glauber_sweep",
    "hamiltonian",
    "hebb_weights",
    "histogram",
    "integrate",
    "jump_operators",
    "lindblad_rhs",
    "local_field_operator",
    "oscillation_gap",
    "overlap_operator",
    "pattern_projector",
    "pattern_state",
    "pauli",
    "peak_envelope",
    "run_batch",
    "run_mcs",
    "run_trajectory",
    "spectral_propagate",
    "spectrum",
    "steady_state_by_integration",
    "steady_state_from_kernel",
    "thermal_amplitudes",
    "vectorize",
]
