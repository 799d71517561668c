"""Zero-noise extrapolation by CNOT identity insertion, on a density-matrix simulator."""
from .circuit import (
    Circuit,
    Gate,
    PositionGrid,
    build_double_cnot,
    build_four_cnot,
    build_qft,
    build_state_prep,
    build_trotter_circuit,
    build_trotter_step,
    cancel_adjacent_cnots,
    cnot_count,
)
from .estimators import Sampled, ZNEEstimate, fiim_estimate, riim_estimate, riim_poisson_estimate
from .experiments import ConfigError, ExperimentConfig, ResultRow, emit_csv, figure3_sweep, figure8_sweep, run_experiment
from .extrapolation import (
    RIIMCoefficientSet,
    combined_error,
    poly_fit_extrapolate,
    poly_weights,
    richardson_weights,
    riim_coefficients,
    stat_error,
)
from .insertion import (
    InsertionPlan,
    OperatorSet,
    apply_plan,
    enumerate_placements,
    fiim_transform,
    plan_gate_count,
    riim_random_plan,
    sample_placement,
)
from .simulator import (
    NoiseModel,
    Observable,
    PauliNoiseSpec,
    Relaxation,
    apply_noisy_cnot,
    apply_relaxation,
    evolve,
    expectation,
    sample_shots,
)

__version__ = "0.1.0"
