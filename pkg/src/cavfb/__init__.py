"""Feedback-controlled entanglement of two atoms coupled to a damped cavity:
master-equation generators, steady states, concurrence maps, and
quantum-jump trajectories."""

__version__ = "0.1.0"

from .entangle import StateDiagnostics, concurrence, diagnostics, trace_distance
from .liouville import (
    FeedbackSpec,
    ModelSpec,
    Superoperator,
    build_liouvillian,
    dissipator,
    devectorize,
    vectorize,
    with_params,
)
from .steady import (
    CoherenceForm,
    coherence_form,
    coherence_steady_state,
    is_unique,
    steady_state_from,
    steady_state_unique,
)
from .sweep import Axis, SweepResult, maximize_concurrence, solve_node, sweep2d
from .trajectory import (
    EnsembleResult,
    JumpChannel,
    TrajectoryRecord,
    ensemble_average,
    propagate_me,
    simulate_trajectory,
)

__all__ = [
    "__version__",
    "Axis",
    "CoherenceForm",
    "EnsembleResult",
    "FeedbackSpec",
    "JumpChannel",
    "ModelSpec",
    "StateDiagnostics",
    "Superoperator",
    "SweepResult",
    "TrajectoryRecord",
    "build_liouvillian",
    "coherence_form",
    "coherence_steady_state",
    "concurrence",
    "diagnostics",
    "dissipator",
    "devectorize",
    "ensemble_average",
    "is_unique",
    "maximize_concurrence",
    "propagate_me",
    "simulate_trajectory",
    "solve_node",
    "steady_state_from",
    "steady_state_unique",
    "sweep2d",
    "trace_distance",
    "vectorize",
    "with_params",
]
