"""Loss-tolerant joint parity measurement of two remote qubits.

A shared cat-state probe measures whether two distant qubits have equal or
opposite excitation, without disturbing states of definite parity, even when
most of the probe light is lost in transit.  The package provides the exact
per-shot measurement channel, an independent first-principles derivation of
it, closed-form performance predictors, idealized abstractions, and a
deterministic Monte-Carlo harness for the measurement-plus-feedback loop
that stabilizes a Bell state.
"""

from ._version import __version__
from .abstract import (
    PhaseFlipReport,
    ProbeChannelSpec,
    RootChannelReport,
    XiModel,
    entanglement_based_parity,
    entanglement_parity_branches,
    phaseflip_counterexample,
    poisson_pmf,
    root_channel_demo,
    xi_from_bitflips,
    xi_measurement,
)
from .analytics import (
    AlphaOptimum,
    MeasEstimate,
    RatePair,
    SteadyState,
    alpha2_for_fmeas,
    coherence_C,
    coherence_curve,
    contraction_factor,
    expected_contraction,
    integrate_rate_ode,
    lambert_w0,
    lyapunov_V,
    nmeas_lambert,
    optimize_alpha,
    parity_curve,
    product_curve,
    rate_generator,
    rate_ode,
    rates,
    solve_nmeas,
    solve_nmeas_from_rates,
    steady_populations,
    steady_state,
)
from .ensemble import (
    STAT_NAMES,
    EnsembleConfig,
    EnsembleResult,
    TrajectoryEvent,
    run_ensemble,
    run_trajectory,
    series_header,
    series_rows,
    write_csv,
    write_events_csv,
    write_series_csv,
)
from .errors import (
    ConfigError,
    DegenerateProbeError,
    ImpossibleOutcomeError,
    InvariantViolation,
    NoSolutionError,
    PipelineOrderError,
)
from .feedback import (
    FeedbackConfig,
    FilterState,
    StepTrace,
    bell_damping_matrix,
    bell_outcome_matrix,
    controller_decide,
    feedback_step,
    filter_update,
    heisenberg_step,
    make_filter,
)
from .kraus import KrausSet, Outcome, apply_outcome, build_kraus, outcome_probs, sample_measurement
from .oracle import derive_kraus
from .presets import PRESET_NAMES, experiment_preset, run_preset
from .qmath import (
    BASIS_LABELS,
    BELL_KET,
    BELL_ORDER,
    GATES,
    CatParams,
    DecayParams,
    amplitude_damp,
    apply_local_gate,
    apply_unitary,
    bell_diagonal,
    check_density,
    density,
    fidelity,
    initial_density,
    norm_const,
    random_density,
)
from .rng import mix64, stream_seed, trajectory_rng

__all__ = [
    "__version__",
    "AlphaOptimum",
    "BASIS_LABELS",
    "BELL_KET",
    "BELL_ORDER",
    "CatParams",
    "ConfigError",
    "DecayParams",
    "DegenerateProbeError",
    "EnsembleConfig",
    "EnsembleResult",
    "FeedbackConfig",
    "FilterState",
    "GATES",
    "ImpossibleOutcomeError",
    "InvariantViolation",
    "KrausSet",
    "MeasEstimate",
    "NoSolutionError",
    "Outcome",
    "PRESET_NAMES",
    "STAT_NAMES",
    "PhaseFlipReport",
    "PipelineOrderError",
    "ProbeChannelSpec",
    "RatePair",
    "RootChannelReport",
    "SteadyState",
    "StepTrace",
    "TrajectoryEvent",
    "XiModel",
    "alpha2_for_fmeas",
    "amplitude_damp",
    "apply_local_gate",
    "apply_outcome",
    "apply_unitary",
    "bell_damping_matrix",
    "bell_diagonal",
    "bell_outcome_matrix",
    "build_kraus",
    "check_density",
    "coherence_C",
    "coherence_curve",
    "contraction_factor",
    "controller_decide",
    "density",
    "derive_kraus",
    "entanglement_based_parity",
    "entanglement_parity_branches",
    "expected_contraction",
    "experiment_preset",
    "feedback_step",
    "fidelity",
    "filter_update",
    "heisenberg_step",
    "initial_density",
    "integrate_rate_ode",
    "lambert_w0",
    "lyapunov_V",
    "make_filter",
    "mix64",
    "nmeas_lambert",
    "norm_const",
    "optimize_alpha",
    "outcome_probs",
    "parity_curve",
    "phaseflip_counterexample",
    "poisson_pmf",
    "product_curve",
    "random_density",
    "rate_generator",
    "rate_ode",
    "rates",
    "root_channel_demo",
    "run_ensemble",
    "run_preset",
    "run_trajectory",
    "sample_measurement",
    "series_header",
    "series_rows",
    "solve_nmeas",
    "solve_nmeas_from_rates",
    "steady_populations",
    "steady_state",
    "stream_seed",
    "trajectory_rng",
    "write_csv",
    "write_events_csv",
    "write_series_csv",
    "xi_from_bitflips",
    "xi_measurement",
]
