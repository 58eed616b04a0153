"""Simulator and analysis toolkit for the binary undecided-state opinion
dynamics with noisy interactions (or stubborn agents) on the complete graph.
"""

from .analytics import (
    CRITICAL_NOISE,
    ExpectedNext,
    Regime,
    ThresholdSet,
    TrajectoryStats,
    below_threshold_entry,
    classify_regime,
    count_switches,
    expected_next,
    expected_next_regime,
    metastable_entry,
    thresholds,
    trajectory_stats,
)
from .core import (
    MAX_EXACT_N,
    Configuration,
    NoiseSpec,
    ObliviousNoise,
    ObservationDistribution,
    Opinion,
    UniformNoise,
    exact_transition_distribution,
    exact_transition_given_observation,
    observation_distribution,
    sample_transitions_aggregated,
    sample_transitions_naive,
    step_aggregated,
    step_naive,
    update_rule,
)
from .gof import GofResult, chi_square_gof, count_outcomes, two_sample_chi_square
from .harness import (
    AnalyticsOptions,
    ExperimentSpec,
    InitialCondition,
    OddBalancedInit,
    SummaryStats,
    SweepCell,
    Trajectory,
    default_entry_frac,
    equivalent_uniform_p,
    format_sweep_table,
    load_spec,
    parse_probability,
    read_trajectories_csv,
    run_experiment,
    run_trial,
    spec_from_mapping,
    summarize,
    sweep,
    trial_rng,
    write_summary_json,
    write_trajectories_csv,
)
from .stubborn import (
    EquivalenceReport,
    NonIntegerStubbornCount,
    StubbornSetup,
    equivalence_report,
    nearest_admissible_n,
    noise_to_stubborn,
    sample_transitions_stubborn,
    step_stubborn,
    stubborn_observation_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "CRITICAL_NOISE",
    "MAX_EXACT_N",
    "AnalyticsOptions",
    "Configuration",
    "EquivalenceReport",
    "ExpectedNext",
    "ExperimentSpec",
    "GofResult",
    "InitialCondition",
    "NoiseSpec",
    "NonIntegerStubbornCount",
    "ObliviousNoise",
    "ObservationDistribution",
    "OddBalancedInit",
    "Opinion",
    "Regime",
    "StubbornSetup",
    "SummaryStats",
    "SweepCell",
    "ThresholdSet",
    "Trajectory",
    "TrajectoryStats",
    "UniformNoise",
    "below_threshold_entry",
    "chi_square_gof",
    "classify_regime",
    "count_outcomes",
    "count_switches",
    "default_entry_frac",
    "equivalence_report",
    "equivalent_uniform_p",
    "exact_transition_distribution",
    "exact_transition_given_observation",
    "expected_next",
    "expected_next_regime",
    "format_sweep_table",
    "load_spec",
    "metastable_entry",
    "nearest_admissible_n",
    "noise_to_stubborn",
    "observation_distribution",
    "parse_probability",
    "read_trajectories_csv",
    "run_experiment",
    "run_trial",
    "sample_transitions_aggregated",
    "sample_transitions_naive",
    "sample_transitions_stubborn",
    "spec_from_mapping",
    "step_aggregated",
    "step_naive",
    "step_stubborn",
    "stubborn_observation_distribution",
    "summarize",
    "sweep",
    "thresholds",
    "trajectory_stats",
    "trial_rng",
    "two_sample_chi_square",
    "update_rule",
    "write_summary_json",
    "write_trajectories_csv",
]
