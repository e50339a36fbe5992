"""opdyn: binary opinion dynamics on a complete network, simulated and solved.

Voter and 2K-sample majority updating with biased agents, plus the majority
model with stubborn agents; exact birth-death absorption analytics,
mean-field ODE limits, and reproducible Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .exact import (
    AbsorptionTimes,
    ExitProfile,
    PrecisionLossError,
    gambler_ruin,
    majority_exit_profile,
    mean_absorption_time,
    voter_exit_probability,
    voter_time_bracket,
)
from .meanfield import (
    EquilibriumReport,
    MeanFieldSolution,
    StepSizeError,
    integrate,
    majority_meanfield_rhs,
    meanfield_rhs,
    stubborn_equilibria,
    stubborn_meanfield_rhs,
    voter_hit_time,
    voter_meanfield_rhs,
)
from .models import (
    BirthDeathChain,
    MajorityParams,
    ModelParams,
    StubbornParams,
    VoterParams,
    binomial_tail,
    build_chain,
    build_majority_chain,
    build_stubborn_chain,
    build_voter_chain,
    initial_state,
)
from .oddsratio import (
    ThresholdResult,
    g_k,
    h_k,
    monotonicity_certificate,
    threshold_beta,
)
from .simulate import (
    DwellReport,
    MonteCarloSummary,
    ScalingFit,
    TrajectoryRecord,
    compare_meanfield,
    derive_run_seeds,
    dwell_analysis,
    estimate_consensus_time,
    estimate_exit_probability,
    fit_log_scaling,
    simulate,
    stationary_histogram,
)
from .experiments import (  # noqa: E402  (needs __version__ above)
    PRESETS,
    ConfigError,
    ExperimentConfig,
    ResultTable,
    preset_config,
    run_experiment,
)

__all__ = [
    "PRESETS",
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "preset_config",
    "run_experiment",
    "AbsorptionTimes",
    "BirthDeathChain",
    "DwellReport",
    "EquilibriumReport",
    "ExitProfile",
    "MajorityParams",
    "MeanFieldSolution",
    "ModelParams",
    "MonteCarloSummary",
    "PrecisionLossError",
    "ScalingFit",
    "StepSizeError",
    "StubbornParams",
    "ThresholdResult",
    "TrajectoryRecord",
    "VoterParams",
    "binomial_tail",
    "build_chain",
    "build_majority_chain",
    "build_stubborn_chain",
    "build_voter_chain",
    "compare_meanfield",
    "derive_run_seeds",
    "dwell_analysis",
    "estimate_consensus_time",
    "estimate_exit_probability",
    "fit_log_scaling",
    "g_k",
    "gambler_ruin",
    "h_k",
    "initial_state",
    "integrate",
    "majority_exit_profile",
    "majority_meanfield_rhs",
    "mean_absorption_time",
    "meanfield_rhs",
    "monotonicity_certificate",
    "simulate",
    "stationary_histogram",
    "stubborn_equilibria",
    "stubborn_meanfield_rhs",
    "threshold_beta",
    "voter_exit_probability",
    "voter_hit_time",
    "voter_meanfield_rhs",
    "voter_time_bracket",
]
