"""chainsim: stochastic simulation and numerical analysis of an n-node
blockchain under continuous cyber attack and IT monitoring."""

from .analytic import (
    AnalyticResult,
    QuadratureConfig,
    conditional_cycle_moments,
    conditional_detect_cdf,
    functional_prob,
    functional_prob_grid,
    hack_success_prob,
    limiting_functional_prob,
    mean_functional_time,
)
from .distributions import (
    Distribution,
    Exponential,
    Gamma,
    SumDistribution,
    Tabulated,
    Weibull,
    cdf,
    distribution_from_json,
    distribution_to_json,
    pdf,
    sample,
    sum_dist,
)
from .econ import CostModel, PowerTerm, SweepRow, SweepTable, expected_net_revenue, sweep
from .errors import (
    ChainsimError,
    ConfigurationError,
    NumericalError,
    ResolutionError,
    RunawayError,
    UnderflowError,
)
from .mc import (
    DEFAULT_CYCLE_CAP,
    Estimate,
    ReplicationPlan,
    TimeToHack,
    estimate_cycle_success_prob,
    estimate_functional_prob,
    estimate_mean_functional_time,
    simulate_time_to_hack,
)
from .model import (
    AttackKind,
    AttackModel,
    CycleOutcome,
    OutcomeKind,
    model_from_json,
    model_to_json,
    nodes_to_threshold,
    play_cycle,
)
from .special import reg_lower_inc_gamma, reg_upper_inc_gamma
from .streams import SubstreamPool, replication_stream, row_seed

__version__ = "0.1.0"

__all__ = [
    "AnalyticResult",
    "AttackKind",
    "AttackModel",
    "ChainsimError",
    "ConfigurationError",
    "CostModel",
    "CycleOutcome",
    "DEFAULT_CYCLE_CAP",
    "Distribution",
    "Estimate",
    "Exponential",
    "Gamma",
    "NumericalError",
    "OutcomeKind",
    "PowerTerm",
    "QuadratureConfig",
    "ReplicationPlan",
    "ResolutionError",
    "RunawayError",
    "SubstreamPool",
    "SumDistribution",
    "SweepRow",
    "SweepTable",
    "Tabulated",
    "TimeToHack",
    "UnderflowError",
    "Weibull",
    "cdf",
    "conditional_cycle_moments",
    "conditional_detect_cdf",
    "distribution_from_json",
    "distribution_to_json",
    "estimate_cycle_success_prob",
    "estimate_functional_prob",
    "estimate_mean_functional_time",
    "expected_net_revenue",
    "functional_prob",
    "functional_prob_grid",
    "hack_success_prob",
    "limiting_functional_prob",
    "mean_functional_time",
    "model_from_json",
    "model_to_json",
    "nodes_to_threshold",
    "pdf",
    "play_cycle",
    "reg_lower_inc_gamma",
    "reg_upper_inc_gamma",
    "replication_stream",
    "row_seed",
    "sample",
    "simulate_time_to_hack",
    "sum_dist",
    "sweep",
]
