"""Ruin probabilities of heavy-tailed multivariate random walks.

The package models increments X = R * theta with a heavy-tailed radial law R
and a directional mixture theta on the unit L1 sphere, estimates the
probability that the walk ever enters a distant cone-shaped target, computes
the matching closed-form asymptotic, and ships executable diagnostics (A1
through A6) for the structural assumptions behind that asymptotic.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticApprox,
    HalfspaceTail,
    asymptotic_ruin,
    check_a5,
    check_a6,
    equivalence_gap,
    halfspace_integral,
    sum_tail,
    u_grid_for_asym_span,
)
from .configs import (
    ConfigError,
    ExperimentConfig,
    parse_experiment_config,
    reference_exponential,
    reference_lognormal,
    reference_pareto,
    reference_u_grid,
    reference_weibull,
    two_cone_reference,
)
from .geometry import (
    AngularSet,
    DiamondCap,
    admissibility_report,
    cone_contains_rows,
    jump_threshold,
    sample_l1_ball,
    set_distance,
)
from .model import (
    AngularMixture,
    IncrementModel,
    WeightFn,
    check_a3,
    check_a4,
    conditional_angle_prob,
    conditional_angle_sweep,
    drift_certificate,
    model_from_config,
)
from .quadrature import (
    TailIntegralTable,
    doubling_tail_integral,
    survival_tail_integral,
    tail_weight_integral_batch,
    weighted_tail_moment,
)
from .radial import Exponential, LogNormal, Pareto, PointMass, Weibull, law_from_config
from .simulate import (
    RuinEstimate,
    StoppingRule,
    TwoConeResult,
    ruin_mc_bigjump,
    ruin_mc_cone,
    ruin_mc_halfspace,
    step_schedule,
    step_schedule_alternative,
    two_cone_mc,
    wilson_interval,
)
from .taildiag import (
    DiagnosticReport,
    IntegratedTail,
    check_a1,
    check_a2,
    conv_tail_ratio,
    integrated_tail,
)

__all__ = [
    "__version__",
    "AngularMixture",
    "AngularSet",
    "AsymptoticApprox",
    "ConfigError",
    "DiagnosticReport",
    "DiamondCap",
    "Exponential",
    "ExperimentConfig",
    "HalfspaceTail",
    "IncrementModel",
    "IntegratedTail",
    "LogNormal",
    "Pareto",
    "PointMass",
    "RuinEstimate",
    "StoppingRule",
    "TailIntegralTable",
    "TwoConeResult",
    "Weibull",
    "WeightFn",
    "admissibility_report",
    "asymptotic_ruin",
    "check_a1",
    "check_a2",
    "check_a3",
    "check_a4",
    "check_a5",
    "check_a6",
    "conditional_angle_prob",
    "conditional_angle_sweep",
    "cone_contains_rows",
    "conv_tail_ratio",
    "doubling_tail_integral",
    "drift_certificate",
    "equivalence_gap",
    "halfspace_integral",
    "integrated_tail",
    "jump_threshold",
    "law_from_config",
    "model_from_config",
    "parse_experiment_config",
    "reference_exponential",
    "reference_lognormal",
    "reference_pareto",
    "reference_u_grid",
    "reference_weibull",
    "ruin_mc_bigjump",
    "ruin_mc_cone",
    "ruin_mc_halfspace",
    "sample_l1_ball",
    "set_distance",
    "step_schedule",
    "step_schedule_alternative",
    "sum_tail",
    "survival_tail_integral",
    "tail_weight_integral_batch",
    "two_cone_mc",
    "two_cone_reference",
    "u_grid_for_asym_span",
    "weighted_tail_moment",
    "wilson_interval",
]
