"""Genomic privacy metrics under graded adversaries."""

from privmeter._core import (
    AdversaryLevel,
    Cohort,
    DataError,
    NumericError,
    PrivmeterError,
    Scenario,
    UsageError,
    __version__,
    default_ladder,
    estimate_individual,
    evaluate_ladder,
    mean_ci,
    metric_direction,
    metric_names,
    monotonicity_score,
    per_snp_metric,
    rank_sum_test,
    read_cohort,
    reference_estimate,
    select_scenario,
    strength_color,
    synthesize_cohort,
    synthesize_pedigree,
    welch_t_test,
    write_cohort,
)

__all__ = [
    "AdversaryLevel",
    "Cohort",
    "DataError",
    "NumericError",
    "PrivmeterError",
    "Scenario",
    "UsageError",
    "__version__",
    "default_ladder",
    "estimate_individual",
    "evaluate_ladder",
    "mean_ci",
    "metric_direction",
    "metric_names",
    "monotonicity_score",
    "per_snp_metric",
    "rank_sum_test",
    "read_cohort",
    "reference_estimate",
    "select_scenario",
    "strength_color",
    "synthesize_cohort",
    "synthesize_pedigree",
    "welch_t_test",
    "write_cohort",
]
