"""Experiment configuration, seeded replicate execution, and aggregation."""

from staghunt.harness.aggregate import (
    BARS_HEADER,
    CURVES_HEADER,
    RESULTS_HEADER,
    aggregate,
    convergence_rates,
    read_results_csv,
    results_rows,
    standard_error,
    write_report_csv,
    write_results_csv,
)
from staghunt.harness.config import (
    ExperimentConfig,
    SweepSpec,
    assignment_alphas,
    config_from_dict,
    config_to_yaml,
    default_config,
    load_config,
    load_sweep,
)
from staghunt.harness.runner import (
    PAYOFF_DOMINANT,
    RISK_DOMINANT,
    UNRESOLVED,
    WORKERS_ENV_VAR,
    BlockStats,
    ExperimentRun,
    ReplicateResult,
    classify_convergence,
    make_blocks,
    resolve_workers,
    run_experiment,
    run_replicate,
)

__all__ = [
    "BARS_HEADER",
    "CURVES_HEADER",
    "PAYOFF_DOMINANT",
    "RESULTS_HEADER",
    "RISK_DOMINANT",
    "UNRESOLVED",
    "WORKERS_ENV_VAR",
    "BlockStats",
    "ExperimentConfig",
    "ExperimentRun",
    "ReplicateResult",
    "SweepSpec",
    "aggregate",
    "assignment_alphas",
    "classify_convergence",
    "config_from_dict",
    "config_to_yaml",
    "convergence_rates",
    "default_config",
    "load_config",
    "load_sweep",
    "make_blocks",
    "read_results_csv",
    "resolve_workers",
    "results_rows",
    "run_experiment",
    "run_replicate",
    "standard_error",
    "write_report_csv",
    "write_results_csv",
]
