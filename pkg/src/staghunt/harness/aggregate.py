"""Result expansion, aggregation with standard errors, and CSV emission.

The raw results CSV is the single interchange format: one row per
(replicate, block, agent). Reports derive per-condition summaries from it;
plotting consumes those summaries verbatim and never recomputes statistics.
Float fields are written with repr so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict

from staghunt.harness.config import ExperimentConfig
from staghunt.harness.runner import PAYOFF_DOMINANT, ExperimentRun

RESULTS_HEADER = [
    "experiment_id",
    "condition",
    "replicate",
    "block",
    "agent",
    "mean_reward",
    "coord_rate",
    "converged_label",
    "seed",
]

CURVES_HEADER = [
    "condition",
    "assignment",
    "risk",
    "block",
    "agent",
    "n",
    "mean_reward_mean",
    "mean_reward_se",
    "coord_rate_mean",
    "coord_rate_se",
]

BARS_HEADER = [
    "condition",
    "assignment",
    "risk",
    "n",
    "payoff_dominant_rate",
    "payoff_dominant_se",
]


def split_condition(condition: str) -> tuple[str, float]:
    """Parse "assignment|name=value" into (assignment, value)."""
    try:
        assignment, risk = condition.split("|", 1)
        _, value = risk.split("=", 1)
        return assignment, float(value)
    except ValueError:
        return condition, math.nan


def results_rows(run: ExperimentRun) -> list[dict]:
    """Expand one experiment into results-CSV row dicts."""
    rows = []
    cfg = run.config
    for result in run.results:
        for block in result.blocks:
            for agent, reward in enumerate(block.mean_rewards, start=1):
                rows.append(
                    {
                        "experiment_id": cfg.experiment_id,
                        "condition": cfg.condition,
                        "replicate": result.replicate,
                        "block": block.index,
                        "agent": str(agent),
                        "mean_reward": reward,
                        "coord_rate": block.coord_rate,
                        "converged_label": result.label,
                        "seed": result.seed,
                    }
                )
    return rows


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(path, runs) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for run in runs:
            for row in results_rows(run):
                writer.writerow([_format(row[col]) for col in RESULTS_HEADER])


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(
                f"unexpected results header {reader.fieldnames}; wanted {RESULTS_HEADER}"
            )
        rows = []
        for raw in reader:
            rows.append(
                {
                    "experiment_id": raw["experiment_id"],
                    "condition": raw["condition"],
                    "replicate": int(raw["replicate"]),
                    "block": int(raw["block"]),
                    "agent": raw["agent"],
                    "mean_reward": float(raw["mean_reward"]),
                    "coord_rate": float(raw["coord_rate"]),
                    "converged_label": raw["converged_label"],
                    "seed": int(raw["seed"]),
                }
            )
        return rows


def standard_error(values) -> float | None:
    """Sample-stddev / sqrt(n); absent (None) for a single observation.

    Values are shifted by the first element before squaring so that
    identical replicates report exactly zero.
    """
    n = len(values)
    if n < 2:
        return None
    shifted = [v - values[0] for v in values]
    mean = sum(shifted) / n
    var = sum((v - mean) ** 2 for v in shifted) / (n - 1)
    return math.sqrt(var) / math.sqrt(n)


def aggregate(rows, include_agent_mean: bool = True) -> list[dict]:
    """Per (condition, block, agent) means and standard errors.

    Statistics are taken across replicates. With ``include_agent_mean`` an
    extra agent="mean" series carries the per-replicate average over agents,
    the quantity the reward curves plot.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    cells: dict = defaultdict(lambda: {"mean_reward": [], "coord_rate": []})
    for row in rows:
        key = (row["condition"], row["block"], row["agent"])
        cells[key]["mean_reward"].append(row["mean_reward"])
        cells[key]["coord_rate"].append(row["coord_rate"])
    if include_agent_mean:
        per_replicate: dict = defaultdict(lambda: {"mean_reward": [], "coord_rate": []})
        for row in rows:
            key = (row["condition"], row["block"], row["replicate"])
            per_replicate[key]["mean_reward"].append(row["mean_reward"])
            per_replicate[key]["coord_rate"].append(row["coord_rate"])
        for (condition, block, _), values in per_replicate.items():
            key = (condition, block, "mean")
            n_agents = len(values["mean_reward"])
            cells[key]["mean_reward"].append(sum(values["mean_reward"]) / n_agents)
            cells[key]["coord_rate"].append(sum(values["coord_rate"]) / n_agents)

    out = []
    for condition, block, agent in sorted(cells):
        values = cells[(condition, block, agent)]
        assignment, risk = split_condition(condition)
        n = len(values["mean_reward"])
        out.append(
            {
                "condition": condition,
                "assignment": assignment,
                "risk": risk,
                "block": block,
                "agent": agent,
                "n": n,
                "mean_reward_mean": sum(values["mean_reward"]) / n,
                "mean_reward_se": standard_error(values["mean_reward"]),
                "coord_rate_mean": sum(values["coord_rate"]) / n,
                "coord_rate_se": standard_error(values["coord_rate"]),
            }
        )
    return out


def convergence_rates(rows) -> list[dict]:
    """Per condition: share of replicates labeled payoff-dominant, with SE."""
    if not rows:
        raise ValueError("no rows to aggregate")
    labels: dict = defaultdict(dict)
    for row in rows:
        labels[row["condition"]][row["replicate"]] = row["converged_label"]
    out = []
    for condition in sorted(labels):
        indicators = [
            1.0 if label == PAYOFF_DOMINANT else 0.0 for label in labels[condition].values()
        ]
        assignment, risk = split_condition(condition)
        out.append(
            {
                "condition": condition,
                "assignment": assignment,
                "risk": risk,
                "n": len(indicators),
                "payoff_dominant_rate": sum(indicators) / len(indicators),
                "payoff_dominant_se": standard_error(indicators),
            }
        )
    return out


def write_report_csv(path, rows, header) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if row[col] is None else _format(row[col]) for col in header])
