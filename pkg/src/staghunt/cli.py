"""Command-line interface.

Subcommands: ``analyze`` (closed-form thresholds, equilibria, basins),
``run`` (one experiment cell), ``sweep`` (grid of cells from a YAML file),
``report`` (summaries from a results CSV). Exit code is nonzero iff any
replicate failed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from staghunt.dynamics import DynamicConfig, basin_fraction
from staghunt.harness import (
    BARS_HEADER,
    CURVES_HEADER,
    aggregate,
    config_to_yaml,
    convergence_rates,
    default_config,
    load_sweep,
    read_results_csv,
    run_experiment,
    write_report_csv,
    write_results_csv,
)
from staghunt.harness.config import ALL_GAMES, MATRIX, NETWORK, WEAKLINK
from staghunt.matrix_games import (
    ProsocialWeight,
    StagHuntPayoffs,
    alpha_star,
    enumerate_pure_nash,
    prosocial_transform,
    pstar,
    risk_dominance,
    to_bimatrix,
)


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def cmd_analyze(args) -> int:
    if args.matrix:
        return _analyze_matrix_file(args)
    h, c, m, g = _parse_floats(args.payoffs)
    payoffs = StagHuntPayoffs(h, c, m, g)
    a1 = ProsocialWeight(args.alpha1)
    a2 = ProsocialWeight(args.alpha2)
    verdict = risk_dominance(payoffs)
    print(f"payoffs: h={h:g} c={c:g} m={m:g} g={g:g}")
    print(f"alpha_star: {alpha_star(payoffs).alpha:.6f}")
    print(f"pstar(alpha={a1.alpha:g}): {pstar(payoffs, a1):.6f}")
    print(f"pstar(alpha={a2.alpha:g}): {pstar(payoffs, a2):.6f}")
    tie = " (tie)" if verdict.tie else ""
    print(f"hunt_risk_dominant: {verdict.hunt}{tie}")
    game = prosocial_transform(to_bimatrix(payoffs), a1, a2)
    profiles = sorted((p.a1, p.a2) for p in enumerate_pure_nash(game))
    names = {0: "Hunt", 1: "Forage"}
    labels = ", ".join(f"({names[i]},{names[j]})" for i, j in profiles)
    print(f"pure_nash[alpha=({a1.alpha:g},{a2.alpha:g})]: {labels}")

    if args.basins:
        cfg = DynamicConfig()
        alphas = _parse_floats(args.alpha_grid)
        with open(args.basins, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha1", "alpha2", "g", "fraction_hunt", "unresolved"])
            for av1 in alphas:
                for av2 in alphas:
                    est = basin_fraction(
                        payoffs, ProsocialWeight(av1), ProsocialWeight(av2), cfg, args.resolution
                    )
                    writer.writerow(
                        [repr(float(av1)), repr(float(av2)), repr(float(g)),
                         repr(est.fraction_hunt), repr(est.unresolved)]
                    )
        print(f"basin grid written to {args.basins}")
    return 0


def _analyze_matrix_file(args) -> int:
    """Equilibrium analysis of an arbitrary plain-text reward table."""
    from staghunt.matrix_games import (
        dominance_alpha,
        is_all_subgames_staghunt,
        parse_matrix,
        sort_by_diagonal,
    )

    game = parse_matrix(Path(args.matrix).read_text())
    a1 = ProsocialWeight(args.alpha1)
    a2 = ProsocialWeight(args.alpha2)
    mixed = prosocial_transform(game, a1, a2)
    profiles = sorted((p.a1, p.a2) for p in enumerate_pure_nash(mixed))
    print(f"strategies: {game.n1} x {game.n2}, symmetric: {game.symmetric}")
    print(f"pure_nash[alpha=({a1.alpha:g},{a2.alpha:g})]: {profiles}")
    if game.symmetric:
        canonical = sort_by_diagonal(game)
        if is_all_subgames_staghunt(canonical):
            print("all_subgames_staghunt: True")
            print(f"dominance_alpha: {dominance_alpha(canonical).alpha:.6f}")
        else:
            print("all_subgames_staghunt: False")
    return 0


def _run_cells(cells, out_dir: Path, workers) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = []
    failed = 0
    for cfg in cells:
        run = run_experiment(cfg, workers=workers)
        runs.append(run)
        for replicate, message in run.failures:
            failed += 1
            print(f"[fail] {cfg.condition} replicate {replicate}: {message}", file=sys.stderr)
        print(f"[done] {cfg.experiment_id} {cfg.condition}: {len(run.results)} replicates")
    write_results_csv(out_dir / "results.csv", runs)
    with open(out_dir / "config.yaml", "w") as fh:
        for run in runs:
            fh.write(config_to_yaml(run.config))
            fh.write("---\n")
    print(f"results written to {out_dir / 'results.csv'}")
    return 1 if failed else 0


def cmd_run(args) -> int:
    overrides: dict = {}
    for name in (
        "replicates", "rounds", "episodes", "base_seed", "block_size", "lr",
        "init_sigma", "mixer_mode", "graph", "aggregation", "weaklink_a",
        "gore_penalty", "young_fraction", "spawn_prob", "penalty_multiplier",
        "batch_episodes", "entropy_weight", "episode_mean_length",
        "base_channels", "net_lr", "experiment_id",
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.alphas is not None:
        overrides["alphas"] = tuple(_parse_floats(args.alphas))
        overrides["n_agents"] = len(overrides["alphas"])
    if args.penalty is not None:
        overrides["g"] = -args.penalty
    cfg = default_config(args.game, **overrides)
    return _run_cells([cfg], Path(args.out), args.workers)


def cmd_sweep(args) -> int:
    spec = load_sweep(args.config)
    return _run_cells(spec.cells(), Path(args.out), args.workers)


def cmd_report(args) -> int:
    rows = read_results_csv(args.results)
    if args.kind == "bars":
        write_report_csv(args.out, convergence_rates(rows), BARS_HEADER)
    else:
        write_report_csv(args.out, aggregate(rows), CURVES_HEADER)
    print(f"{args.kind} report written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staghunt")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="closed-form thresholds, equilibria, basins")
    analyze.add_argument("--payoffs", default="2,1,1,-1", help="h,c,m,g")
    analyze.add_argument("--matrix", help="plain-text reward table file to analyze instead")
    analyze.add_argument("--alpha1", type=float, default=0.0)
    analyze.add_argument("--alpha2", type=float, default=0.0)
    analyze.add_argument("--basins", metavar="CSV", help="write a basin grid CSV here")
    analyze.add_argument("--alpha-grid", default="0,0.25,0.5,0.75,1", dest="alpha_grid")
    analyze.add_argument("--resolution", type=int, default=101)
    analyze.set_defaults(func=cmd_analyze)

    run = sub.add_parser("run", help="run one experiment cell")
    run.add_argument("game", choices=ALL_GAMES)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--alphas", help="comma-separated per-agent prosociality")
    run.add_argument("--penalty", type=float, help="matrix/network gore penalty (g = -penalty)")
    for name, kind in (
        ("replicates", int), ("rounds", int), ("episodes", int), ("base_seed", int),
        ("block_size", int), ("lr", float), ("init_sigma", float), ("mixer_mode", str),
        ("graph", str), ("aggregation", str), ("weaklink_a", float), ("gore_penalty", float),
        ("young_fraction", float), ("spawn_prob", float), ("penalty_multiplier", float),
        ("batch_episodes", int), ("entropy_weight", float), ("episode_mean_length", int),
        ("base_channels", int), ("net_lr", float), ("experiment_id", str),
    ):
        run.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a YAML-defined sweep grid")
    sweep.add_argument("config")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.set_defaults(func=cmd_sweep)

    report = sub.add_parser("report", help="summaries from a results CSV")
    report.add_argument("results")
    report.add_argument("--kind", choices=("bars", "curves"), required=True)
    report.add_argument("--out", required=True)
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
