"""Command-line entry point: one-shot solves and experiment runs.

``fogform solve`` prints the equal-latency task distribution for the
configured node set.  ``fogform experiment <name>`` writes ``<name>.csv``
plus a ``<name>.manifest`` JSON (and by default a ``<name>.png`` figure)
into the output directory; the manifest embeds the resolved configuration
so the run can be reproduced byte for byte by pointing ``--config`` at it.
"""

from __future__ import annotations

import argparse
import datetime
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    apply_overrides,
    build_scenario,
    experiment_params,
    load_config,
)
from .report import format_value, write_csv, write_manifest
from .scenarios import (
    ExperimentTable,
    ScenarioConfig,
    choose_j_table,
    node_set_for,
    offline_candidates,
    run_distance_sweep,
    run_offline_sweep,
    run_online_vs_offline,
    run_ratio_cdf,
)
from .selection import offline_top_j
from .solver import InfeasibleError, solve_distribution

EXPERIMENTS = ("offline-sweep", "online-vs-offline", "ratio-cdf", "distance-sweep", "choose-j")


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat()


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogform",
        description="Fog network formation and task distribution simulator.",
    )
    parser.add_argument("--version", action="version", version=f"fogform {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve the task distribution for the configured node set")
    solve.add_argument("--config", help="YAML config file or a run manifest")
    solve.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (dotted path)")

    exp = sub.add_parser("experiment", help="run an experiment and write CSV + manifest")
    exp.add_argument("name", choices=EXPERIMENTS)
    exp.add_argument("--config", help="YAML config file or a run manifest")
    exp.add_argument("--out", required=True, help="output directory")
    exp.add_argument("--seed", type=int, help="override the config seed")
    exp.add_argument("--workers", type=int, default=1, help="parallel Monte Carlo workers")
    exp.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key (dotted path)")
    exp.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    return parser


def _resolve(args) -> tuple[dict, ScenarioConfig]:
    config = load_config(args.config)
    apply_overrides(config, args.overrides)
    if getattr(args, "seed", None) is not None:
        config["seed"] = int(args.seed)
    return config, build_scenario(config)


def cmd_solve(args) -> int:
    _, cfg = _resolve(args)
    candidates = offline_candidates(cfg)
    if cfg.J > len(candidates):
        raise ConfigError(f"config key 'J' ({cfg.J}) exceeds n_candidates ({cfg.n_candidates})")
    chosen = offline_top_j(candidates, cfg.J).chosen
    report = solve_distribution(node_set_for(cfg, chosen), cfg.eta)

    dist = report.distribution
    labels = ["local", "cloud"] + [f"fog{i + 1}" for i in range(len(dist.alpha_fog))]
    alphas = [dist.alpha_local, dist.alpha_cloud, *dist.alpha_fog]
    print(f"node set: J={len(chosen)} neighbors, x_i={format_value(cfg.x_i)} packets/s, "
          f"eta={format_value(cfg.eta)} s")
    print(f"{'path':<8} {'alpha':<24} {'delay_s':<24} active")
    for label, alpha, delay, active in zip(labels, alphas, report.per_path_delays,
                                           report.active_mask):
        print(f"{label:<8} {format_value(alpha):<24} {format_value(delay):<24} "
              f"{'yes' if active else 'no'}")
    print(f"common_delay_s {format_value(report.common_delay)}")
    print(f"max_latency_s  {format_value(report.max_delay)}")
    print(f"total_cost_s   {format_value(report.total_cost)}")
    return 0


def _exp_offline_sweep(cfg, params, workers):
    j_range = range(int(params["j_min"]), int(params["j_max"]) + 1)
    return run_offline_sweep(cfg, j_range, params["mu_ij"]), {}


def _exp_online_vs_offline(cfg, params, workers):
    j_range = range(int(params["j_min"]), int(params["j_max"]) + 1)
    return run_online_vs_offline(cfg, j_range, workers=workers), {}


def _exp_ratio_cdf(cfg, params, workers):
    cfg = replace(cfg, J=int(params.get("j", cfg.J)))
    return run_ratio_cdf(cfg, workers=workers), {}


def _exp_distance_sweep(cfg, params, workers):
    cfg = replace(cfg, J=int(params.get("j", cfg.J)))
    return run_distance_sweep(cfg, params["distances"], workers=workers), {}


def _exp_choose_j(cfg, params, workers):
    best, table = choose_j_table(cfg, (int(params["j_min"]), int(params["j_max"])))
    print(f"chosen J = {best}")
    return table, {"result": {"chosen_j": best}}


_RUNNERS = {
    "offline-sweep": _exp_offline_sweep,
    "online-vs-offline": _exp_online_vs_offline,
    "ratio-cdf": _exp_ratio_cdf,
    "distance-sweep": _exp_distance_sweep,
    "choose-j": _exp_choose_j,
}


def cmd_experiment(args) -> int:
    config, cfg = _resolve(args)
    params = experiment_params(config, args.name)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        print(f"error: cannot create output directory {out_dir}: {err}", file=sys.stderr)
        return 2

    started = _utc_now()
    table, extras = _RUNNERS[args.name](cfg, params, max(1, args.workers))

    csv_path = out_dir / f"{args.name}.csv"
    write_csv(csv_path, table.columns, table.rows)
    outputs = [csv_path.name]
    if not args.no_figure:
        from .figures import render_figure  # deferred: pulls in matplotlib

        fig_path = render_figure(args.name, table, out_dir / f"{args.name}.png")
        outputs.append(fig_path.name)

    manifest = {
        "experiment": args.name,
        "tool_version": __version__,
        "seed": cfg.seed,
        "workers": max(1, args.workers),
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": outputs,
        "config": config,
        **extras,
    }
    write_manifest(out_dir / f"{args.name}.manifest", manifest)
    print(f"wrote {csv_path} ({len(table.rows)} rows)")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args)
        return cmd_experiment(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except InfeasibleError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
