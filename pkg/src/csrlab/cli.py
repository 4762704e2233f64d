"""Command-line entry point.

Subcommands:
  run            seeded learning/baseline episodes -> step table + summary
  bound          schedule upper bound -> schedule JSON (optional LP export)
  sweep          bound-solver timing across network sizes -> CSV + slope
  inspect-agent  pretty-print a saved agent state JSON
  report         render figures from a summary JSON

Output directory resolution: --out flag, then the config's [run].out, then
the CSRLAB_OUT_DIR environment variable, then ./csrlab-results.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import run_experiment, run_scalability_sweep
from .reporting import render_report

__all__ = ["main"]


def _resolve_out(flag: str | None, cfg_out: str | None) -> Path:
    return Path(flag or cfg_out or os.environ.get("CSRLAB_OUT_DIR") or "csrlab-results")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["base_seed"] = args.seed
        updates["explicit_seeds"] = None
    if getattr(args, "steps", None) is not None:
        updates["steps"] = args.steps
    if getattr(args, "repetitions", None) is not None:
        updates["repetitions"] = args.repetitions
        updates["explicit_seeds"] = None
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    if getattr(args, "format", None) is not None:
        updates["out_format"] = args.format
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out_dir = _resolve_out(args.out, cfg.out)
    result = run_experiment(cfg, out_dir)
    lines = [f"wrote {result.summary_path}"]
    if result.steps_path is not None:
        lines.append(f"wrote {result.steps_path}")
    for p in result.agent_paths:
        lines.append(f"wrote {p}")
    print("\n".join(lines))
    return 0


def _cmd_bound(args) -> int:
    cfg = load_config(args.config)
    kind = {"throughput": "t_optimal", "fairness": "f_optimal"}[args.mode]
    updates = {"policy_kind": kind}
    if args.grid:
        updates["grid_power"] = True
    if args.seed is not None:
        updates["scenario"] = dataclasses.replace(cfg.scenario, seed=args.seed)
    cfg = dataclasses.replace(cfg, **updates)
    out_dir = _resolve_out(args.out, cfg.out)
    result = run_experiment(cfg, out_dir, export_lp=args.export_lp)
    sched = result.summary["schedule"]
    print(f"wrote {result.summary_path}")
    print(
        f"{args.mode} bound: objective {sched['objective_value']:.4f} Mb/s "
        f"({sched['iterations']} iterations, {sched['wall_time_s']:.2f} s, "
        f"{sched['status']})"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    ap_counts = tuple(int(v) for v in args.ap_counts.split(","))
    out_dir = _resolve_out(args.out, cfg.out)
    result = run_scalability_sweep(
        cfg.scenario,
        ap_counts,
        args.reps,
        out_dir=out_dir,
        power_levels=cfg.power_levels,
        grid=not args.continuous,
    )
    print(f"wrote {result.csv_path}")
    print(f"wrote {result.summary_path}")
    print(f"log-log wall-time slope over AP counts {list(ap_counts)}: {result.slope:.3f}")
    return 0


def _describe_bandit(state: dict, top: int) -> list[str]:
    arms = state.get("arms", {})
    ranked = sorted(
        arms.items(), key=lambda kv: (kv[1]["mean"], kv[1]["count"]), reverse=True
    )[:top]
    lines = [
        f"    kind={state.get('kind')} arms={state.get('n_arms')} pulls={state.get('total')}"
    ]
    for arm, rec in ranked:
        lines.append(
            f"      arm {arm}: mean reward {rec['mean']:.4f} over {rec['count']} pulls"
        )
    return lines


def _describe_state(state: dict, top: int) -> list[str]:
    kind = state.get("type")
    lines = [f"agent type: {kind}"]
    if kind == "flat":
        for pair, sub in sorted(state.get("pairs", {}).items()):
            lines.append(f"  sharing pair {pair}:")
            lines.extend(_describe_bandit(sub, top))
    elif kind == "hmab":
        for level in ("level1", "level2", "level3"):
            lines.append(f"  {level}:")
            for key, sub in sorted(state.get(level, {}).items()):
                lines.append(f"   agent {key}:")
                lines.extend(_describe_bandit(sub, top))
    elif kind == "clustered":
        for cluster, sub in sorted(state.get("clusters", {}).items()):
            lines.append(f"  cluster {cluster}:")
            lines.extend(
                "  " + line for line in _describe_state(sub, top)[1:] or ["    (empty)"]
            )
    else:
        lines.append(json.dumps(state, indent=2))
    return lines


def _cmd_inspect(args) -> int:
    doc = json.loads(Path(args.state).read_text())
    state = doc.get("state", doc)
    meta = []
    if "repetition" in doc:
        meta.append(f"repetition {doc['repetition']}")
    if "seed" in doc:
        meta.append(f"seed {doc['seed']}")
    if meta:
        print(", ".join(meta))
    print("\n".join(_describe_state(state, args.top)))
    return 0


def _cmd_report(args) -> int:
    out_dir = Path(args.out) if args.out else Path(args.summary).parent
    for path in render_report(args.summary, out_dir):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csrlab",
        description="Desk-scale laboratory for coordinated spatial-reuse scheduling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded episodes for the configured policy")
    run.add_argument("--config", required=True, help="TOML experiment config")
    run.add_argument("--seed", type=int, help="override the base seed")
    run.add_argument("--steps", type=int, help="override the episode length")
    run.add_argument("--repetitions", type=int, help="override the repetition count")
    run.add_argument("--workers", type=int, help="parallel repetition workers")
    run.add_argument("--format", choices=("csv", "json"), help="step table format")
    run.add_argument("--out", help="output directory")
    run.set_defaults(func=_cmd_run)

    bound = sub.add_parser("bound", help="compute a schedule upper bound")
    bound.add_argument("--config", required=True)
    bound.add_argument(
        "--mode", choices=("throughput", "fairness"), default="throughput"
    )
    bound.add_argument("--grid", action="store_true",
                       help="restrict powers to the discrete levels")
    bound.add_argument("--seed", type=int, help="override the scenario seed")
    bound.add_argument("--export-lp", help="directory for LP text files")
    bound.add_argument("--out", help="output directory")
    bound.set_defaults(func=_cmd_bound)

    sweep = sub.add_parser("sweep", help="time the bound solver across sizes")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--ap-counts", default="4,6,9",
                       help="comma-separated AP counts (ascending)")
    sweep.add_argument("--reps", type=int, default=3)
    sweep.add_argument("--continuous", action="store_true",
                       help="solve with continuous power instead of the grid")
    sweep.add_argument("--out", help="output directory")
    sweep.set_defaults(func=_cmd_sweep)

    inspect = sub.add_parser("inspect-agent", help="pretty-print saved agent state")
    inspect.add_argument("state", help="agent state JSON file")
    inspect.add_argument("--top", type=int, default=5,
                         help="arms to show per bandit")
    inspect.set_defaults(func=_cmd_inspect)

    report = sub.add_parser("report", help="render figures from a summary JSON")
    report.add_argument("summary", help="summary JSON file")
    report.add_argument("--out", help="figure output directory")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
