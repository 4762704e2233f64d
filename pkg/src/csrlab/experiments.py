"""Experiment orchestration: seeded repetitions, output files, sweeps.

Episode repetitions are independent and run in a process pool when
``workers > 1``; results are reassembled in repetition order, so output
files are byte-identical regardless of the pool size.  Every output file
embeds the fully resolved configuration and seed list: CSV files as
``#``-prefixed header lines, JSON files under a ``config`` key.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import detect_convergence, station_cdf, summarize, theil_sen_slope
from .config import ExperimentConfig
from .optimizer import column_generation
from .radio import DEFAULT_CHANNEL, DEFAULT_MCS_TABLE, ChannelParams, McsTable, PowerConfig
from .scenarios import ScenarioSpec, grid_for_ap_count
from .schedulers import AgentHierarchy, FlatAgent, clustered_flat, clustered_hmab
from .txop import DcfPolicy, SrPolicy, run_episode

__all__ = [
    "RepetitionOutcome",
    "ExperimentResult",
    "SweepResult",
    "build_policy",
    "run_experiment",
    "run_scalability_sweep",
]


@dataclass(frozen=True)
class RepetitionOutcome:
    """Everything one seeded episode contributes to the experiment outputs."""

    repetition: int
    seed: int
    effective_rates: tuple[float, ...]
    rows: tuple[tuple, ...]
    station_bytes: tuple[tuple[int, int], ...]
    station_txops: tuple[tuple[int, int], ...]
    agent_state: dict | None


@dataclass(frozen=True)
class ExperimentResult:
    summary: dict
    steps_path: Path | None
    summary_path: Path
    agent_paths: tuple[Path, ...]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[tuple[int, int, int, float, float], ...]
    slope: float
    csv_path: Path | None
    summary_path: Path | None


def build_policy(cfg: ExperimentConfig):
    """Instantiate the scheduling policy named by the config."""
    kind = cfg.policy_kind
    hyper = dict(cfg.bandit_hyper)
    if kind == "dcf":
        return DcfPolicy()
    if kind == "sr":
        return SrPolicy()
    if kind == "flat_mab":
        return FlatAgent(cfg.power_levels, cfg.bandit_kind, hyper or None)
    if kind == "hmab":
        return AgentHierarchy(cfg.power_levels)
    cluster_map = cfg.scenario.cluster_map()
    if kind == "clustered_flat":
        return clustered_flat(cluster_map, cfg.power_levels, cfg.bandit_kind, hyper or None)
    if kind == "clustered_hmab":
        return clustered_hmab(cluster_map, cfg.power_levels)
    raise ValueError(f"policy kind {kind!r} does not run episodes")


def _run_repetition(args: tuple[ExperimentConfig, int, int]) -> RepetitionOutcome:
    cfg, repetition, seed = args
    ch = DEFAULT_CHANNEL
    mcs = DEFAULT_MCS_TABLE
    net = cfg.scenario.build(ch)
    policy = build_policy(cfg)
    episode = run_episode(
        policy,
        net,
        ch,
        mcs,
        cfg.sim,
        cfg.steps,
        seed,
        mutation_step=cfg.mutation_step,
        mutation_spec=cfg.scenario if cfg.mutation_step is not None else None,
    )
    station_ids = tuple(s.id for s in net.stations)
    rates = []
    rows = []
    byte_totals = dict.fromkeys(station_ids, 0)
    txop_counts = dict.fromkeys(station_ids, 0)
    for rec in episode.records:
        delivered = dict.fromkeys(station_ids, 0)
        for link in rec.result.per_link:
            delivered[link.station] = link.delivered_bytes
            byte_totals[link.station] += link.delivered_bytes
            if link.delivered_bytes > 0:
                txop_counts[link.station] += 1
        rates.append(rec.result.effective_rate_mbps)
        rows.append(
            (
                rec.step,
                repetition,
                seed,
                rec.winner_ap,
                rec.config.config_id(),
                rec.result.effective_rate_mbps,
                rec.result.reward,
            )
            + tuple(delivered[s] for s in station_ids)
        )
    state = policy.to_state() if hasattr(policy, "to_state") else None
    return RepetitionOutcome(
        repetition,
        seed,
        tuple(rates),
        tuple(rows),
        tuple(sorted(byte_totals.items())),
        tuple(sorted(txop_counts.items())),
        state,
    )


def _config_header_lines(cfg: ExperimentConfig) -> list[str]:
    return ["# config: " + json.dumps(cfg.resolved(), sort_keys=True)]


def _format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _write_steps_csv(path: Path, cfg: ExperimentConfig, outcomes, station_ids) -> None:
    buf = io.StringIO()
    for line in _config_header_lines(cfg):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = [
        "step",
        "repetition",
        "seed",
        "sharing_ap",
        "config_id",
        "effective_rate_mbps",
        "reward",
    ] + [f"delivered_bytes_{s}" for s in station_ids]
    writer.writerow(header)
    for outcome in outcomes:
        for row in outcome.rows:
            writer.writerow([_format_value(v) for v in row])
    path.write_text(buf.getvalue())


def _write_steps_json(path: Path, cfg: ExperimentConfig, outcomes, station_ids) -> None:
    records = []
    for outcome in outcomes:
        for row in outcome.rows:
            rec = {
                "step": row[0],
                "repetition": row[1],
                "seed": row[2],
                "sharing_ap": row[3],
                "config_id": row[4],
                "effective_rate_mbps": row[5],
                "reward": row[6],
            }
            rec["delivered_bytes"] = {
                str(s): row[7 + i] for i, s in enumerate(station_ids)
            }
            records.append(rec)
    doc = {"config": cfg.resolved(), "records": records}
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")


def _bound_experiment(cfg: ExperimentConfig, out_dir: Path,
                      export_lp: Path | None = None) -> ExperimentResult:
    ch = DEFAULT_CHANNEL
    mcs = DEFAULT_MCS_TABLE
    net = cfg.scenario.build(ch)
    mode = "throughput" if cfg.policy_kind == "t_optimal" else "fairness"
    power = PowerConfig(
        min_power_dbm=min(cfg.power_levels),
        max_power_dbm=max(cfg.power_levels),
        discrete_levels_dbm=cfg.power_levels,
    )
    schedule = column_generation(
        net, ch, mcs, power, mode, grid=cfg.grid_power, export_dir=export_lp
    )
    doc = {"config": cfg.resolved(), "schedule": schedule.to_json_dict()}
    summary_path = out_dir / "schedule.json"
    summary_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return ExperimentResult(doc, None, summary_path, ())


def run_experiment(
    cfg: ExperimentConfig, out_dir: str | Path, export_lp: str | Path | None = None
) -> ExperimentResult:
    """Run the configured experiment and write its output files.

    Episode policies produce a per-step table (CSV or JSON per the config),
    a summary JSON, and one agent-state JSON per repetition where the policy
    exposes state.  Bound policies (t_optimal / f_optimal) produce a single
    schedule JSON instead.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.policy_kind in ("t_optimal", "f_optimal"):
        return _bound_experiment(
            cfg, out_dir, Path(export_lp) if export_lp is not None else None
        )

    seeds = cfg.seeds()
    jobs = [(cfg, r, seeds[r]) for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_repetition, jobs))
    else:
        outcomes = [_run_repetition(job) for job in jobs]
    outcomes.sort(key=lambda o: o.repetition)

    net = cfg.scenario.build(DEFAULT_CHANNEL)
    station_ids = tuple(s.id for s in net.stations)

    if cfg.out_format == "csv":
        steps_path = out_dir / "steps.csv"
        _write_steps_csv(steps_path, cfg, outcomes, station_ids)
    else:
        steps_path = out_dir / "steps.json"
        _write_steps_json(steps_path, cfg, outcomes, station_ids)

    runs = np.array([o.effective_rates for o in outcomes])
    stats = summarize(runs)
    verdict = detect_convergence(
        stats.mean,
        threshold=cfg.convergence_threshold,
        patience=cfg.convergence_patience,
    ) if cfg.steps >= 2 else None

    total_time_s = cfg.steps * cfg.sim.txop_duration_s * len(outcomes)
    mean_station_rate = {}
    txops = {}
    for sid in station_ids:
        total_bytes = sum(dict(o.station_bytes)[sid] for o in outcomes)
        mean_station_rate[sid] = total_bytes * 8.0 / 1e6 / total_time_s
        txops[sid] = sum(dict(o.station_txops)[sid] for o in outcomes)

    tail = max(1, cfg.steps // 10)
    summary = {
        "config": cfg.resolved(),
        "seeds": list(seeds),
        "per_step_mean_rate_mbps": [float(v) for v in stats.mean],
        "ci_halfwidth_mbps": [float(v) for v in stats.ci_halfwidth],
        "last_tenth_mean_rate_mbps": float(stats.mean[-tail:].mean()),
        "convergence": None
        if verdict is None
        else {
            "converged": verdict.converged,
            "step": verdict.step,
            "threshold": verdict.threshold,
            "patience": verdict.patience,
        },
        "per_station": {
            str(sid): {
                "txop_count": txops[sid],
                "mean_rate_mbps": mean_station_rate[sid],
            }
            for sid in station_ids
        },
        "station_cdf": [list(p) for p in station_cdf(mean_station_rate)],
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")

    agent_paths = []
    for outcome in outcomes:
        if outcome.agent_state is None:
            continue
        p = out_dir / f"agent_state_rep{outcome.repetition}.json"
        doc = {
            "config": cfg.resolved(),
            "repetition": outcome.repetition,
            "seed": outcome.seed,
            "state": outcome.agent_state,
        }
        p.write_text(json.dumps(doc, sort_keys=True) + "\n")
        agent_paths.append(p)

    return ExperimentResult(summary, steps_path, summary_path, tuple(agent_paths))


def _default_sweep_solver(net, ch, mcs, power, grid):
    return column_generation(net, ch, mcs, power, "throughput", grid=grid)


def run_scalability_sweep(
    base: ScenarioSpec,
    ap_counts: tuple[int, ...],
    reps: int,
    out_dir: str | Path | None = None,
    power_levels: tuple[float, ...] = (4.0, 10.0, 16.0),
    grid: bool = True,
    ch: ChannelParams = DEFAULT_CHANNEL,
    mcs: McsTable = DEFAULT_MCS_TABLE,
    solver=None,
) -> SweepResult:
    """Time the throughput-bound solver across multi-room sizes.

    For each requested AP count the base scenario is reshaped to the most
    square room grid of that size and solved ``reps`` times on fresh seeded
    topologies.  The scaling exponent is the robust median slope of
    log(wall time) against log(AP count).  ``solver`` is injectable for
    tests; it must return an object with ``wall_time_s`` and
    ``objective_value``.
    """
    if list(ap_counts) != sorted(ap_counts):
        raise ValueError("ap_counts must be ascending")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    solver = solver or _default_sweep_solver
    power = PowerConfig(
        min_power_dbm=min(power_levels),
        max_power_dbm=max(power_levels),
        discrete_levels_dbm=tuple(power_levels),
    )
    seeds = np.random.SeedSequence(base.seed).generate_state(
        len(ap_counts) * reps, dtype=np.uint64
    )
    rows = []
    for i, n_ap in enumerate(ap_counts):
        spec = replace(
            base, kind="multi_room", grid=grid_for_ap_count(n_ap), legacy_ap_count=0
        )
        for r in range(reps):
            seed = int(seeds[i * reps + r])
            net = spec.build(ch, seed=seed)
            t0 = time.perf_counter()
            sched = solver(net, ch, mcs, power, grid)
            wall = sched.wall_time_s if sched.wall_time_s > 0 else time.perf_counter() - t0
            rows.append((n_ap, r, seed, float(wall), float(sched.objective_value)))

    xs = [np.log(row[0]) for row in rows]
    ys = [np.log(max(row[3], 1e-12)) for row in rows]
    slope = theil_sen_slope(xs, ys)

    csv_path = summary_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        base_doc = {k: list(v) if isinstance(v, tuple) else v
                    for k, v in dataclasses.asdict(base).items()}
        buf.write("# config: " + json.dumps(
            {"scenario": base_doc, "ap_counts": list(ap_counts), "reps": reps,
             "power_levels": list(power_levels), "grid": grid}, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ap_count", "repetition", "seed", "wall_time_s", "objective_mbps"])
        for row in rows:
            writer.writerow([_format_value(v) for v in row])
        csv_path = out_dir / "sweep.csv"
        csv_path.write_text(buf.getvalue())
        summary_path = out_dir / "sweep_summary.json"
        summary_path.write_text(
            json.dumps(
                {
                    "ap_counts": list(ap_counts),
                    "reps": reps,
                    "log_log_slope": slope,
                    "rows": [list(r) for r in rows],
                },
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
    return SweepResult(tuple(rows), slope, csv_path, summary_path)
