"""Experiment configuration from a single TOML file.

Sections: [scenario] mirrors ScenarioSpec, [policy] selects the scheduling
policy and its bandit hyperparameters, [sim] the TXOP constants, and [run]
the episode/repetition plan and output options.  Every key is optional and
falls back to the documented default; unknown keys are rejected with their
full path so typos surface immediately.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .scenarios import ScenarioSpec
from .txop import SimParams

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "POLICY_KINDS"]

POLICY_KINDS = (
    "dcf",
    "sr",
    "flat_mab",
    "hmab",
    "clustered_flat",
    "clustered_hmab",
    "t_optimal",
    "f_optimal",
)

_MISSING = object()


class ConfigError(ValueError):
    """Configuration problem, message prefixed with the offending field path."""


def _typename(value) -> str:
    return type(value).__name__


class _Section:
    """Tracks consumed keys so leftovers can be reported with their path."""

    def __init__(self, table: dict, path: str):
        if not isinstance(table, dict):
            raise ConfigError(f"[{path}]: expected a table, got {_typename(table)}")
        self.table = dict(table)
        self.path = path

    def take(self, key: str, kind, default=_MISSING):
        if key not in self.table:
            if default is _MISSING:
                raise ConfigError(f"[{self.path}].{key}: required key missing")
            return default
        value = self.table.pop(key)
        return _coerce(value, kind, f"[{self.path}].{key}")

    def subtable(self, key: str) -> dict:
        value = self.table.pop(key, {})
        if not isinstance(value, dict):
            raise ConfigError(f"[{self.path}].{key}: expected a table, got {_typename(value)}")
        return value

    def finish(self) -> None:
        if self.table:
            stray = sorted(self.table)[0]
            raise ConfigError(f"[{self.path}].{stray}: unknown key")


def _coerce(value, kind, path: str):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {_typename(value)}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {_typename(value)}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {_typename(value)}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {_typename(value)}")
        return value
    if kind == "int_pair":
        if (
            not isinstance(value, list)
            or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
        ):
            raise ConfigError(f"{path}: expected a pair of integers, got {value!r}")
        return (value[0], value[1])
    if kind == "float_list":
        if not isinstance(value, list) or not value or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            raise ConfigError(f"{path}: expected a non-empty list of numbers, got {value!r}")
        return tuple(float(v) for v in value)
    if kind == "int_list":
        if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, int) for v in value
        ):
            raise ConfigError(f"{path}: expected a list of integers, got {value!r}")
        return tuple(value)
    raise AssertionError(f"unhandled coercion kind {kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment plan."""

    scenario: ScenarioSpec
    policy_kind: str = "dcf"
    bandit_kind: str = "softmax"
    bandit_hyper: tuple[tuple[str, float], ...] = ()
    power_levels: tuple[float, ...] = (4.0, 10.0, 16.0)
    grid_power: bool = False
    sim: SimParams = SimParams()
    steps: int = 10_000
    repetitions: int = 10
    base_seed: int = 0
    explicit_seeds: tuple[int, ...] | None = None
    mutation_step: int | None = None
    workers: int = 1
    out: str | None = None
    out_format: str = "csv"
    convergence_threshold: float = 1e-3
    convergence_patience: int = 100

    def seeds(self) -> tuple[int, ...]:
        """One episode seed per repetition, derived from the base seed."""
        if self.explicit_seeds is not None:
            return self.explicit_seeds
        state = np.random.SeedSequence(self.base_seed).generate_state(
            self.repetitions, dtype=np.uint64
        )
        return tuple(int(v) for v in state)

    def resolved(self) -> dict:
        """JSON-ready mirror of the config with the seed list expanded."""
        scenario = dataclasses.asdict(self.scenario)
        scenario = {k: list(v) if isinstance(v, tuple) else v for k, v in scenario.items()}
        return {
            "scenario": scenario,
            "policy": {
                "kind": self.policy_kind,
                "bandit": self.bandit_kind,
                "hyper": dict(self.bandit_hyper),
                "power_levels": list(self.power_levels),
                "grid_power": self.grid_power,
            },
            "sim": {
                "txop_duration_s": self.sim.txop_duration_s,
                "frame_size_bytes": self.sim.frame_size_bytes,
            },
            "run": {
                "steps": self.steps,
                "repetitions": self.repetitions,
                "seed": self.base_seed,
                "seeds": list(self.seeds()),
                "mutation_step": self.mutation_step,
                "format": self.out_format,
                "convergence_threshold": self.convergence_threshold,
                "convergence_patience": self.convergence_patience,
            },
        }


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse and validate a TOML document into an ExperimentConfig."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    known = {"scenario", "policy", "sim", "run"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"[{key}]: unknown section")

    sc = _Section(doc.get("scenario", {}), "scenario")
    scenario_kwargs = dict(
        kind=sc.take("kind", str, "multi_room"),
        grid=sc.take("grid", "int_pair", (2, 2)),
        room_size=sc.take("room_size", float, 20.0),
        stations_per_ap=sc.take("stations_per_ap", int, 4),
        area_side=sc.take("area_side", float, 75.0),
        ap_count_range=sc.take("ap_count_range", "int_pair", (2, 5)),
        stations_per_ap_range=sc.take("stations_per_ap_range", "int_pair", (3, 5)),
        station_spread=sc.take("station_spread", float, 10.0),
        seed=sc.take("seed", int, 0),
        legacy_ap_count=sc.take("legacy_ap_count", int, 0),
        max_power_dbm=sc.take("max_power_dbm", float, 16.0),
    )
    clusters = sc.take("clusters", "int_pair", None)
    scenario_kwargs["clusters"] = clusters
    sc.finish()
    try:
        scenario = ScenarioSpec(**scenario_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[scenario]: {exc}") from exc

    po = _Section(doc.get("policy", {}), "policy")
    policy_kind = po.take("kind", str, "dcf")
    if policy_kind not in POLICY_KINDS:
        raise ConfigError(
            f"[policy].kind: unknown policy {policy_kind!r}; expected one of {POLICY_KINDS}"
        )
    bandit_kind = po.take("bandit", str, "softmax")
    power_levels = po.take("power_levels", "float_list", (4.0, 10.0, 16.0))
    grid_power = po.take("grid_power", bool, False)
    hyper_table = po.subtable("hyper")
    hyper = []
    for key, value in sorted(hyper_table.items()):
        hyper.append((key, _coerce(value, float, f"[policy.hyper].{key}")))
    po.finish()
    if policy_kind in ("clustered_flat", "clustered_hmab") and scenario.cluster_map() is None:
        raise ConfigError(
            f"[policy].kind: {policy_kind} requires [scenario].clusters to define the blocks"
        )

    si = _Section(doc.get("sim", {}), "sim")
    sim = SimParams(
        txop_duration_s=si.take("txop_duration_s", float, 5.484e-3),
        frame_size_bytes=si.take("frame_size_bytes", int, 1500),
    )
    si.finish()

    ru = _Section(doc.get("run", {}), "run")
    steps = ru.take("steps", int, 10_000)
    repetitions = ru.take("repetitions", int, 10)
    base_seed = ru.take("seed", int, 0)
    explicit_seeds = ru.take("seeds", "int_list", None)
    mutation_step = ru.take("mutation_step", int, None)
    workers = ru.take("workers", int, 1)
    out = ru.take("out", str, None)
    out_format = ru.take("format", str, "csv")
    convergence_threshold = ru.take("convergence_threshold", float, 1e-3)
    convergence_patience = ru.take("convergence_patience", int, 100)
    ru.finish()

    if steps < 1:
        raise ConfigError("[run].steps: must be at least 1")
    if repetitions < 1:
        raise ConfigError("[run].repetitions: must be at least 1")
    if explicit_seeds is not None and len(explicit_seeds) != repetitions:
        raise ConfigError(
            f"[run].seeds: got {len(explicit_seeds)} seeds for {repetitions} repetitions"
        )
    if mutation_step is not None and not 1 <= mutation_step < steps:
        raise ConfigError("[run].mutation_step: must lie strictly inside (0, steps)")
    if workers < 1:
        raise ConfigError("[run].workers: must be at least 1")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"[run].format: expected 'csv' or 'json', got {out_format!r}")
    if convergence_patience < 1:
        raise ConfigError("[run].convergence_patience: must be at least 1")

    return ExperimentConfig(
        scenario=scenario,
        policy_kind=policy_kind,
        bandit_kind=bandit_kind,
        bandit_hyper=tuple(hyper),
        power_levels=power_levels,
        grid_power=grid_power,
        sim=sim,
        steps=steps,
        repetitions=repetitions,
        base_seed=base_seed,
        explicit_seeds=explicit_seeds,
        mutation_step=mutation_step,
        workers=workers,
        out=out,
        out_format=out_format,
        convergence_threshold=convergence_threshold,
        convergence_patience=convergence_patience,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return parse_config(text, source=str(p))
