"""TXOP-level simulation: coordinated transmissions, baselines, episodes.

One TXOP is one scheduling decision: a set of (AP, station, power) entries
transmitting concurrently for a fixed duration.  Links deliver whole frames
only, so the effective rate is the frame-quantized version of the MCS rate.
Uncoordinated (legacy) APs contend for TXOPs and, when a coordinated AP wins,
the winner's legacy contenders transmit concurrently as plain interferers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from .network import Network, sinr_db
from .radio import ChannelParams, McsTable, best_mcs

__all__ = [
    "TransmissionConfig",
    "LinkOutcome",
    "TxopResult",
    "SimParams",
    "StepRecord",
    "TxopPolicy",
    "DcfPolicy",
    "SrPolicy",
    "SR_BACKOFF_CAP_DB",
    "default_reward_normalizer",
    "select_sharing_pair",
    "execute_txop",
    "dcf_txop",
    "sr_txop",
    "run_episode",
    "legacy_contenders",
]

SR_BACKOFF_CAP_DB = 12.0


@dataclass(frozen=True)
class TransmissionConfig:
    """One coordinated decision: concurrent (ap, station, power dBm) entries."""

    entries: tuple[tuple[int, int, float], ...]

    def config_id(self) -> str:
        """Canonical string form, entries sorted by AP id."""
        return ";".join(f"{a}:{s}@{p:g}" for a, s, p in sorted(self.entries))


@dataclass(frozen=True)
class LinkOutcome:
    station: int
    sinr_db: float
    mcs: int | None
    rate_mbps: float  # frame-quantized effective rate of this link
    delivered_bytes: int


@dataclass(frozen=True)
class TxopResult:
    per_link: tuple[LinkOutcome, ...]
    effective_rate_mbps: float
    reward: float


@dataclass(frozen=True)
class SimParams:
    """Timing, framing, and reward scaling for the simulator.

    ``reward_normalizer_mbps`` divides the aggregate effective rate to map it
    into [0, 1]; when None it defaults to the top MCS rate times the number of
    coordinated APs in the network at hand.
    """

    txop_duration_s: float = 5.484e-3
    frame_size_bytes: int = 1500
    reward_normalizer_mbps: float | None = None

    def __post_init__(self) -> None:
        if self.txop_duration_s <= 0.0:
            raise ValueError("txop_duration_s must be positive")
        if self.frame_size_bytes <= 0:
            raise ValueError("frame_size_bytes must be positive")
        if self.reward_normalizer_mbps is not None and self.reward_normalizer_mbps <= 0.0:
            raise ValueError("reward_normalizer_mbps must be positive")


def default_reward_normalizer(net: Network, mcs: McsTable) -> float:
    """Top MCS rate times the coordinated AP count, in Mb/s."""
    n = max(1, len(net.coordinated_ap_ids))
    return mcs.rates_mbps[-1] * n


def _validate_config(cfg: TransmissionConfig, net: Network) -> None:
    aps_seen: set[int] = set()
    stas_seen: set[int] = set()
    for ap, sta, power in cfg.entries:
        if ap in aps_seen:
            raise ValueError(f"AP {ap} appears more than once in the configuration")
        if sta in stas_seen:
            raise ValueError(f"station {sta} appears more than once in the configuration")
        aps_seen.add(ap)
        stas_seen.add(sta)
        if not (0 <= ap < len(net.aps)) or not (0 <= sta < len(net.stations)):
            raise ValueError(f"unknown device in entry ({ap}, {sta})")
        if net.stations[sta].ap != ap:
            raise ValueError(f"station {sta} is not associated with AP {ap}")
        if not math.isfinite(power):
            raise ValueError(f"power for AP {ap} is not finite")
        if power > net.aps[ap].max_power_dbm + 1e-9:
            raise ValueError(f"power {power} dBm exceeds AP {ap}'s limit")


def execute_txop(
    cfg: TransmissionConfig,
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    sim: SimParams,
    interferers: Iterable[tuple[int, float]] = (),
) -> TxopResult:
    """Evaluate one TXOP: per-link SINR, MCS, frame-quantized delivery.

    ``interferers`` are extra transmitting APs (id, power dBm) that add to
    every link's interference but deliver nothing that is counted here.
    A link whose SINR supports no MCS delivers zero bytes; that is a valid
    outcome, not an error.
    """
    _validate_config(cfg, net)
    active = {ap: power for ap, _, power in cfg.entries}
    for ap, power in interferers:
        if ap in active:
            raise ValueError(f"interferer AP {ap} already transmits in the configuration")
        active[ap] = power

    frame_bits = 8 * sim.frame_size_bytes
    outcomes = []
    total_bits = 0
    for ap, sta, _ in cfg.entries:
        s = sinr_db((ap, sta), active, net, ch)
        m = best_mcs(s, mcs)
        if m is None:
            outcomes.append(LinkOutcome(sta, s, None, 0.0, 0))
            continue
        frames = int(mcs.rates_mbps[m] * 1e6 * sim.txop_duration_s // frame_bits)
        delivered = frames * sim.frame_size_bytes
        rate = delivered * 8 / sim.txop_duration_s / 1e6
        outcomes.append(LinkOutcome(sta, s, m, rate, delivered))
        total_bits += delivered * 8

    effective = total_bits / sim.txop_duration_s / 1e6
    normalizer = sim.reward_normalizer_mbps or default_reward_normalizer(net, mcs)
    reward = min(1.0, effective / normalizer)
    return TxopResult(tuple(outcomes), effective, reward)


def select_sharing_pair(net: Network, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform coordinated AP, then uniform station of that AP."""
    coord = net.coordinated_ap_ids
    ap = coord[int(rng.integers(len(coord)))]
    stas = net.sta_ids_by_ap[ap]
    if not stas:
        raise ValueError(f"AP {ap} has no associated stations")
    return ap, stas[int(rng.integers(len(stas)))]


def _pick_winner(net: Network, rng: np.random.Generator) -> tuple[int, int]:
    """DCF contention outcome: uniform over all APs, then a uniform station."""
    ap = int(rng.integers(len(net.aps)))
    stas = net.sta_ids_by_ap[ap]
    if not stas:
        raise ValueError(f"AP {ap} has no associated stations")
    return ap, stas[int(rng.integers(len(stas)))]


def dcf_txop(
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    sim: SimParams,
    rng: np.random.Generator,
) -> tuple[tuple[int, int], TxopResult]:
    """Baseline single-winner TXOP: the winner transmits alone at max power."""
    ap, sta = _pick_winner(net, rng)
    cfg = TransmissionConfig(((ap, sta, net.aps[ap].max_power_dbm),))
    return (ap, sta), execute_txop(cfg, net, ch, mcs, sim)


def _sr_join(
    net: Network,
    ch: ChannelParams,
    winner: tuple[int, int],
    rng: np.random.Generator,
    backoff_cap_db: float = SR_BACKOFF_CAP_DB,
) -> TransmissionConfig:
    """Detection-threshold join rule starting from a winning pair.

    The winner transmits at max power.  Every other AP is visited in random
    order and joins only if the strongest signal it hears from the APs already
    transmitting stays below the detection threshold; it then backs its power
    off by (threshold - detected) capped to [0, backoff_cap_db] dB.
    """
    ap, sta = winner
    entries = [(ap, sta, net.aps[ap].max_power_dbm)]
    transmitting = {ap: net.aps[ap].max_power_dbm}
    others = [a for a in range(len(net.aps)) if a != ap and net.sta_ids_by_ap[a]]
    for cand in rng.permutation(len(others)):
        cand_ap = others[int(cand)]
        detected = max(
            power - net.ap_loss_db[tx, cand_ap] for tx, power in transmitting.items()
        )
        if detected >= ch.obss_pd_dbm:
            continue
        margin = min(max(ch.obss_pd_dbm - detected, 0.0), backoff_cap_db)
        power = net.aps[cand_ap].max_power_dbm - margin
        stas = net.sta_ids_by_ap[cand_ap]
        entries.append((cand_ap, stas[int(rng.integers(len(stas)))], power))
        transmitting[cand_ap] = power
    return TransmissionConfig(tuple(entries))


def sr_txop(
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    sim: SimParams,
    rng: np.random.Generator,
) -> tuple[tuple[int, int], TxopResult]:
    """Uncoordinated spatial-reuse TXOP using the detection-threshold rule."""
    winner = _pick_winner(net, rng)
    cfg = _sr_join(net, ch, winner, rng)
    return winner, execute_txop(cfg, net, ch, mcs, sim)


class TxopPolicy(Protocol):
    """A scheduling policy driven by run_episode.

    ``decide`` must include the offered sharing pair in its configuration;
    ``learn`` receives the reward of the TXOP it last decided.
    """

    def decide(
        self, net: Network, pair: tuple[int, int], rng: np.random.Generator
    ) -> TransmissionConfig: ...

    def learn(self, reward: float) -> None: ...


class DcfPolicy:
    """Transmit on the sharing pair alone: statistics match dcf_txop."""

    def decide(self, net, pair, rng):
        ap, sta = pair
        return TransmissionConfig(((ap, sta, net.aps[ap].max_power_dbm),))

    def learn(self, reward):
        pass


class SrPolicy:
    """Apply the detection-threshold join rule around the sharing pair."""

    def __init__(self, backoff_cap_db: float = SR_BACKOFF_CAP_DB, ch: ChannelParams | None = None):
        self.backoff_cap_db = backoff_cap_db
        self.ch = ch or ChannelParams()

    def decide(self, net, pair, rng):
        return _sr_join(net, self.ch, pair, rng, self.backoff_cap_db)

    def learn(self, reward):
        pass


def legacy_contenders(net: Network) -> dict[int, tuple[int, ...]]:
    """Map each coordinated AP to the legacy APs contending with it.

    Legacy APs are assigned round-robin in id order, mirroring how they were
    appended to the network.
    """
    coord = net.coordinated_ap_ids
    out: dict[int, list[int]] = {a: [] for a in coord}
    for j, leg in enumerate(net.legacy_ap_ids):
        out[coord[j % len(coord)]].append(leg)
    return {a: tuple(v) for a, v in out.items()}


@dataclass(frozen=True)
class StepRecord:
    step: int
    winner_ap: int
    coordinated: bool
    config: TransmissionConfig
    result: TxopResult


@dataclass(frozen=True)
class EpisodeResult:
    records: tuple[StepRecord, ...]
    final_net: Network


def run_episode(
    policy: TxopPolicy,
    net: Network,
    ch: ChannelParams,
    mcs: McsTable,
    sim: SimParams,
    steps: int,
    seed: int,
    mutation_step: int | None = None,
    mutation_spec=None,
) -> EpisodeResult:
    """Drive ``steps`` TXOPs of contention, policy decisions, and learning.

    Each step a winner is drawn uniformly over all APs.  A legacy winner
    transmits alone at max power and the policy neither acts nor learns.  A
    coordinated winner offers (itself, one uniform station) to the policy as
    the sharing pair; the winner's legacy contenders transmit concurrently at
    max power as interferers.  At ``mutation_step`` the network's positions
    are redrawn via ``mutation_spec`` without resetting the policy.
    """
    from .scenarios import make_rng, mutate_positions  # local import avoids a cycle

    if mutation_step is not None and mutation_spec is None:
        raise ValueError("mutation_step requires a mutation_spec")
    rng = make_rng(seed)
    if sim.reward_normalizer_mbps is None:
        sim = SimParams(sim.txop_duration_s, sim.frame_size_bytes, default_reward_normalizer(net, mcs))

    contenders = legacy_contenders(net)
    records = []
    for step in range(steps):
        if mutation_step is not None and step == mutation_step:
            net = mutate_positions(net, mutation_spec, seed=int(rng.integers(2**63)), ch=ch)
            contenders = legacy_contenders(net)

        ap, sta = _pick_winner(net, rng)
        if not net.aps[ap].coordinated:
            cfg = TransmissionConfig(((ap, sta, net.aps[ap].max_power_dbm),))
            result = execute_txop(cfg, net, ch, mcs, sim)
            records.append(StepRecord(step, ap, False, cfg, result))
            continue

        cfg = policy.decide(net, (ap, sta), rng)
        extra = [(leg, net.aps[leg].max_power_dbm) for leg in contenders.get(ap, ())]
        result = execute_txop(cfg, net, ch, mcs, sim, interferers=extra)
        policy.learn(result.reward)
        records.append(StepRecord(step, ap, True, cfg, result))
    return EpisodeResult(tuple(records), net)
