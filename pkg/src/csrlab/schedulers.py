"""Learning schedulers: flat enumeration agents and a three-level hierarchy.

Both schedulers plug into run_episode as policies.  The flat agent keeps one
bandit per sharing pair whose arms enumerate every joint configuration; the
hierarchy decomposes the decision into who-transmits (level 1, one agent per
sharing station), to-which-station (level 2), and at-what-power (level 3),
with the group of transmitting APs part of the level-2/3 agent keys.

Configuration arms are indexed by a mixed-radix code, so the arm<->config
bijection is stable and needs no materialized list even when the joint space
is far too large to enumerate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from .bandits import BanditPolicy, make_policy
from .network import Network
from .txop import TransmissionConfig

__all__ = [
    "ConfigCodec",
    "flat_enumerate",
    "FlatAgent",
    "HmabTrace",
    "AgentHierarchy",
    "ClusteredPolicy",
    "clustered_flat",
    "clustered_hmab",
]

ENUMERATION_LIMIT = 1_000_000


class ConfigCodec:
    """Bijection between joint configurations and integers for one pair.

    The sharing AP transmits to the fixed sharing station at one of W power
    levels.  Every other participating AP (ascending id order) contributes a
    digit with base 1 + n_stations*W: value 0 means absent, value 1+j means
    station j//W at power level j%W.  The index is the mixed-radix number
    with the sharing power as the least significant digit.
    """

    def __init__(
        self,
        net: Network,
        pair: tuple[int, int],
        power_levels: tuple[float, ...],
        ap_ids: tuple[int, ...] | None = None,
    ):
        ap_k, sta_l = pair
        if net.stations[sta_l].ap != ap_k:
            raise ValueError(f"station {sta_l} is not associated with AP {ap_k}")
        participating = ap_ids if ap_ids is not None else net.coordinated_ap_ids
        if ap_k not in participating:
            raise ValueError(f"sharing AP {ap_k} is not among the participating APs")
        self.pair = pair
        self.levels = tuple(power_levels)
        self.others = tuple(sorted(a for a in participating if a != ap_k))
        self.other_stations = tuple(net.sta_ids_by_ap[a] for a in self.others)
        w = len(self.levels)
        self.bases = (w,) + tuple(1 + len(stas) * w for stas in self.other_stations)
        n = 1
        for b in self.bases:
            n *= b
        self.n_configs = n

    def decode(self, index: int) -> TransmissionConfig:
        if not (0 <= index < self.n_configs):
            raise ValueError(f"index {index} out of range [0, {self.n_configs})")
        w = len(self.levels)
        digits = []
        rest = index
        for b in self.bases:
            digits.append(rest % b)
            rest //= b
        ap_k, sta_l = self.pair
        entries = [(ap_k, sta_l, self.levels[digits[0]])]
        for a, stas, d in zip(self.others, self.other_stations, digits[1:]):
            if d == 0:
                continue
            j = d - 1
            entries.append((a, stas[j // w], self.levels[j % w]))
        return TransmissionConfig(tuple(sorted(entries)))

    def encode(self, cfg: TransmissionConfig) -> int:
        w = len(self.levels)
        ap_k, sta_l = self.pair
        by_ap = {a: (s, p) for a, s, p in cfg.entries}
        if ap_k not in by_ap or by_ap[ap_k][0] != sta_l:
            raise ValueError("configuration does not contain the sharing pair")
        digits = [self.levels.index(by_ap[ap_k][1])]
        for a, stas in zip(self.others, self.other_stations):
            if a not in by_ap:
                digits.append(0)
            else:
                s, p = by_ap[a]
                digits.append(1 + stas.index(s) * w + self.levels.index(p))
        extra = set(by_ap) - {ap_k} - set(self.others)
        if extra:
            raise ValueError(f"configuration uses APs outside the codec: {sorted(extra)}")
        index = 0
        for b, d in zip(reversed(self.bases), reversed(digits)):
            index = index * b + d
        return index


def flat_enumerate(
    net: Network,
    pair: tuple[int, int],
    power_levels: tuple[float, ...],
    ap_ids: tuple[int, ...] | None = None,
) -> list[TransmissionConfig]:
    """Materialize every configuration containing the sharing pair.

    Guarded by ENUMERATION_LIMIT; use ConfigCodec directly for larger spaces.
    """
    codec = ConfigCodec(net, pair, power_levels, ap_ids)
    if codec.n_configs > ENUMERATION_LIMIT:
        raise ValueError(
            f"{codec.n_configs} configurations exceed the enumeration limit "
            f"({ENUMERATION_LIMIT}); use ConfigCodec for lazy access"
        )
    return [codec.decode(i) for i in range(codec.n_configs)]


class FlatAgent:
    """One bandit per sharing pair over the full joint configuration space.

    ``bandit_kind`` defaults to softmax.  ``ap_ids`` restricts the
    participating APs (used by clustering); codecs and bandits are created
    lazily the first time a pair shares.
    """

    def __init__(
        self,
        power_levels: tuple[float, ...],
        bandit_kind: str = "softmax",
        bandit_hyper: Mapping[str, float] | None = None,
        ap_ids: tuple[int, ...] | None = None,
    ):
        self.power_levels = tuple(power_levels)
        self.bandit_kind = bandit_kind
        self.bandit_hyper = dict(bandit_hyper or {})
        self.ap_ids = ap_ids
        self._codecs: dict[tuple[int, int], ConfigCodec] = {}
        self._policies: dict[tuple[int, int], BanditPolicy] = {}
        self._pending: tuple[tuple[int, int], int] | None = None

    def _codec(self, net: Network, pair: tuple[int, int]) -> ConfigCodec:
        if pair not in self._codecs:
            self._codecs[pair] = ConfigCodec(net, pair, self.power_levels, self.ap_ids)
        return self._codecs[pair]

    def _policy(self, net: Network, pair: tuple[int, int]) -> BanditPolicy:
        if pair not in self._policies:
            n = self._codec(net, pair).n_configs
            self._policies[pair] = make_policy(self.bandit_kind, n, **self.bandit_hyper)
        return self._policies[pair]

    def decide(self, net: Network, pair: tuple[int, int], rng: np.random.Generator) -> TransmissionConfig:
        arm = self._policy(net, pair).sample(rng)
        self._pending = (pair, arm)
        return self._codec(net, pair).decode(arm)

    def learn(self, reward: float) -> None:
        if self._pending is None:
            raise ValueError("learn() called without a pending decision")
        pair, arm = self._pending
        self._pending = None
        self._policies[pair].update(arm, reward)

    def to_state(self) -> dict[str, Any]:
        return {
            "type": "flat",
            "bandit_kind": self.bandit_kind,
            "power_levels": list(self.power_levels),
            "pairs": {f"{a}:{s}": p.to_state() for (a, s), p in sorted(self._policies.items())},
        }


@dataclass(frozen=True)
class HmabTrace:
    """The agent decisions behind one hierarchical selection.

    ``level1`` is (sharing station, subset arm); ``level2`` holds
    ((ap, group), station arm) for each non-sharing member; ``level3`` holds
    ((station, group), power arm) for every member including the sharing AP.
    ``seq`` guards against updating with a stale trace.
    """

    seq: int
    level1: tuple[int, int]
    level2: tuple[tuple[tuple[int, frozenset], int], ...]
    level3: tuple[tuple[tuple[int, frozenset], int], ...]

    def decision_count(self) -> int:
        return 1 + len(self.level2) + len(self.level3)


class AgentHierarchy:
    """Three-level bandit decomposition of the coordinated decision.

    Level 1 (one agent per sharing station) picks which other APs join, as a
    bitmask over the other participating APs in ascending id order.  Level 2
    (one agent per (AP, group)) picks that AP's receiving station.  Level 3
    (one agent per (station, group)) picks the transmit power of the link.
    Defaults follow a most-exploration-first ladder of UCB constants.
    """

    def __init__(
        self,
        power_levels: tuple[float, ...],
        bandit_kinds: tuple[str, str, str] = ("ucb", "ucb", "ucb"),
        bandit_hyper: tuple[Mapping[str, float], ...] | None = None,
        ap_ids: tuple[int, ...] | None = None,
    ):
        self.power_levels = tuple(power_levels)
        self.bandit_kinds = tuple(bandit_kinds)
        if bandit_hyper is None:
            bandit_hyper = ({"c": 1.0}, {"c": 0.3}, {"c": 0.1})
        self.bandit_hyper = tuple(dict(h) for h in bandit_hyper)
        self.ap_ids = ap_ids
        self._level1: dict[int, BanditPolicy] = {}
        self._level2: dict[tuple[int, frozenset], BanditPolicy] = {}
        self._level3: dict[tuple[int, frozenset], BanditPolicy] = {}
        self._seq = 0
        self._open_seq: int | None = None
        self._pending: HmabTrace | None = None

    def _participating(self, net: Network) -> tuple[int, ...]:
        return self.ap_ids if self.ap_ids is not None else net.coordinated_ap_ids

    def _agent(self, level: int, table: dict, key, n_arms: int) -> BanditPolicy:
        if key not in table:
            table[key] = make_policy(self.bandit_kinds[level], n_arms, **self.bandit_hyper[level])
        return table[key]

    def select(
        self, net: Network, pair: tuple[int, int], rng: np.random.Generator
    ) -> tuple[TransmissionConfig, HmabTrace]:
        """Run the three levels top-down and return config plus trace."""
        ap_k, sta_l = pair
        if net.stations[sta_l].ap != ap_k:
            raise ValueError(f"station {sta_l} is not associated with AP {ap_k}")
        participating = self._participating(net)
        if ap_k not in participating:
            raise ValueError(f"sharing AP {ap_k} is not among the participating APs")
        others = tuple(sorted(a for a in participating if a != ap_k))

        l1 = self._agent(0, self._level1, sta_l, 2 ** len(others))
        subset_arm = l1.sample(rng)
        group = frozenset(
            [ap_k] + [a for j, a in enumerate(others) if subset_arm >> j & 1]
        )

        receiver = {ap_k: sta_l}
        level2 = []
        for a in sorted(group - {ap_k}):
            stas = net.sta_ids_by_ap[a]
            l2 = self._agent(1, self._level2, (a, group), len(stas))
            arm = l2.sample(rng)
            receiver[a] = stas[arm]
            level2.append(((a, group), arm))

        entries = []
        level3 = []
        for a in sorted(group):
            sta = receiver[a]
            l3 = self._agent(2, self._level3, (sta, group), len(self.power_levels))
            arm = l3.sample(rng)
            entries.append((a, sta, self.power_levels[arm]))
            level3.append(((sta, group), arm))

        self._seq += 1
        trace = HmabTrace(self._seq, (sta_l, subset_arm), tuple(level2), tuple(level3))
        self._open_seq = self._seq
        return TransmissionConfig(tuple(entries)), trace

    def update(self, trace: HmabTrace, reward: float) -> None:
        """Feed one reward to every agent in the trace: levels 3, then 2, then 1."""
        if trace.seq != self._seq or self._open_seq != trace.seq:
            raise ValueError("stale trace: updates must follow their own select call")
        self._open_seq = None
        for key, arm in trace.level3:
            self._level3[key].update(arm, reward)
        for key, arm in trace.level2:
            self._level2[key].update(arm, reward)
        sta_l, subset_arm = trace.level1
        self._level1[sta_l].update(subset_arm, reward)

    # TxopPolicy adapter.

    def decide(self, net, pair, rng):
        cfg, trace = self.select(net, pair, rng)
        self._pending = trace
        return cfg

    def learn(self, reward):
        if self._pending is None:
            raise ValueError("learn() called without a pending decision")
        trace, self._pending = self._pending, None
        self.update(trace, reward)

    def to_state(self) -> dict[str, Any]:
        def gkey(key):
            ident, group = key
            return f"{ident}|{','.join(map(str, sorted(group)))}"

        return {
            "type": "hmab",
            "power_levels": list(self.power_levels),
            "level1": {str(k): p.to_state() for k, p in sorted(self._level1.items())},
            "level2": dict(sorted((gkey(k), p.to_state()) for k, p in self._level2.items())),
            "level3": dict(sorted((gkey(k), p.to_state()) for k, p in self._level3.items())),
        }


class ClusteredPolicy:
    """Route each decision to the cluster that owns the sharing AP.

    ``factory`` builds the per-cluster policy from that cluster's AP ids;
    only the deciding cluster's agents ever learn from a TXOP.
    """

    def __init__(self, cluster_map: Mapping[int, int], factory: Callable[[tuple[int, ...]], Any]):
        if not cluster_map:
            raise ValueError("cluster_map must not be empty")
        self.cluster_map = dict(cluster_map)
        self.factory = factory
        self._policies: dict[int, Any] = {}
        self._last_cluster: int | None = None

    def _cluster_policy(self, cluster: int):
        if cluster not in self._policies:
            members = tuple(sorted(a for a, c in self.cluster_map.items() if c == cluster))
            self._policies[cluster] = self.factory(members)
        return self._policies[cluster]

    def decide(self, net, pair, rng):
        ap = pair[0]
        if ap not in self.cluster_map:
            raise ValueError(f"AP {ap} has no cluster assignment")
        cluster = self.cluster_map[ap]
        self._last_cluster = cluster
        return self._cluster_policy(cluster).decide(net, pair, rng)

    def learn(self, reward):
        if self._last_cluster is None:
            raise ValueError("learn() called without a pending decision")
        cluster, self._last_cluster = self._last_cluster, None
        self._policies[cluster].learn(reward)

    def to_state(self) -> dict[str, Any]:
        return {
            "type": "clustered",
            "clusters": {str(c): p.to_state() for c, p in sorted(self._policies.items())},
        }


def clustered_flat(
    cluster_map: Mapping[int, int],
    power_levels: tuple[float, ...],
    bandit_kind: str = "softmax",
    bandit_hyper: Mapping[str, float] | None = None,
) -> ClusteredPolicy:
    return ClusteredPolicy(
        cluster_map,
        lambda members: FlatAgent(power_levels, bandit_kind, bandit_hyper, ap_ids=members),
    )


def clustered_hmab(
    cluster_map: Mapping[int, int],
    power_levels: tuple[float, ...],
    bandit_kinds: tuple[str, str, str] = ("ucb", "ucb", "ucb"),
    bandit_hyper: tuple[Mapping[str, float], ...] | None = None,
) -> ClusteredPolicy:
    return ClusteredPolicy(
        cluster_map,
        lambda members: AgentHierarchy(power_levels, bandit_kinds, bandit_hyper, ap_ids=members),
    )
