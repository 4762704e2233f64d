"""Scheduler oracles: codec bijection, enumeration counts, hierarchy traces."""

import json

import pytest
from hypothesis import given, settings, strategies as st

from csrlab.radio import ChannelParams
from csrlab.scenarios import gen_multi_room, grid_cluster_map, make_rng
from csrlab.schedulers import (
    AgentHierarchy,
    ClusteredPolicy,
    ConfigCodec,
    FlatAgent,
    clustered_flat,
    clustered_hmab,
    flat_enumerate,
)
from csrlab.txop import TransmissionConfig

CH = ChannelParams()


def _net22():
    return gen_multi_room(1, 2, 20.0, CH, seed=0, stations_per_room=2)


def test_enumeration_count_single_power():
    # Two APs with two stations each, one power level: the other AP is absent
    # or serves one of its two stations, so 1 * (1 + 2) = 3 configurations.
    net = _net22()
    pair = (0, net.sta_ids_by_ap[0][0])
    cfgs = flat_enumerate(net, pair, (16.0,))
    assert len(cfgs) == 3
    ids = {c.config_id() for c in cfgs}
    assert len(ids) == 3
    assert all(any(a == 0 and s == pair[1] for a, s, _ in c.entries) for c in cfgs)


def test_enumeration_count_two_powers():
    # Sharing power has 2 choices; the other AP contributes 1 + 2*2 options:
    # 2 * 5 = 10 configurations.
    net = _net22()
    pair = (0, net.sta_ids_by_ap[0][0])
    cfgs = flat_enumerate(net, pair, (10.0, 16.0))
    assert len(cfgs) == 10
    assert len({c.config_id() for c in cfgs}) == 10


def test_enumeration_count_four_aps_three_powers():
    net = gen_multi_room(2, 2, 20.0, CH, seed=1)
    pair = (2, net.sta_ids_by_ap[2][0])
    codec = ConfigCodec(net, pair, (4.0, 10.0, 16.0))
    assert codec.n_configs == 3 * (1 + 4 * 3) ** 3


@given(st.integers(min_value=0))
@settings(max_examples=80)
def test_codec_bijection(raw):
    net = gen_multi_room(2, 2, 20.0, CH, seed=2)
    pair = (1, net.sta_ids_by_ap[1][0])
    codec = ConfigCodec(net, pair, (4.0, 10.0, 16.0))
    index = raw % codec.n_configs
    cfg = codec.decode(index)
    assert codec.encode(cfg) == index
    # Structural validity of the decoded configuration.
    aps = [a for a, _, _ in cfg.entries]
    assert len(set(aps)) == len(aps)
    assert 1 in aps


def test_codec_rejects_foreign_configs():
    net = gen_multi_room(2, 2, 20.0, CH, seed=2)
    pair = (1, net.sta_ids_by_ap[1][0])
    codec = ConfigCodec(net, pair, (16.0,), ap_ids=(0, 1))
    with pytest.raises(ValueError):
        codec.encode(TransmissionConfig(((2, net.sta_ids_by_ap[2][0], 16.0),)))
    with pytest.raises(ValueError):
        codec.decode(codec.n_configs)


def test_enumeration_limit_guard():
    net = gen_multi_room(4, 4, 20.0, CH, seed=3)
    pair = (0, net.sta_ids_by_ap[0][0])
    with pytest.raises(ValueError):
        flat_enumerate(net, pair, (4.0, 10.0, 16.0))


def test_flat_agent_decide_learn_cycle():
    net = _net22()
    agent = FlatAgent((16.0,), bandit_kind="epsilon_greedy", bandit_hyper={"epsilon": 0.5})
    rng = make_rng(4)
    pair = (0, net.sta_ids_by_ap[0][0])
    cfg = agent.decide(net, pair, rng)
    assert any(a == 0 for a, _, _ in cfg.entries)
    agent.learn(0.7)
    with pytest.raises(ValueError):
        agent.learn(0.7)  # nothing pending
    # One policy per sharing pair, created lazily.
    other_pair = (1, net.sta_ids_by_ap[1][1])
    agent.decide(net, other_pair, rng)
    agent.learn(0.1)
    assert set(agent._policies) == {pair, other_pair}


def test_hierarchy_level1_arm_count():
    # Three participating APs leave two possible joiners: four subsets.
    net = gen_multi_room(1, 3, 20.0, CH, seed=5)
    h = AgentHierarchy((16.0,))
    rng = make_rng(6)
    pair = (0, net.sta_ids_by_ap[0][0])
    h.select(net, pair, rng)
    assert h._level1[pair[1]].n_arms == 4


def test_hierarchy_trace_structure():
    net = gen_multi_room(2, 2, 20.0, CH, seed=7)
    h = AgentHierarchy((4.0, 10.0, 16.0))
    rng = make_rng(8)
    pair = (3, net.sta_ids_by_ap[3][2])
    for _ in range(50):
        cfg, trace = h.select(net, pair, rng)
        group = {a for a, _, _ in cfg.entries}
        assert 3 in group
        # One level-1 pick, a level-2 pick per non-sharing member, a level-3
        # pick per member.
        assert trace.decision_count() == 1 + (len(group) - 1) + len(group)
        assert len(trace.level2) == len(group) - 1
        assert len(trace.level3) == len(group)
        # The sharing station is never re-picked by level 2.
        assert all(key[0] != 3 for key, _ in trace.level2)
        h.update(trace, 0.5)


def test_hierarchy_single_ap_network():
    net = gen_multi_room(1, 1, 20.0, CH, seed=9)
    h = AgentHierarchy((16.0,))
    cfg, trace = h.select(net, (0, 1), make_rng(10))
    assert len(cfg.entries) == 1
    assert trace.decision_count() == 2  # one subset pick, one power pick
    h.update(trace, 1.0)


def test_hierarchy_stale_trace_rejected():
    net = gen_multi_room(2, 2, 20.0, CH, seed=11)
    h = AgentHierarchy((16.0,))
    rng = make_rng(12)
    pair = (0, net.sta_ids_by_ap[0][0])
    _, first = h.select(net, pair, rng)
    _, second = h.select(net, pair, rng)
    with pytest.raises(ValueError):
        h.update(first, 0.5)
    h.update(second, 0.5)
    with pytest.raises(ValueError):
        h.update(second, 0.5)  # already consumed


def test_hierarchy_update_feeds_all_levels():
    net = gen_multi_room(2, 2, 20.0, CH, seed=13)
    h = AgentHierarchy((16.0,))
    rng = make_rng(14)
    pair = (0, net.sta_ids_by_ap[0][0])
    cfg, trace = h.select(net, pair, rng)
    h.update(trace, 0.8)
    sta_l, arm1 = trace.level1
    assert h._level1[sta_l].count(arm1) == 1
    assert h._level1[sta_l].mean(arm1) == pytest.approx(0.8)
    for key, arm in trace.level2:
        assert h._level2[key].count(arm) == 1
    for key, arm in trace.level3:
        assert h._level3[key].count(arm) == 1


def test_hierarchy_default_exploration_ladder():
    h = AgentHierarchy((16.0,))
    assert h.bandit_kinds == ("ucb", "ucb", "ucb")
    assert [hyp["c"] for hyp in h.bandit_hyper] == [1.0, 0.3, 0.1]


def test_clustered_routing_and_learning():
    net = gen_multi_room(2, 2, 20.0, CH, seed=15)
    cmap = grid_cluster_map(2, 2, 1, 2)  # clusters {0,1} and {2,3}
    pol = clustered_hmab(cmap, (16.0,))
    rng = make_rng(16)
    pair = (0, net.sta_ids_by_ap[0][0])
    cfg = pol.decide(net, pair, rng)
    # The deciding cluster owns APs 0 and 1 only.
    assert {a for a, _, _ in cfg.entries} <= {0, 1}
    pol.learn(0.5)
    assert set(pol._policies) == {0}
    far_pair = (3, net.sta_ids_by_ap[3][0])
    cfg = pol.decide(net, far_pair, rng)
    assert {a for a, _, _ in cfg.entries} <= {2, 3}
    pol.learn(0.5)
    assert set(pol._policies) == {0, 1}


def test_clustered_flat_respects_cluster():
    net = gen_multi_room(2, 2, 20.0, CH, seed=17)
    cmap = grid_cluster_map(2, 2, 2, 1)  # columns: {0,2} and {1,3}
    pol = clustered_flat(cmap, (16.0,))
    rng = make_rng(18)
    for _ in range(20):
        cfg = pol.decide(net, (2, net.sta_ids_by_ap[2][0]), rng)
        assert {a for a, _, _ in cfg.entries} <= {0, 2}
        pol.learn(0.2)


def test_clustered_unknown_ap_rejected():
    pol = clustered_flat({0: 0, 1: 0}, (16.0,))
    net = gen_multi_room(2, 2, 20.0, CH, seed=19)
    with pytest.raises(ValueError):
        pol.decide(net, (3, net.sta_ids_by_ap[3][0]), make_rng(20))
    with pytest.raises(ValueError):
        ClusteredPolicy({}, lambda m: None)


def test_agent_state_serializes_to_json():
    net = gen_multi_room(2, 2, 20.0, CH, seed=21)
    h = AgentHierarchy((4.0, 16.0))
    rng = make_rng(22)
    for _ in range(30):
        pair = (0, net.sta_ids_by_ap[0][0])
        cfg, trace = h.select(net, pair, rng)
        h.update(trace, 0.3)
    state = json.loads(json.dumps(h.to_state()))
    assert state["type"] == "hmab"
    assert set(state) >= {"level1", "level2", "level3"}
    l1 = state["level1"][str(net.sta_ids_by_ap[0][0])]
    assert sum(rec["count"] for rec in l1["arms"].values()) == 30
