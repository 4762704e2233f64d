"""Simulator oracles: TXOP execution, baselines, episode mechanics."""

import math

import pytest

from csrlab.network import AccessPoint, Network, Station
from csrlab.radio import ChannelParams, DEFAULT_MCS_TABLE, McsTable, path_loss_db
from csrlab.scenarios import ScenarioSpec, gen_multi_room, gen_symmetric_enterprise, make_rng
from csrlab.txop import (
    DcfPolicy,
    SimParams,
    SrPolicy,
    TransmissionConfig,
    dcf_txop,
    default_reward_normalizer,
    execute_txop,
    legacy_contenders,
    run_episode,
    select_sharing_pair,
    sr_txop,
)

CH = ChannelParams()
MCS = DEFAULT_MCS_TABLE
SIM = SimParams()


def _single_link_net():
    return Network.build(
        [AccessPoint(id=0, x=0.0, y=0.0)],
        [Station(id=0, x=1.0, y=0.0, ap=0)],
        (),
        CH,
    )


def test_execute_single_link_frame_quantization():
    # 1 m link at 16 dBm supports the top mode (143.4 Mb/s); one TXOP fits
    # exactly 65 whole 1500 B frames, so the effective rate drops to ~142.2.
    net = _single_link_net()
    res = execute_txop(TransmissionConfig(((0, 0, 16.0),)), net, CH, MCS, SIM)
    link = res.per_link[0]
    assert link.mcs == 11
    assert link.delivered_bytes == 65 * 1500
    assert res.effective_rate_mbps == pytest.approx(65 * 12000 / 5.484e-3 / 1e6, abs=1e-9)
    assert res.effective_rate_mbps == pytest.approx(142.2, abs=0.05)
    # Normalizer: one coordinated AP -> 143.4; reward just below 1.
    assert res.reward == pytest.approx(res.effective_rate_mbps / 143.4, abs=1e-12)


def test_execute_failed_link_delivers_nothing():
    # 16 dBm over ~500 m cannot reach the lowest threshold.
    net = Network.build(
        [AccessPoint(id=0, x=0.0, y=0.0)],
        [Station(id=0, x=500.0, y=0.0, ap=0)],
        (),
        CH,
    )
    res = execute_txop(TransmissionConfig(((0, 0, 16.0),)), net, CH, MCS, SIM)
    assert res.per_link[0].mcs is None
    assert res.per_link[0].delivered_bytes == 0
    assert res.effective_rate_mbps == 0.0
    assert res.reward == 0.0


def test_execute_validation_errors():
    net = gen_multi_room(1, 2, 20.0, CH, seed=0)
    sta_of_0 = net.sta_ids_by_ap[0][0]
    sta_of_1 = net.sta_ids_by_ap[1][0]
    with pytest.raises(ValueError):  # duplicate AP
        execute_txop(
            TransmissionConfig(((0, sta_of_0, 16.0), (0, net.sta_ids_by_ap[0][1], 16.0))),
            net, CH, MCS, SIM,
        )
    with pytest.raises(ValueError):  # station not associated
        execute_txop(TransmissionConfig(((0, sta_of_1, 16.0),)), net, CH, MCS, SIM)
    with pytest.raises(ValueError):  # power above the AP limit
        execute_txop(TransmissionConfig(((0, sta_of_0, 30.0),)), net, CH, MCS, SIM)
    with pytest.raises(ValueError):  # interferer clashing with a config AP
        execute_txop(
            TransmissionConfig(((0, sta_of_0, 16.0),)), net, CH, MCS, SIM,
            interferers=[(0, 16.0)],
        )


def test_interference_never_helps():
    net = gen_multi_room(2, 2, 20.0, CH, seed=9)
    pair_cfg = TransmissionConfig(((0, net.sta_ids_by_ap[0][0], 16.0),))
    alone = execute_txop(pair_cfg, net, CH, MCS, SIM)
    both = TransmissionConfig(
        ((0, net.sta_ids_by_ap[0][0], 16.0), (3, net.sta_ids_by_ap[3][0], 16.0))
    )
    shared = execute_txop(both, net, CH, MCS, SIM)
    assert shared.per_link[0].rate_mbps <= alone.per_link[0].rate_mbps


def test_reward_bounded_and_normalizer():
    net = gen_multi_room(2, 2, 20.0, CH, seed=4)
    assert default_reward_normalizer(net, MCS) == pytest.approx(4 * 143.4)
    rng = make_rng(0)
    for _ in range(50):
        _, res = sr_txop(net, CH, MCS, SIM, rng)
        assert 0.0 <= res.reward <= 1.0


def test_select_sharing_pair_uniform_over_coordinated():
    spec = ScenarioSpec(grid=(2, 2), seed=3, legacy_ap_count=4)
    net = spec.build(CH)
    rng = make_rng(1)
    seen_aps = set()
    for _ in range(200):
        ap, sta = select_sharing_pair(net, rng)
        assert net.aps[ap].coordinated
        assert net.stations[sta].ap == ap
        seen_aps.add(ap)
    assert seen_aps == {0, 1, 2, 3}


def test_dcf_contends_over_all_aps():
    spec = ScenarioSpec(grid=(2, 2), seed=3, legacy_ap_count=2)
    net = spec.build(CH)
    rng = make_rng(2)
    winners = set()
    for _ in range(300):
        (ap, sta), res = dcf_txop(net, CH, MCS, SIM, rng)
        winners.add(ap)
        assert len(res.per_link) == 1
    assert winners == set(range(6))


def test_sr_two_far_aps_both_transmit():
    # Mutual path loss 96 dB at 16 dBm puts the detected level at -80 dBm,
    # below the -72 threshold, so the second AP always joins with an 8 dB
    # backoff.
    d = 10.0 * 10 ** ((96.0 - path_loss_db(10.0, CH)) / 35.0)  # distance with PL 96 dB
    net = Network.build(
        [AccessPoint(id=0, x=0.0, y=0.0), AccessPoint(id=1, x=d, y=0.0)],
        [Station(id=0, x=2.0, y=0.0, ap=0), Station(id=1, x=d - 2.0, y=0.0, ap=1)],
        (),
        CH,
    )
    assert net.ap_loss_db[0, 1] == pytest.approx(96.0, abs=1e-6)
    rng = make_rng(5)
    for _ in range(20):
        _, res = sr_txop(net, CH, MCS, SIM, rng)
        assert len(res.per_link) == 2
    # The joiner's power is max minus the (threshold - detected) margin.
    cfg = SrPolicy().decide(net, (0, 0), make_rng(1))
    powers = {a: p for a, _, p in cfg.entries}
    assert powers[0] == 16.0
    assert powers[1] == pytest.approx(16.0 - (-72.0 - (16.0 - 96.0)), abs=1e-6)


def test_sr_close_aps_never_join():
    net = gen_symmetric_enterprise(1, 2, 10.0, CH)  # 10 m apart: loudly audible
    rng = make_rng(6)
    for _ in range(20):
        _, res = sr_txop(net, CH, MCS, SIM, rng)
        assert len(res.per_link) == 1


def test_sr_backoff_cap():
    # 200 m apart: detected way below threshold; backoff capped at 12 dB.
    net = Network.build(
        [AccessPoint(id=0, x=0.0, y=0.0), AccessPoint(id=1, x=200.0, y=0.0)],
        [Station(id=0, x=2.0, y=0.0, ap=0), Station(id=1, x=198.0, y=0.0, ap=1)],
        (),
        CH,
    )
    cfg = SrPolicy().decide(net, (0, 0), make_rng(2))
    powers = {a: p for a, _, p in cfg.entries}
    assert powers[1] == pytest.approx(4.0)  # 16 - 12


def test_run_episode_dcf_policy_matches_dcf_txop():
    net = gen_multi_room(2, 2, 20.0, CH, seed=8)
    sim = SimParams(reward_normalizer_mbps=4 * 143.4)
    ep = run_episode(DcfPolicy(), net, CH, MCS, sim, steps=40, seed=123)
    rng = make_rng(123)
    for rec in ep.records:
        (ap, sta), res = dcf_txop(net, CH, MCS, sim, rng)
        assert rec.winner_ap == ap
        assert rec.config.entries == ((ap, sta, 16.0),)
        assert rec.result.effective_rate_mbps == pytest.approx(res.effective_rate_mbps)


def test_run_episode_legacy_winner_no_policy_action():
    spec = ScenarioSpec(grid=(2, 2), seed=3, legacy_ap_count=4)
    net = spec.build(CH)

    class CountingPolicy(DcfPolicy):
        decides = 0
        learns = 0

        def decide(self, net, pair, rng):
            CountingPolicy.decides += 1
            return super().decide(net, pair, rng)

        def learn(self, reward):
            CountingPolicy.learns += 1

    ep = run_episode(CountingPolicy(), net, CH, MCS, SIM, steps=400, seed=9)
    coordinated_steps = sum(1 for r in ep.records if r.coordinated)
    assert CountingPolicy.decides == coordinated_steps == CountingPolicy.learns
    # Eight contenders, four coordinated: roughly half the TXOPs are legacy.
    assert 0 < coordinated_steps < 400
    for rec in ep.records:
        if not rec.coordinated:
            assert len(rec.config.entries) == 1
            ap = rec.config.entries[0][0]
            assert not net.aps[ap].coordinated


def test_legacy_contenders_round_robin():
    spec = ScenarioSpec(grid=(2, 2), seed=3, legacy_ap_count=6)
    net = spec.build(CH)
    m = legacy_contenders(net)
    assert m[0] == (4, 8) and m[1] == (5, 9) and m[2] == (6,) and m[3] == (7,)


def test_legacy_interference_degrades_winner_room():
    # A legacy AP transmitting inside the winner's room should usually lower
    # the sharing link's delivered rate relative to the clean network.
    spec = ScenarioSpec(grid=(2, 2), seed=3)
    clean = spec.build(CH)
    noisy = ScenarioSpec(grid=(2, 2), seed=3, legacy_ap_count=4).build(CH)
    sim = SimParams(reward_normalizer_mbps=4 * 143.4)
    sta = clean.sta_ids_by_ap[0][0]
    cfg = TransmissionConfig(((0, sta, 16.0),))
    base = execute_txop(cfg, clean, CH, MCS, sim)
    contender = legacy_contenders(noisy)[0][0]
    hit = execute_txop(cfg, noisy, CH, MCS, sim, interferers=[(contender, 16.0)])
    assert hit.per_link[0].rate_mbps <= base.per_link[0].rate_mbps


def test_run_episode_mutation_changes_network():
    spec = ScenarioSpec(grid=(2, 2), seed=21)
    net = spec.build(CH)
    ep = run_episode(
        DcfPolicy(), net, CH, MCS, SIM, steps=20, seed=3,
        mutation_step=10, mutation_spec=spec,
    )
    assert ep.final_net is not net
    assert [a.id for a in ep.final_net.aps] == [a.id for a in net.aps]
    with pytest.raises(ValueError):
        run_episode(DcfPolicy(), net, CH, MCS, SIM, steps=5, seed=3, mutation_step=2)


def test_run_episode_deterministic():
    net = gen_multi_room(2, 2, 20.0, CH, seed=14)
    a = run_episode(SrPolicy(), net, CH, MCS, SIM, steps=30, seed=77)
    b = run_episode(SrPolicy(), net, CH, MCS, SIM, steps=30, seed=77)
    assert [r.result.effective_rate_mbps for r in a.records] == [
        r.result.effective_rate_mbps for r in b.records
    ]
    assert [r.config.config_id() for r in a.records] == [r.config.config_id() for r in b.records]


def test_config_id_canonical():
    cfg = TransmissionConfig(((2, 9, 10.0), (0, 1, 16.0)))
    assert cfg.config_id() == "0:1@16;2:9@10"
