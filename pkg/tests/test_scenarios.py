"""Generator oracles: counts, containment, determinism, mutation rules."""

import numpy as np
import pytest

from csrlab.network import count_wall_crossings
from csrlab.radio import ChannelParams
from csrlab.scenarios import (
    ScenarioSpec,
    add_legacy_aps,
    gen_multi_room,
    gen_open_space,
    gen_symmetric_enterprise,
    grid_cluster_map,
    grid_for_ap_count,
    make_rng,
    mutate_positions,
)

CH = ChannelParams()


def test_multi_room_counts_and_containment():
    net = gen_multi_room(2, 2, 20.0, CH, seed=7)
    assert len(net.aps) == 4
    assert len(net.stations) == 16
    assert len(net.walls) == 4
    for dev in list(net.aps) + list(net.stations):
        assert 0.0 <= dev.x <= 40.0 and 0.0 <= dev.y <= 40.0


def test_multi_room_station_in_own_room():
    net = gen_multi_room(3, 3, 20.0, CH, seed=3)
    for s in net.stations:
        ap = net.aps[s.ap]
        crossings = count_wall_crossings((ap.x, ap.y), (s.x, s.y), net.walls)
        assert crossings == 0


def test_multi_room_cross_room_has_walls():
    net = gen_multi_room(2, 2, 20.0, CH, seed=1)
    ap0 = net.aps[0]
    # Stations of the diagonally opposite room sit behind at least one wall.
    for sid in net.sta_ids_by_ap[3]:
        s = net.stations[sid]
        assert count_wall_crossings((ap0.x, ap0.y), (s.x, s.y), net.walls) >= 1


def test_multi_room_determinism():
    a = gen_multi_room(2, 2, 20.0, CH, seed=42)
    b = gen_multi_room(2, 2, 20.0, CH, seed=42)
    c = gen_multi_room(2, 2, 20.0, CH, seed=43)
    assert a.aps == b.aps and a.stations == b.stations
    assert a.aps != c.aps


def test_open_space_counts_within_ranges():
    for seed in range(5):
        net = gen_open_space(seed, CH)
        assert 2 <= len(net.aps) <= 5
        for a in net.aps:
            assert 3 <= len(net.sta_ids_by_ap[a.id]) <= 5
        for dev in list(net.aps) + list(net.stations):
            assert 0.0 <= dev.x <= 75.0 and 0.0 <= dev.y <= 75.0
        assert net.walls == ()


def test_symmetric_enterprise_layout():
    net = gen_symmetric_enterprise(1, 4, 30.0, CH)
    assert [a.x for a in net.aps] == [0.0, 30.0, 60.0, 90.0]
    assert all(a.y == 0.0 for a in net.aps)
    # Four stations per AP exactly 2 m away on the axes.
    for a in net.aps:
        offs = sorted(
            (net.stations[s].x - a.x, net.stations[s].y - a.y) for s in net.sta_ids_by_ap[a.id]
        )
        assert offs == [(-2.0, 0.0), (0.0, -2.0), (0.0, 2.0), (2.0, 0.0)]
    # Deterministic: no seed involved.
    again = gen_symmetric_enterprise(1, 4, 30.0, CH)
    assert again.aps == net.aps and again.stations == net.stations


def test_mutate_multi_room_keeps_rooms_and_topology():
    spec = ScenarioSpec(kind="multi_room", grid=(2, 2), room_size=20.0, seed=5)
    net = spec.build(CH)
    mut = mutate_positions(net, spec, seed=99, ch=CH)
    assert [a.id for a in mut.aps] == [a.id for a in net.aps]
    assert [s.ap for s in mut.stations] == [s.ap for s in net.stations]
    assert mut.walls == net.walls
    assert any(a.x != b.x or a.y != b.y for a, b in zip(net.aps, mut.aps))
    # Every device stays inside its original room.
    for s in mut.stations:
        ap = mut.aps[s.ap]
        assert count_wall_crossings((ap.x, ap.y), (s.x, s.y), mut.walls) == 0
        room = s.ap
        r, c = divmod(room, 2)
        assert c * 20.0 <= s.x <= (c + 1) * 20.0
        assert r * 20.0 <= s.y <= (r + 1) * 20.0


def test_mutate_open_space_redraws_everything():
    spec = ScenarioSpec(kind="open_space", seed=2)
    net = spec.build(CH)
    mut = mutate_positions(net, spec, seed=17, ch=CH)
    assert len(mut.aps) == len(net.aps)
    assert [s.ap for s in mut.stations] == [s.ap for s in net.stations]


def test_mutate_symmetric_rejected():
    spec = ScenarioSpec(kind="symmetric_enterprise", grid=(1, 4), room_size=30.0)
    net = spec.build(CH)
    with pytest.raises(ValueError):
        mutate_positions(net, spec, seed=0, ch=CH)


def test_add_legacy_aps_round_robin():
    spec = ScenarioSpec(kind="multi_room", grid=(2, 2), room_size=20.0, seed=11)
    net = spec.build(CH)
    aug = add_legacy_aps(net, 6, spec, CH, seed=13)
    assert len(aug.aps) == 10
    assert len(aug.legacy_ap_ids) == 6
    assert aug.coordinated_ap_ids == (0, 1, 2, 3)
    # Hosts cycle 0,1,2,3,0,1; each legacy AP has exactly one dummy station
    # inside the host's room.
    for j, ap_id in enumerate(aug.legacy_ap_ids):
        host = j % 4
        ap = aug.aps[ap_id]
        r, c = divmod(host, 2)
        assert c * 20.0 <= ap.x <= (c + 1) * 20.0
        assert r * 20.0 <= ap.y <= (r + 1) * 20.0
        stas = aug.sta_ids_by_ap[ap_id]
        assert len(stas) == 1
        s = aug.stations[stas[0]]
        assert c * 20.0 <= s.x <= (c + 1) * 20.0


def test_spec_build_with_legacy_count():
    spec = ScenarioSpec(kind="multi_room", grid=(2, 2), room_size=20.0, seed=1, legacy_ap_count=3)
    net = spec.build(CH)
    assert len(net.legacy_ap_ids) == 3


def test_cluster_map_blocks():
    m = grid_cluster_map(4, 4, 2, 2)
    assert m[0] == m[1] == m[4] == m[5] == 0
    assert m[2] == m[3] == m[6] == m[7] == 1
    assert m[10] == m[11] == m[14] == m[15] == 3
    assert sorted(set(m.values())) == [0, 1, 2, 3]
    # 3x4 grid grouped into two side-by-side clusters of six rooms.
    m2 = grid_cluster_map(3, 4, 3, 2)
    assert sorted(set(m2.values())) == [0, 1]
    assert m2[0] == 0 and m2[3] == 1


def test_grid_for_ap_count():
    assert grid_for_ap_count(4) == (2, 2)
    assert grid_for_ap_count(6) == (2, 3)
    assert grid_for_ap_count(9) == (3, 3)
    assert grid_for_ap_count(5) == (1, 5)


def test_make_rng_is_philox_and_stable():
    g = make_rng(42)
    assert isinstance(g.bit_generator, np.random.Philox)
    assert list(make_rng(7).integers(0, 1000, 4)) == list(make_rng(7).integers(0, 1000, 4))


def test_scenario_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(kind="nope")
    with pytest.raises(ValueError):
        ScenarioSpec(room_size=0.0)
    with pytest.raises(ValueError):
        ScenarioSpec(legacy_ap_count=-1)
