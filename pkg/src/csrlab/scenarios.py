"""Deployment generators: room grids, open areas, symmetric lattices.

All randomized generators draw from a Philox counter-based generator keyed by
an explicit integer seed, so a (spec, seed) pair always produces the same
Network on any platform.  Device ids are assigned in draw order: APs first
(room by room or AP by AP), then their stations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .network import AccessPoint, Network, Station, Wall
from .radio import ChannelParams

__all__ = [
    "ScenarioSpec",
    "make_rng",
    "gen_multi_room",
    "gen_open_space",
    "gen_symmetric_enterprise",
    "mutate_positions",
    "add_legacy_aps",
    "grid_cluster_map",
    "grid_for_ap_count",
]


def make_rng(seed: int) -> np.random.Generator:
    """The project-wide RNG: 64-bit Philox keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of a deployment, serializable to CLI config.

    ``kind`` selects the generator.  ``room_size`` doubles as the lattice
    spacing for the symmetric kind.  ``clusters`` optionally names the block
    shape (rows, cols) used to group rooms into scheduling clusters.
    """

    kind: str = "multi_room"
    grid: tuple[int, int] = (2, 2)
    room_size: float = 20.0
    stations_per_ap: int = 4
    area_side: float = 75.0
    ap_count_range: tuple[int, int] = (2, 5)
    stations_per_ap_range: tuple[int, int] = (3, 5)
    station_spread: float = 10.0
    seed: int = 0
    clusters: tuple[int, int] | None = None
    legacy_ap_count: int = 0
    max_power_dbm: float = 16.0

    _KINDS = ("multi_room", "open_space", "symmetric_enterprise")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {self._KINDS}")
        if self.kind == "multi_room" and (self.grid[0] < 1 or self.grid[1] < 1):
            raise ValueError("grid dimensions must be at least 1x1")
        if self.room_size <= 0.0:
            raise ValueError("room_size must be positive")
        if self.legacy_ap_count < 0:
            raise ValueError("legacy_ap_count must be non-negative")

    def build(self, ch: ChannelParams | None = None, seed: int | None = None) -> Network:
        """Generate the Network this spec describes."""
        ch = ch or ChannelParams()
        seed = self.seed if seed is None else seed
        if self.kind == "multi_room":
            net = gen_multi_room(
                self.grid[0], self.grid[1], self.room_size, ch, seed,
                stations_per_room=self.stations_per_ap, max_power_dbm=self.max_power_dbm,
            )
        elif self.kind == "open_space":
            net = gen_open_space(
                seed, ch, area_side=self.area_side, ap_count_range=self.ap_count_range,
                stations_per_ap_range=self.stations_per_ap_range,
                station_spread=self.station_spread, max_power_dbm=self.max_power_dbm,
            )
        else:
            net = gen_symmetric_enterprise(
                self.grid[0], self.grid[1], self.room_size, ch, max_power_dbm=self.max_power_dbm,
            )
        if self.legacy_ap_count:
            net = add_legacy_aps(net, self.legacy_ap_count, self, ch, seed=seed + 1)
        return net

    def cluster_map(self) -> dict[int, int] | None:
        if self.clusters is None:
            return None
        return grid_cluster_map(self.grid[0], self.grid[1], *self.clusters)


def _room_bounds(room: int, cols: int, room_size: float) -> tuple[float, float, float, float]:
    r, c = divmod(room, cols)
    return c * room_size, r * room_size, (c + 1) * room_size, (r + 1) * room_size


def _interior_walls(rows: int, cols: int, room_size: float) -> list[Wall]:
    walls = []
    for c in range(1, cols):
        for r in range(rows):
            walls.append(Wall(c * room_size, r * room_size, c * room_size, (r + 1) * room_size))
    for r in range(1, rows):
        for c in range(cols):
            walls.append(Wall(c * room_size, r * room_size, (c + 1) * room_size, r * room_size))
    return walls


def gen_multi_room(
    rows: int,
    cols: int,
    room_size: float,
    ch: ChannelParams | None = None,
    seed: int = 0,
    stations_per_room: int = 4,
    max_power_dbm: float = 16.0,
) -> Network:
    """Grid of rooms, one AP and ``stations_per_room`` stations uniform in each.

    Interior room boundaries become wall segments (one segment per room edge),
    so a 2x2 grid has 4 of them.  AP id equals its room index in row-major
    order.
    """
    ch = ch or ChannelParams()
    rng = make_rng(seed)
    n_rooms = rows * cols
    aps, stations = [], []
    for room in range(n_rooms):
        x0, y0, x1, y1 = _room_bounds(room, cols, room_size)
        ax, ay = rng.uniform(x0, x1), rng.uniform(y0, y1)
        aps.append(AccessPoint(id=room, x=ax, y=ay, max_power_dbm=max_power_dbm))
        for _ in range(stations_per_room):
            sx, sy = rng.uniform(x0, x1), rng.uniform(y0, y1)
            stations.append(Station(id=len(stations), x=sx, y=sy, ap=room))
    return Network.build(aps, stations, _interior_walls(rows, cols, room_size), ch)


def gen_open_space(
    seed: int,
    ch: ChannelParams | None = None,
    area_side: float = 75.0,
    ap_count_range: tuple[int, int] = (2, 5),
    stations_per_ap_range: tuple[int, int] = (3, 5),
    station_spread: float = 10.0,
    max_power_dbm: float = 16.0,
) -> Network:
    """Wall-free square area with a random number of APs and stations.

    The AP count and each AP's station count are uniform over their inclusive
    ranges; stations are Gaussian around their AP (clipped to the area).
    """
    ch = ch or ChannelParams()
    rng = make_rng(seed)
    n_aps = int(rng.integers(ap_count_range[0], ap_count_range[1] + 1))
    aps, stations = [], []
    for a in range(n_aps):
        ax, ay = rng.uniform(0.0, area_side), rng.uniform(0.0, area_side)
        aps.append(AccessPoint(id=a, x=ax, y=ay, max_power_dbm=max_power_dbm))
        n_sta = int(rng.integers(stations_per_ap_range[0], stations_per_ap_range[1] + 1))
        for _ in range(n_sta):
            sx = float(np.clip(rng.normal(ax, station_spread), 0.0, area_side))
            sy = float(np.clip(rng.normal(ay, station_spread), 0.0, area_side))
            stations.append(Station(id=len(stations), x=sx, y=sy, ap=a))
    return Network.build(aps, stations, (), ch)


def gen_symmetric_enterprise(
    rows: int,
    cols: int,
    spacing: float,
    ch: ChannelParams | None = None,
    max_power_dbm: float = 16.0,
) -> Network:
    """Deterministic lattice of APs with four stations at 2 m axis offsets.

    APs sit at (col*spacing, row*spacing); each AP's stations sit east, west,
    north, south of it.  No randomness and no walls.
    """
    ch = ch or ChannelParams()
    aps, stations = [], []
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            ax, ay = c * spacing, r * spacing
            aps.append(AccessPoint(id=a, x=ax, y=ay, max_power_dbm=max_power_dbm))
            for dx, dy in ((2.0, 0.0), (-2.0, 0.0), (0.0, 2.0), (0.0, -2.0)):
                stations.append(Station(id=len(stations), x=ax + dx, y=ay + dy, ap=a))
    return Network.build(aps, stations, (), ch)


def mutate_positions(net: Network, spec: ScenarioSpec, seed: int, ch: ChannelParams | None = None) -> Network:
    """Redraw device positions without touching topology or associations.

    Multi-room: every device is redrawn uniformly inside its original room
    (a station's room is its AP's room).  Open space: full redraw of AP and
    station positions keeping all counts.  Other kinds are not mutable.
    """
    ch = ch or ChannelParams()
    rng = make_rng(seed)
    if spec.kind == "multi_room":
        cols, room_size = spec.grid[1], spec.room_size
        aps = []
        stations = list(net.stations)
        for ap in net.aps:
            if not ap.coordinated:
                # Legacy APs live in their host room; host = id round-robin.
                host = _legacy_host(ap.id, net)
                x0, y0, x1, y1 = _room_bounds(host, cols, room_size)
            else:
                x0, y0, x1, y1 = _room_bounds(ap.id, cols, room_size)
            aps.append(replace(ap, x=rng.uniform(x0, x1), y=rng.uniform(y0, y1)))
            for sid in net.sta_ids_by_ap[ap.id]:
                s = net.stations[sid]
                stations[sid] = replace(s, x=rng.uniform(x0, x1), y=rng.uniform(y0, y1))
        return Network.build(aps, stations, net.walls, ch)
    if spec.kind == "open_space":
        aps = []
        stations = list(net.stations)
        for ap in net.aps:
            ax, ay = rng.uniform(0.0, spec.area_side), rng.uniform(0.0, spec.area_side)
            aps.append(replace(ap, x=ax, y=ay))
            for sid in net.sta_ids_by_ap[ap.id]:
                sx = float(np.clip(rng.normal(ax, spec.station_spread), 0.0, spec.area_side))
                sy = float(np.clip(rng.normal(ay, spec.station_spread), 0.0, spec.area_side))
                stations[sid] = replace(net.stations[sid], x=sx, y=sy)
        return Network.build(aps, stations, net.walls, ch)
    raise ValueError(f"scenario kind {spec.kind!r} is not mutable")


def _legacy_host(legacy_ap_id: int, net: Network) -> int:
    coord = net.coordinated_ap_ids
    legacy = net.legacy_ap_ids
    return coord[legacy.index(legacy_ap_id) % len(coord)]


def add_legacy_aps(
    net: Network,
    count: int,
    spec: ScenarioSpec,
    ch: ChannelParams | None = None,
    seed: int = 0,
) -> Network:
    """Append ``count`` uncoordinated APs, one dummy station each.

    Hosts are assigned round-robin over the coordinated APs in id order; each
    legacy AP and its station are placed uniformly inside the host's room.
    Only multi-room scenarios define rooms, so only they are supported.
    """
    if spec.kind != "multi_room":
        raise ValueError("legacy AP placement requires a multi_room scenario")
    if count < 0:
        raise ValueError("count must be non-negative")
    ch = ch or ChannelParams()
    rng = make_rng(seed)
    coord = net.coordinated_ap_ids
    aps = list(net.aps)
    stations = list(net.stations)
    cols, room_size = spec.grid[1], spec.room_size
    for j in range(count):
        host = coord[j % len(coord)]
        x0, y0, x1, y1 = _room_bounds(host, cols, room_size)
        ap_id = len(aps)
        aps.append(
            AccessPoint(
                id=ap_id, x=rng.uniform(x0, x1), y=rng.uniform(y0, y1),
                max_power_dbm=spec.max_power_dbm, coordinated=False,
            )
        )
        stations.append(
            Station(id=len(stations), x=rng.uniform(x0, x1), y=rng.uniform(y0, y1), ap=ap_id)
        )
    return Network.build(aps, stations, net.walls, ch)


def grid_cluster_map(rows: int, cols: int, block_rows: int, block_cols: int) -> dict[int, int]:
    """Map room-grid AP ids to cluster ids by rectangular blocks of rooms."""
    if block_rows < 1 or block_cols < 1:
        raise ValueError("block dimensions must be at least 1")
    blocks_per_row = -(-cols // block_cols)  # ceil division
    out = {}
    for r in range(rows):
        for c in range(cols):
            out[r * cols + c] = (r // block_rows) * blocks_per_row + (c // block_cols)
    return out


def grid_for_ap_count(n: int) -> tuple[int, int]:
    """Most nearly square (rows, cols) grid with exactly ``n`` rooms."""
    if n < 1:
        raise ValueError("AP count must be positive")
    best = (1, n)
    for r in range(1, int(n**0.5) + 1):
        if n % r == 0:
            best = (r, n // r)
    return best
