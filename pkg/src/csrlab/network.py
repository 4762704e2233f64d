"""Network geometry: devices, walls, precomputed losses, and link SINR.

A ``Network`` is immutable.  Device ids double as row/column indices into the
precomputed loss matrices, so generators must emit APs and stations with
consecutive ids starting at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .radio import ChannelParams, dbm_to_mw, path_loss_db

__all__ = [
    "AccessPoint",
    "Station",
    "Wall",
    "Network",
    "count_wall_crossings",
    "sinr_db",
    "rssi_dbm",
]


@dataclass(frozen=True)
class AccessPoint:
    id: int
    x: float
    y: float
    max_power_dbm: float = 16.0
    coordinated: bool = True


@dataclass(frozen=True)
class Station:
    id: int
    x: float
    y: float
    ap: int  # id of the associated access point


@dataclass(frozen=True)
class Wall:
    """A straight wall segment from (x1, y1) to (x2, y2)."""

    x1: float
    y1: float
    x2: float
    y2: float


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_cross(p1, p2, q1, q2) -> bool:
    # Proper crossing only; touching or collinear overlap does not count.
    d1 = _orient(*q1, *q2, *p1)
    d2 = _orient(*q1, *q2, *p2)
    d3 = _orient(*p1, *p2, *q1)
    d4 = _orient(*p1, *p2, *q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def count_wall_crossings(a: tuple[float, float], b: tuple[float, float], walls: Iterable[Wall]) -> int:
    """Number of wall segments properly crossed by the straight path a -> b."""
    return sum(1 for w in walls if _segments_cross(a, b, (w.x1, w.y1), (w.x2, w.y2)))


@dataclass(frozen=True)
class Network:
    """Immutable deployment: APs, stations, walls, and precomputed losses.

    ``loss`` holds the linear AP-to-station path loss (signal divides by it);
    ``ap_loss_db`` holds AP-to-AP path loss in dB for carrier-sense checks.
    ``sta_ids_by_ap[a]`` lists the station ids associated with AP ``a``.
    """

    aps: tuple[AccessPoint, ...]
    stations: tuple[Station, ...]
    walls: tuple[Wall, ...]
    loss: np.ndarray
    ap_loss_db: np.ndarray
    sta_ids_by_ap: tuple[tuple[int, ...], ...]

    @classmethod
    def build(
        cls,
        aps: Iterable[AccessPoint],
        stations: Iterable[Station],
        walls: Iterable[Wall] = (),
        ch: ChannelParams | None = None,
    ) -> "Network":
        ch = ch or ChannelParams()
        aps = tuple(aps)
        stations = tuple(stations)
        walls = tuple(walls)
        if [a.id for a in aps] != list(range(len(aps))):
            raise ValueError("AP ids must be consecutive integers starting at 0")
        if [s.id for s in stations] != list(range(len(stations))):
            raise ValueError("station ids must be consecutive integers starting at 0")
        ap_ids = {a.id for a in aps}
        for s in stations:
            if s.ap not in ap_ids:
                raise ValueError(f"station {s.id} associated with unknown AP {s.ap}")

        loss = np.empty((len(aps), len(stations)))
        for a in aps:
            for s in stations:
                d = math.hypot(a.x - s.x, a.y - s.y)
                crossings = count_wall_crossings((a.x, a.y), (s.x, s.y), walls)
                loss[a.id, s.id] = 10.0 ** (path_loss_db(d, ch, crossings) / 10.0)

        ap_loss = np.zeros((len(aps), len(aps)))
        for a in aps:
            for b in aps:
                if a.id == b.id:
                    continue
                d = math.hypot(a.x - b.x, a.y - b.y)
                crossings = count_wall_crossings((a.x, a.y), (b.x, b.y), walls)
                ap_loss[a.id, b.id] = path_loss_db(d, ch, crossings)

        by_ap: list[list[int]] = [[] for _ in aps]
        for s in stations:
            by_ap[s.ap].append(s.id)
        loss.setflags(write=False)
        ap_loss.setflags(write=False)
        return cls(aps, stations, walls, loss, ap_loss, tuple(tuple(v) for v in by_ap))

    @property
    def coordinated_ap_ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.aps if a.coordinated)

    @property
    def legacy_ap_ids(self) -> tuple[int, ...]:
        return tuple(a.id for a in self.aps if not a.coordinated)

    def links(self, coordinated_only: bool = True) -> tuple[tuple[int, int], ...]:
        """All (ap, station) association links, optionally coordinated APs only."""
        out = []
        for a in self.aps:
            if coordinated_only and not a.coordinated:
                continue
            out.extend((a.id, s) for s in self.sta_ids_by_ap[a.id])
        return tuple(out)


def sinr_db(
    link: tuple[int, int],
    active: Mapping[int, float],
    net: Network,
    ch: ChannelParams,
) -> float:
    """SINR in dB at the receiver of ``link`` given concurrent transmitters.

    ``active`` maps AP id to transmit power in dBm and must include the link's
    own AP.  Every other active AP contributes interference through the
    precomputed loss matrix; the noise floor is always present.
    """
    ap, sta = link
    if ap not in active:
        raise ValueError(f"link AP {ap} is not among the active transmitters")
    signal_mw = dbm_to_mw(active[ap]) / net.loss[ap, sta]
    interference_mw = ch.noise_floor_mw
    for other, power in active.items():
        if other != ap:
            interference_mw += dbm_to_mw(power) / net.loss[other, sta]
    return 10.0 * math.log10(signal_mw / interference_mw)


def rssi_dbm(tx_ap: int, rx_ap: int, power_dbm: float, net: Network) -> float:
    """Received power at one AP from another, in dBm."""
    if tx_ap == rx_ap:
        raise ValueError("tx and rx AP must differ")
    return power_dbm - net.ap_loss_db[tx_ap, rx_ap]
