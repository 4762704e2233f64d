"""Scalar radio physics: unit conversions, path loss, SINR, and MCS selection.

All interference arithmetic happens in linear units (mW); dB/dBm values are
converted at the boundary.  Path loss follows a dual-slope log-distance model
for enterprise indoor deployments: free-space-like slope up to a breakpoint
distance, a steeper slope beyond it, plus a fixed per-wall penalty.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

__all__ = [
    "ChannelParams",
    "McsTable",
    "PowerConfig",
    "DEFAULT_CHANNEL",
    "DEFAULT_MCS_TABLE",
    "DEFAULT_POWER",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "mw_to_dbm",
    "path_loss_db",
    "best_mcs",
]


def db_to_linear(value_db: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear ratio to dB.  Raises ValueError for non-positive input."""
    if value <= 0.0:
        raise ValueError(f"linear ratio must be positive, got {value}")
    return 10.0 * math.log10(value)


def dbm_to_mw(power_dbm: float) -> float:
    """Convert a power level in dBm to milliwatts."""
    return 10.0 ** (power_dbm / 10.0)


def mw_to_dbm(power_mw: float) -> float:
    """Convert a power level in milliwatts to dBm."""
    if power_mw <= 0.0:
        raise ValueError(f"power must be positive, got {power_mw} mW")
    return 10.0 * math.log10(power_mw)


@dataclass(frozen=True)
class ChannelParams:
    """Propagation and receiver parameters shared by simulator and optimizer.

    ``freq_ghz`` is the carrier frequency, ``breakpoint_m`` the distance at
    which the path-loss slope steepens, ``wall_loss_db`` the penalty per wall
    crossed, ``noise_floor_dbm`` the receiver noise power, and ``obss_pd_dbm``
    the detection threshold used by the spatial-reuse join rule.  Distances
    below ``min_distance_m`` are clamped to it before evaluating path loss.
    """

    freq_ghz: float = 5.0
    breakpoint_m: float = 10.0
    wall_loss_db: float = 7.0
    noise_floor_dbm: float = -94.0
    obss_pd_dbm: float = -72.0
    min_distance_m: float = 0.1

    def __post_init__(self) -> None:
        if self.freq_ghz <= 0.0:
            raise ValueError("freq_ghz must be positive")
        if self.breakpoint_m <= 0.0:
            raise ValueError("breakpoint_m must be positive")
        if self.min_distance_m <= 0.0:
            raise ValueError("min_distance_m must be positive")
        if self.wall_loss_db < 0.0:
            raise ValueError("wall_loss_db must be non-negative")

    @property
    def noise_floor_mw(self) -> float:
        return dbm_to_mw(self.noise_floor_dbm)


def path_loss_db(distance_m: float, ch: ChannelParams, walls_crossed: int = 0) -> float:
    """Dual-slope log-distance path loss in dB.

    ``40.05 + 20*log10(f/2.4) + 20*log10(min(d, B)) + 35*log10(d/B)`` for the
    part of ``d`` beyond the breakpoint ``B``, plus ``wall_loss_db`` per wall.
    ``d`` is clamped below by ``min_distance_m``.
    """
    if walls_crossed < 0:
        raise ValueError("walls_crossed must be non-negative")
    d = max(distance_m, ch.min_distance_m)
    loss = 40.05 + 20.0 * math.log10(ch.freq_ghz / 2.4)
    loss += 20.0 * math.log10(min(d, ch.breakpoint_m))
    if d > ch.breakpoint_m:
        loss += 35.0 * math.log10(d / ch.breakpoint_m)
    return loss + ch.wall_loss_db * walls_crossed


# 20 MHz, single spatial stream, 800 ns guard interval.
_DEFAULT_RATES_MBPS = (8.6, 17.2, 25.8, 34.4, 51.6, 68.8, 77.4, 86.0, 103.2, 114.7, 129.0, 143.4)
_DEFAULT_MIN_SINR_DB = (2.0, 5.0, 9.0, 11.0, 15.0, 18.0, 20.0, 25.0, 29.0, 31.0, 34.0, 37.0)


@dataclass(frozen=True)
class McsTable:
    """Modulation/coding table: data rate and minimum SINR per index.

    Both sequences must be strictly increasing and equally long, so a higher
    index always means a faster but more fragile mode.
    """

    rates_mbps: tuple[float, ...] = _DEFAULT_RATES_MBPS
    min_sinr_db: tuple[float, ...] = _DEFAULT_MIN_SINR_DB

    def __post_init__(self) -> None:
        if len(self.rates_mbps) != len(self.min_sinr_db):
            raise ValueError("rates_mbps and min_sinr_db must have equal length")
        if not self.rates_mbps:
            raise ValueError("MCS table must not be empty")
        for seq, name in ((self.rates_mbps, "rates_mbps"), (self.min_sinr_db, "min_sinr_db")):
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise ValueError(f"{name} must be strictly increasing")

    def __len__(self) -> int:
        return len(self.rates_mbps)

    def min_sinr_linear(self) -> tuple[float, ...]:
        return tuple(db_to_linear(s) for s in self.min_sinr_db)


def best_mcs(sinr_db: float, table: McsTable) -> int | None:
    """Index of the fastest mode whose SINR requirement is met, else None.

    The comparison is inclusive: a SINR exactly at a threshold selects that
    mode.
    """
    idx = bisect_right(table.min_sinr_db, sinr_db) - 1
    return idx if idx >= 0 else None


@dataclass(frozen=True)
class PowerConfig:
    """Transmit power limits and the discrete ladder used by bandit agents.

    ``min_power_dbm``/``max_power_dbm`` bound the continuous optimizer;
    ``discrete_levels_dbm`` is the action set for learned power control and
    must lie within those bounds.
    """

    min_power_dbm: float = 4.0
    max_power_dbm: float = 16.0
    discrete_levels_dbm: tuple[float, ...] = (4.0, 10.0, 16.0)

    def __post_init__(self) -> None:
        if self.min_power_dbm > self.max_power_dbm:
            raise ValueError("min_power_dbm must not exceed max_power_dbm")
        if not self.discrete_levels_dbm:
            raise ValueError("discrete_levels_dbm must not be empty")
        lo, hi = self.min_power_dbm, self.max_power_dbm
        if any(not (lo <= p <= hi) for p in self.discrete_levels_dbm):
            raise ValueError("discrete levels must lie within [min_power, max_power]")
        if any(b <= a for a, b in zip(self.discrete_levels_dbm, self.discrete_levels_dbm[1:])):
            raise ValueError("discrete_levels_dbm must be strictly increasing")


DEFAULT_CHANNEL = ChannelParams()
DEFAULT_MCS_TABLE = McsTable()
DEFAULT_POWER = PowerConfig()
