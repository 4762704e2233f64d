"""Post-processing for learning curves and timing sweeps.

Provides trend extraction by double exponential smoothing, a convergence
detector built on the normalized trend, a robust median-of-slopes
regression for timing scalability fits, and summary statistics across
repeated runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "HoltState",
    "ConvergenceVerdict",
    "SummaryStats",
    "holt_trend",
    "detect_convergence",
    "theil_sen_slope",
    "summarize",
    "station_cdf",
]


@dataclass
class HoltState:
    """Streaming state of double exponential smoothing.

    ``alpha`` smooths the level, ``beta`` the trend; both live in (0, 1].
    The degenerate alpha = beta = 1 reduces the trend to first differences.
    """

    level: float
    trend: float
    alpha: float = 0.1
    beta: float = 0.05

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")

    def update(self, y: float) -> float:
        """Absorb one observation; returns the updated trend."""
        prev = self.level
        self.level = self.alpha * y + (1.0 - self.alpha) * (self.level + self.trend)
        self.trend = self.beta * (self.level - prev) + (1.0 - self.beta) * self.trend
        return self.trend


@dataclass(frozen=True)
class ConvergenceVerdict:
    converged: bool
    step: int | None
    threshold: float
    patience: int


def holt_trend(series, alpha: float = 0.1, beta: float = 0.05) -> np.ndarray:
    """Trend series of double exponential smoothing.

    Initialized with level = y[0] and trend = y[1] - y[0]; entry 0 holds
    that initial trend and entry t >= 1 the trend after absorbing y[t].
    Exact on affine series: the trend equals the slope everywhere.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1 or len(y) < 2:
        raise ValueError("series must be one-dimensional with at least 2 points")
    state = HoltState(level=float(y[0]), trend=float(y[1] - y[0]), alpha=alpha, beta=beta)
    out = np.empty(len(y))
    out[0] = state.trend
    for t in range(1, len(y)):
        out[t] = state.update(float(y[t]))
    return out


def detect_convergence(
    series,
    threshold: float = 1e-3,
    patience: int = 100,
    alpha: float = 0.1,
    beta: float = 0.05,
) -> ConvergenceVerdict:
    """First step at which the normalized trend stays small long enough.

    The trend is normalized by the running maximum of |series| (an all-zero
    prefix normalizes to zero).  Starting from step 1, the detector counts
    consecutive steps with |normalized trend| < threshold and declares
    convergence at the step completing a run of `patience`; a constant
    series therefore converges exactly at step = patience.
    """
    if patience < 1:
        raise ValueError("patience must be at least 1")
    trend = holt_trend(series, alpha, beta)
    magnitude = np.maximum.accumulate(np.abs(np.asarray(series, dtype=float)))
    safe = np.where(magnitude > 0.0, magnitude, 1.0)
    norm = np.where(magnitude > 0.0, np.abs(trend) / safe, 0.0)
    count = 0
    for t in range(1, len(norm)):
        if norm[t] < threshold:
            count += 1
            if count >= patience:
                return ConvergenceVerdict(True, t, threshold, patience)
        else:
            count = 0
    return ConvergenceVerdict(False, None, threshold, patience)


def theil_sen_slope(xs, ys) -> float:
    """Lower median of all pairwise slopes (y_j - y_i) / (x_j - x_i).

    Pairs with equal x are skipped.  Using the lower median (element
    (k-1)//2 of the sorted slopes) keeps the estimate on an actual pairwise
    slope, so a single outlier among a few clean points cannot drag the
    result off the clean value.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("xs and ys must be equal-length 1-d arrays of >= 2 points")
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    i, j = np.triu_indices(len(x), k=1)
    keep = dx[i, j] != 0.0
    if not np.any(keep):
        raise ValueError("xs are all equal; slope undefined")
    slopes = np.sort(dy[i, j][keep] / dx[i, j][keep])
    return float(slopes[(len(slopes) - 1) // 2])


@dataclass(frozen=True)
class SummaryStats:
    """Pointwise mean and 95% confidence halfwidth across runs."""

    mean: np.ndarray
    ci_halfwidth: np.ndarray
    n_runs: int


def summarize(runs) -> SummaryStats:
    """Mean series and 95% t-interval halfwidths over repeated runs.

    ``runs`` is an (n_runs, n_steps) array-like; all runs must have equal
    length.  A single run yields zero halfwidths.
    """
    arr = np.asarray(runs, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("runs must be a non-empty 2-d array of equal-length series")
    n = arr.shape[0]
    mean = arr.mean(axis=0)
    if n == 1:
        return SummaryStats(mean, np.zeros_like(mean), 1)
    sem = arr.std(axis=0, ddof=1) / np.sqrt(n)
    halfwidth = float(stats.t.ppf(0.975, n - 1)) * sem
    return SummaryStats(mean, halfwidth, n)


def station_cdf(rates_by_station: dict[int, float]) -> tuple[tuple[int, float, float], ...]:
    """Empirical CDF points (station, rate, quantile), sorted by rate.

    Quantiles are i/n for i = 1..n, so the last point always sits at 1.
    """
    if not rates_by_station:
        return ()
    ordered = sorted(rates_by_station.items(), key=lambda kv: (kv[1], kv[0]))
    n = len(ordered)
    return tuple((s, float(r), (i + 1) / n) for i, (s, r) in enumerate(ordered))
