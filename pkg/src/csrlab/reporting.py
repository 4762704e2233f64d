"""Figure rendering for experiment outputs.

All figures are rendered headlessly to files next to the delimited output;
nothing here opens a window.  Inputs are the summary JSON documents written
by the experiment runner and sweep.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "learning_curve_figure",
    "station_cdf_figure",
    "scalability_figure",
    "render_report",
]


def learning_curve_figure(
    mean,
    ci_halfwidth,
    path: str | Path,
    baselines: dict[str, float] | None = None,
    title: str = "Mean effective rate per TXOP",
) -> Path:
    """Mean learning curve with a shaded 95% confidence band."""
    mean = np.asarray(mean, dtype=float)
    ci = np.asarray(ci_halfwidth, dtype=float)
    steps = np.arange(len(mean))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, mean, lw=1.0, label="mean over repetitions")
    if len(ci) == len(mean):
        ax.fill_between(steps, mean - ci, mean + ci, alpha=0.25, label="95% CI")
    for name, level in (baselines or {}).items():
        ax.axhline(level, ls="--", lw=1.0, label=name)
    ax.set_xlabel("TXOP step")
    ax.set_ylabel("effective rate (Mb/s)")
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def station_cdf_figure(points, path: str | Path) -> Path:
    """Empirical CDF of per-station mean rates."""
    rates = [p[1] for p in points]
    quants = [p[2] for p in points]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.step([0.0] + rates, [0.0] + quants, where="post")
    ax.set_xlabel("station mean rate (Mb/s)")
    ax.set_ylabel("fraction of stations")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Per-station rate CDF")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def scalability_figure(rows, slope: float, path: str | Path) -> Path:
    """Wall time against AP count on log-log axes with the fitted slope."""
    counts = np.array([r[0] for r in rows], dtype=float)
    times = np.array([r[3] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(counts, times, "o", alpha=0.7, label="runs")
    grid = np.linspace(counts.min(), counts.max(), 50)
    anchor = np.median(times[counts == counts.min()])
    ax.loglog(grid, anchor * (grid / counts.min()) ** slope, "-",
              label=f"slope {slope:.2f}")
    ax.set_xlabel("coordinated AP count")
    ax.set_ylabel("solver wall time (s)")
    ax.set_title("Bound-solver scaling")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report(summary_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render every figure supported by the given summary document."""
    summary_path = Path(summary_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = json.loads(summary_path.read_text())
    produced: list[Path] = []
    if "per_step_mean_rate_mbps" in doc:
        produced.append(
            learning_curve_figure(
                doc["per_step_mean_rate_mbps"],
                doc.get("ci_halfwidth_mbps", []),
                out_dir / "learning_curve.png",
            )
        )
        if doc.get("station_cdf"):
            produced.append(
                station_cdf_figure(doc["station_cdf"], out_dir / "station_cdf.png")
            )
    if "log_log_slope" in doc:
        produced.append(
            scalability_figure(
                doc["rows"], doc["log_log_slope"], out_dir / "scalability.png"
            )
        )
    if not produced:
        raise ValueError(f"{summary_path}: no renderable content found")
    return produced
