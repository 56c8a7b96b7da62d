"""Figure rendering for the analyze path.

Everything here draws to files through the Agg backend; no display is
assumed. Figures are companions to the delimited outputs, not the data
of record, so layout choices stay simple.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import BitStream
from .simulate import IQTrace, PhaseSeries
from .vonmises import VonMisesModel, pdf

__all__ = [
    "save_histogram_figure",
    "save_autocorrelation_figure",
    "save_iq_figure",
    "save_walk_figure",
]

_DPI = 130


def save_histogram_figure(
    path: str | Path,
    stream: BitStream,
    model: VonMisesModel | None = None,
) -> Path:
    """Symbol histogram with the uniform level and an optional fit overlay."""
    path = Path(path)
    n_bins = 1 << stream.bits_per_sample
    counts = np.bincount(stream.symbols, minlength=n_bins).astype(float)
    total = counts.sum()
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.stairs(counts, np.arange(n_bins + 1) - 0.5, fill=True, alpha=0.7, label="observed")
    ax.axhline(total / n_bins, color="k", lw=1.0, ls="--", label="uniform")
    if model is not None and total > 0:
        centers = -math.pi + (np.arange(n_bins) + 0.5) * (2 * math.pi / n_bins)
        expected = pdf(centers, model) * (2 * math.pi / n_bins) * total
        ax.plot(np.arange(n_bins), expected, color="C3", lw=1.2,
                label=f"von Mises fit (kappa={model.kappa:.3g})")
    ax.set_xlabel(f"symbol ({stream.bits_per_sample}-bit)")
    ax.set_ylabel("count")
    ax.set_xlim(-0.5, n_bins - 0.5)
    ax.legend(loc="lower center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_autocorrelation_figure(
    path: str | Path,
    lags: np.ndarray,
    coefficients: np.ndarray,
    n_samples: int,
) -> Path:
    """Autocorrelation stem plot with the 3 sigma independence band."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    markerline, stemlines, _ = ax.stem(lags, coefficients)
    plt.setp(markerline, markersize=3)
    plt.setp(stemlines, linewidth=0.8)
    band = 3.0 / math.sqrt(n_samples)
    ax.axhspan(-band, band, color="0.85", zorder=0, label="3 sigma band")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("lag (samples)")
    ax.set_ylabel("autocorrelation")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_iq_figure(path: str | Path, trace: IQTrace, max_points: int = 5000) -> Path:
    """Quadrature scatter; long traces are thinned, not truncated."""
    path = Path(path)
    step = max(1, len(trace) // max_points)
    i = trace.i_units()[::step]
    q = trace.q_units()[::step]
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    ax.plot(i, q, ".", markersize=2, alpha=0.4)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.axvline(0.0, color="k", lw=0.5)
    ax.set_xlabel("I (detector units)")
    ax.set_ylabel("Q (detector units)")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_walk_figure(path: str | Path, series: PhaseSeries, max_points: int = 20000) -> Path:
    path = Path(path)
    step = max(1, len(series) // max_points)
    t = series.times()[::step]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(t * 1e6, series.values[::step], lw=0.7)
    ax.set_xlabel("time (us)")
    ax.set_ylabel("phase (rad)")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
