"""Optional PNG figures next to the CSV output (needs the ``plot`` extra)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


class PlottingUnavailable(RuntimeError):
    pass


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise PlottingUnavailable("figures need matplotlib (install the 'plot' extra)") from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_paths(file: Path, paths: Sequence, title: str, ylabel: str) -> Path:
    """Overlay of two-sided grid paths (anything with ``arrays()``)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, p in enumerate(paths):
        t, v = p.arrays()
        ax.plot(t, v, lw=0.8, label=f"#{k}")
    ax.axvline(0.0, color="grey", lw=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(paths) <= 10:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(file, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(file)


def plot_fields(file: Path, t_grid, etas, title: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, eta in enumerate(etas):
        ax.plot(t_grid, eta, marker="o", ms=3, lw=0.8, label=f"field {k}")
    ax.set_xlabel("t")
    ax.set_ylabel("eta(t)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(file, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(file)


def plot_curve(file: Path, x, ys: dict, title: str, xlabel: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, label=label)
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(file, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(file)
