"""SVG figures of phase-transition summaries.

Figures are written with the non-interactive Agg backend, a fixed
``svg.hashsalt`` and no date metadata so reruns yield identical bytes.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, List, Optional

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from src.reporting import config  # noqa: E402
from src.reporting.aggregator import series_by_p  # noqa: E402
from src.reporting.models import METRICS, MetricSummary  # noqa: E402

logger = logging.getLogger(__name__)

__all__ = ["plot_metric", "plot_phase", "save"]

_RC = {
    "figure.figsize": (config.PLOT_WIDTH, config.PLOT_HEIGHT),
    "font.size": config.PLOT_FONT_SIZE,
    "axes.labelsize": config.PLOT_FONT_SIZE,
    "legend.fontsize": config.PLOT_FONT_SIZE - 2,
    "xtick.labelsize": config.PLOT_FONT_SIZE - 2,
    "ytick.labelsize": config.PLOT_FONT_SIZE - 2,
    "svg.hashsalt": config.SVG_HASH_SALT,
    "svg.fonttype": "path",
    "path.simplify": False,
}

_LINESTYLES = ("-", "--", ":", "-.")
_MARKERS = ("o", "s", "^", "D", "v")


def _style(index: int) -> dict:
    return {
        "linestyle": _LINESTYLES[index % len(_LINESTYLES)],
        "marker": _MARKERS[index % len(_MARKERS)],
        "markersize": 4,
    }


def save(fig: plt.Figure, path: str | Path, *, identifier: Optional[str] = None) -> Path:
    """Write *fig* as SVG and close it; *identifier* goes into the SVG metadata."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, format="svg", metadata={"Date": None, "Identifier": identifier})
    plt.close(fig)
    logger.debug("Saved figure %s", target)
    return target


def _finish(ax: plt.Axes, title: str) -> None:
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("T (observations per subject and variable)")
    ax.set_title(title)
    ax.legend(loc="best", frameon=False)


def plot_metric(
    summaries: Iterable[MetricSummary],
    metric: str,
    path: str | Path,
    *,
    identifier: Optional[str] = None,
) -> Path:
    """One metric against ``T``, one series per ``p``."""
    items = list(summaries)
    with mpl.rc_context(_RC):
        fig, ax = plt.subplots()
        for index, (p, (ts, means)) in enumerate(series_by_p(items, metric).items()):
            ax.plot(ts, means, color="black", label=f"p={p}", **_style(index))
        ax.set_ylabel(metric)
        _finish(ax, metric)
        return save(fig, path, identifier=identifier)


def plot_phase(
    summaries: Iterable[MetricSummary], path: str | Path, *, identifier: Optional[str] = None
) -> Path:
    """Max (black) and Ave (red) MISE against ``T``, line style per ``p``.

    Mean curves go in the left panel, covariance surfaces in the right.
    """
    items = list(summaries)
    colours = {"Max": "black", "Ave": "red"}
    with mpl.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(2 * config.PLOT_WIDTH, config.PLOT_HEIGHT))
        for ax, target in zip(axes, ("mu", "sigma")):
            metrics: List[str] = [m for m in METRICS if m.endswith(f"_{target}")]
            for metric in metrics:
                kind = metric[:3]
                for index, (p, (ts, means)) in enumerate(series_by_p(items, metric).items()):
                    ax.plot(ts, means, color=colours[kind], label=f"{kind} p={p}", **_style(index))
            ax.set_ylabel("MISE")
            _finish(ax, "mean" if target == "mu" else "covariance")
        fig.tight_layout()
        return save(fig, path, identifier=identifier)
