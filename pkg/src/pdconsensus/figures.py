"""Render run reports to PNG files next to the delimited output."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["render_progress", "render_energy", "render_deviation"]


def _semilogy(ax, xs, ys, label, **kw):
    pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y) and y > 0]
    if not pairs:
        return False
    px, py = zip(*pairs)
    ax.semilogy(px, py, label=label, **kw)
    return True


def render_progress(metrics, path, title: str = "") -> None:
    """Best-so-far stationarity metric against rounds, oracle queries, and
    variables communicated.  `metrics` rows are (k, P, queries, scalars)."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    names = ("communication rounds", "oracle queries", "variables communicated")
    for ax, col, name in zip(axes, (0, 2, 3), names):
        xs = [row[col] for row in metrics]
        ys = [row[1] for row in metrics]
        _semilogy(ax, xs, ys, "best so far")
        ax.set_xlabel(name)
        ax.grid(True, which="both", alpha=0.3)
    axes[0].set_ylabel("stationarity + consensus")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_energy(records, path, title: str = "") -> None:
    """Energy, its sandwich companion, the consensus error, and (when
    present) the linear-rate envelope on one log axis."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ks = [r.k for r in records]
    drew = False
    drew |= _semilogy(ax, ks, [r.V for r in records], "energy")
    drew |= _semilogy(ax, ks, [r.V_hat for r in records], "energy (hat)")
    drew |= _semilogy(ax, ks, [r.consensus_sq for r in records],
                      "consensus error")
    drew |= _semilogy(ax, ks, [r.envelope for r in records], "envelope",
                      linestyle="--")
    if drew:
        ax.legend(loc="best")
    else:
        ax.text(0.5, 0.5, "no positive series to plot",
                ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("communication rounds")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_deviation(rows, path, title: str = "") -> None:
    """Per-round max deviation between two trajectories.
    `rows` are (k, max_abs, relative)."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ks = [r[0] for r in rows]
    drew = _semilogy(ax, ks, [r[1] for r in rows], "max abs deviation")
    drew |= _semilogy(ax, ks, [r[2] for r in rows], "relative deviation")
    if drew:
        ax.legend(loc="best")
    else:
        ax.text(0.5, 0.5, "trajectories identical", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("communication rounds")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
