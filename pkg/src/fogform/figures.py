"""Render experiment tables to figure files next to their CSVs.

The CSVs remain the data contract; these plots are a convenience view of
the same rows.  Rendering is headless (Agg backend).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .scenarios import ExperimentTable

__all__ = ["render_figure"]

plt.rcParams.update({
    "figure.figsize": (7.0, 4.4),
    "axes.grid": True,
    "grid.alpha": 0.35,
    "font.size": 10,
})


def _col(table: ExperimentTable, name: str) -> list:
    idx = table.columns.index(name)
    return [row[idx] for row in table.rows]


def _offline_sweep(table: ExperimentTable):
    fig, (ax_cost, ax_share) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    mu_values = sorted(set(_col(table, "mu_ij")))
    for mu in mu_values:
        rows = [r for r in table.rows if r[0] == mu]
        j = [r[1] for r in rows]
        ax_cost.plot(j, [r[2] for r in rows], marker="o", label=f"total cost, link rate {mu:g}")
        ax_cost.plot(j, [r[3] for r in rows], marker="s", linestyle="--",
                     label=f"latency, link rate {mu:g}")
    ax_cost.set_xlabel("neighbors J")
    ax_cost.set_ylabel("seconds")
    ax_cost.legend(fontsize=8)

    rows = [r for r in table.rows if r[0] == mu_values[0]]
    j = [r[1] for r in rows]
    ax_share.stackplot(
        j,
        [r[4] for r in rows],
        [r[6] for r in rows],
        [r[5] for r in rows],
        labels=("local", "neighbors", "cloud"),
        alpha=0.8,
    )
    ax_share.set_xlabel("neighbors J")
    ax_share.set_ylabel(f"task share (link rate {mu_values[0]:g})")
    ax_share.set_ylim(0, 1)
    ax_share.legend(loc="upper right", fontsize=8)
    return fig


def _online_vs_offline(table: ExperimentTable):
    fig, ax = plt.subplots()
    j = _col(table, "J")
    ax.plot(j, _col(table, "online_cost"), marker="o", label="online cost")
    ax.plot(j, _col(table, "offline_cost"), marker="s", label="offline cost")
    ax.plot(j, _col(table, "online_latency"), marker="o", linestyle="--", label="online latency")
    ax.plot(j, _col(table, "offline_latency"), marker="s", linestyle="--", label="offline latency")
    ax.set_xlabel("neighbors J")
    ax.set_ylabel("seconds")
    ax.legend(fontsize=8)
    return fig


def _ratio_cdf(table: ExperimentTable):
    fig, ax = plt.subplots()
    ax.step(_col(table, "ratio"), _col(table, "cdf"), where="post")
    ax.set_xlabel("competitive ratio")
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0, 1.02)
    return fig


def _distance_sweep(table: ExperimentTable):
    fig, ax = plt.subplots()
    ax.plot(_col(table, "distance_m"), [s * 100 for s in _col(table, "share_cloud")], marker="o")
    ax.set_xlabel("base-station distance (m)")
    ax.set_ylabel("cloud task share (%)")
    return fig


def _choose_j(table: ExperimentTable):
    fig, ax = plt.subplots()
    j = _col(table, "J")
    ax.plot(j, _col(table, "total_cost"), marker="o", label="mean total cost")
    chosen = [jj for jj, flag in zip(j, _col(table, "chosen")) if flag]
    if chosen:
        ax.axvline(chosen[0], color="tab:red", linestyle=":", label=f"chosen J = {chosen[0]}")
    ax.set_xlabel("neighbors J")
    ax.set_ylabel("seconds")
    ax.legend(fontsize=8)
    return fig


_RENDERERS = {
    "offline-sweep": _offline_sweep,
    "online-vs-offline": _online_vs_offline,
    "ratio-cdf": _ratio_cdf,
    "distance-sweep": _distance_sweep,
    "choose-j": _choose_j,
}


def render_figure(experiment: str, table: ExperimentTable, out_path: Path) -> Path:
    """Render the experiment's standard figure to ``out_path`` (PNG)."""
    renderer = _RENDERERS.get(experiment)
    if renderer is None:
        raise ValueError(f"no figure renderer for experiment '{experiment}'")
    fig = renderer(table)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
