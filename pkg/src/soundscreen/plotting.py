"""Figure rendering for CLI reports.

Every report-producing subcommand writes a PNG next to its text/JSON
output. Rendering is headless (Agg) so it works without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt

from .evaluation import EvaluationReport, HarmfulRateReport


def save_scan_figure(report: HarmfulRateReport, path) -> None:
    """Per-clip decision values over time, with the verdict in the title."""
    offsets = [d.offset_s for d in report.clip_decisions]
    values = [d.decision_value for d in report.clip_decisions]
    colors = ["firebrick" if d.predicted == 1 else "steelblue" for d in report.clip_decisions]
    width = 0.8 * (offsets[1] - offsets[0]) if len(offsets) > 1 else 8.0
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.bar(offsets, values, width=width, align="edge", color=colors)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("clip offset (s)")
    ax.set_ylabel("decision value")
    ax.set_title(
        f"harmful rate {report.harmful_rate_pct:.1f}% "
        f"(threshold {report.threshold_pct:.0f}%) -> {report.verdict}"
    )
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, path) -> None:
    """F1 heat map over the (quefrency order, temporal order) grid.

    rows: (quefrency_order, temporal_order, f1_or_None) triples.
    """
    q_orders = sorted({r[0] for r in rows})
    t_orders = sorted({r[1] for r in rows})
    grid = np.full((len(q_orders), len(t_orders)), np.nan)
    for q, t, f1 in rows:
        if f1 is not None:
            grid[q_orders.index(q), t_orders.index(t)] = f1
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * len(t_orders), 1.0 + 0.5 * len(q_orders)))
    image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(t_orders)), [str(t) for t in t_orders])
    ax.set_yticks(range(len(q_orders)), [str(q) for q in q_orders])
    ax.set_xlabel("temporal order")
    ax.set_ylabel("quefrency order")
    ax.set_title("F1 (%) by feature orders")
    fig.colorbar(image, ax=ax)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)


def save_category_error_figure(report: EvaluationReport, path) -> None:
    """Horizontal bars of per-category error rates."""
    names = sorted(report.per_category)
    rates = [report.per_category[n].error_rate_pct for n in names]
    fig, ax = plt.subplots(figsize=(6, 0.6 + 0.4 * len(names)))
    ax.barh(names, rates, color="slategray")
    ax.set_xlabel("classification error rate (%)")
    ax.set_xlim(0, 100)
    for i, rate in enumerate(rates):
        ax.text(rate + 1, i, f"{rate:.1f}", va="center", fontsize=8)
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)
