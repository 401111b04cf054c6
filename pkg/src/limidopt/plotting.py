"""Figure rendering for benchmark and per-prior reports.

Figures are written straight to files (Agg backend, no display) so the
CLI can drop them next to its delimited outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_ACTION_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd")


def render_bench_figure(rows: list[dict], out_path: str) -> None:
    """Two-panel summary of a benchmark run.

    Left: heuristic vs exact expected utility per instance (when the
    exact value is available). Right: improving moves per instance.
    """
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    indices = [row["instance"] for row in rows]
    spu = [row["spu_eu"] for row in rows]
    brute = [row["brute_eu"] for row in rows]
    left.plot(indices, spu, "o", label="heuristic", markersize=4)
    if any(b is not None for b in brute):
        left.plot(
            [i for i, b in zip(indices, brute) if b is not None],
            [b for b in brute if b is not None],
            "k_",
            label="exact",
            markersize=9,
        )
    left.set_xlabel("instance")
    left.set_ylabel("expected utility")
    left.legend(frameon=False)
    left.set_title("solution quality")

    right.bar(indices, [row["spu_moves"] for row in rows], color="#777777")
    right.set_xlabel("instance")
    right.set_ylabel("improving moves")
    right.set_title("heuristic effort")

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_per_prior_figure(report, out_path: str) -> None:
    """Chosen first action per risk level, as a colored band plus EU curve."""
    rows = report.rows
    actions = sorted({row.first_action for row in rows})
    color_of = {a: _ACTION_COLORS[i % len(_ACTION_COLORS)] for i, a in enumerate(actions)}
    risks = np.asarray([row.risk for row in rows])
    width = risks[1] - risks[0] if len(risks) > 1 else 1.0

    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(8, 5), sharex=True, height_ratios=[1, 2]
    )
    for row in rows:
        top.barh(
            0,
            width,
            left=row.risk - width / 2,
            color=color_of[row.first_action],
            edgecolor="white",
        )
    top.set_yticks([])
    top.set_title("first action by prior risk level")
    handles = [plt.Rectangle((0, 0), 1, 1, color=color_of[a]) for a in actions]
    top.legend(handles, actions, loc="upper left", frameon=False, ncol=len(actions))

    bottom.plot(risks, [row.expected_utility for row in rows], "o-", color="#444444")
    bottom.set_xlabel("prior risk")
    bottom.set_ylabel("expected utility")

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
