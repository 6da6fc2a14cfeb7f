"""Figures written next to the delimited reports."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

NULL_COLOR = "#9e9e9e"
INFO_COLOR = "#d62728"
HUMAN_COLOR = "#1f77b4"


def plot_run(result, path) -> None:
    """Belief size along the joint plan, and solo versus assisted human cost."""
    trace, m = result.trace, result.metrics
    fig, (ax_b, ax_c) = plt.subplots(1, 2, figsize=(10, 3.8), gridspec_kw={"width_ratios": [3, 1]})

    steps = [0] + [s["step"] for s in trace["robot"]] + [s["step"] for s in trace["human"]]
    sizes = [trace["initial_belief_size"]] + [s["belief_size"] for s in trace["robot"]] \
        + [s["belief_size"] for s in trace["human"]]
    ax_b.step(steps, sizes, where="post", color="black", lw=1)
    for s in trace["robot"]:
        ax_b.plot(s["step"], s["belief_size"], "o", color=NULL_COLOR if s["null"] else INFO_COLOR)
    for s in trace["human"]:
        ax_b.plot(s["step"], s["belief_size"], "s", color=HUMAN_COLOR)
    if trace["robot"]:
        ax_b.axvline(len(trace["robot"]) + 0.5, ls=":", color="black", lw=0.8)
    labels = [s["action"] for s in trace["robot"]] + [s["action"] for s in trace["human"]]
    ax_b.set_xticks(steps[1:])
    ax_b.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax_b.set_ylabel("states in human belief")
    ax_b.set_title(f"{m.problem}: {m.status}", fontsize=10)
    ax_b.set_ylim(bottom=0)

    names, values, colors = ["solo"], [float(m.solo_cost or 0)], [NULL_COLOR]
    if m.feasible:
        names.append("assisted")
        values.append(float(m.joint_human_cost))
        colors.append(HUMAN_COLOR)
    ax_c.bar(names, values, color=colors)
    ax_c.set_ylabel("human cost")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(results, path) -> None:
    """Objective, prefix length and human cost against alpha."""
    rows = sorted(results, key=lambda r: r.metrics.alpha)
    alphas = [float(r.metrics.alpha) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    series = {
        "objective": [r.metrics.objective for r in rows],
        "robot steps k": [r.metrics.k for r in rows],
        "human cost": [r.metrics.joint_human_cost for r in rows],
    }
    for (label, ys), marker in zip(series.items(), "os^"):
        pts = [(a, float(y)) for a, y in zip(alphas, ys) if y is not None]
        if pts:
            ax.plot(*zip(*pts), marker=marker, label=label)
    solo = rows[0].metrics.solo_cost if rows else None
    if solo is not None:
        ax.axhline(float(solo), ls="--", color=NULL_COLOR, lw=1, label="solo human cost")
    ax.set_xlabel("alpha")
    ax.set_title(rows[0].metrics.problem if rows else "", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
