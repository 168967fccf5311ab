"""Figure rendering for experiment reports (headless, file output only)."""

from __future__ import annotations

from matplotlib.figure import Figure

from .experiment import ExperimentResult


def render_experiment_figure(result: ExperimentResult, path: str) -> None:
    """Plot success rate and joint-degree deviation against attack strength."""
    values = [pt.attack_value for pt in result.points]
    success = [pt.success_rate for pt in result.points]
    deviation = [pt.mean_dk2_deviation for pt in result.points]

    fig = Figure(figsize=(7.0, 4.5))
    ax = fig.subplots()
    ax.plot(values, success, marker="o", color="tab:blue", label="success rate")
    ax.set_xlabel(_axis_label(result.config.attack))
    ax.set_ylabel("identification success rate")
    ax.set_ylim(-0.05, 1.05)
    if len(values) > 1 and min(values) > 0 and max(values) / min(values) >= 100:
        ax.set_xscale("log")
    ax.grid(True, which="both", alpha=0.3)

    ax2 = ax.twinx()
    ax2.plot(values, deviation, marker="s", linestyle="--", color="tab:red",
             label="dK-2 deviation")
    ax2.set_ylabel("mean dK-2 deviation")

    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="center left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def _axis_label(attack: str) -> str:
    kind = attack.partition(":")[0]
    if kind == "random":
        return "per-pair flip probability"
    if kind == "none":
        return "attack strength (none)"
    return "fraction of potential edges flipped"
