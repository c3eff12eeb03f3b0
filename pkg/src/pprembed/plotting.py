"""Figure rendering for evaluation and benchmark reports.

Figures are written next to the JSON report with the same stem. Rendering
uses the Agg backend and strips the writer metadata so repeated runs with
identical inputs produce byte-identical PNGs.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_RC = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.alpha": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "pprembed",
}

_BAR_COLOR = "#3b6ea5"
_ACCENT = "#c44e52"


def figure_path(report_path: str | os.PathLike) -> str:
    root, _ = os.path.splitext(os.fspath(report_path))
    return root + ".png"


def _save(fig, path: str | os.PathLike) -> None:
    fig.savefig(path, metadata={"Software": None}, bbox_inches="tight")
    plt.close(fig)


def save_link_prediction_figure(report: dict, path: str | os.PathLike) -> None:
    """Mean test ROC-AUC per strategy with 90% confidence error bars."""
    strategies = list(report["strategies"])
    means = [report["strategies"][s]["test_auc"]["mean"] for s in strategies]
    errs = [report["strategies"][s]["test_auc"]["half_width_90"] for s in strategies]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        x = range(len(strategies))
        ax.bar(x, means, yerr=errs, capsize=3, color=_BAR_COLOR)
        ax.set_xticks(list(x), strategies)
        ax.set_ylim(0.0, 1.05)
        ax.axhline(0.5, color=_ACCENT, linestyle="--", linewidth=1,
                   label="chance")
        best = report["best_on_validation"]["strategy"]
        ax.set_title(f"link prediction ROC-AUC (best on validation: {best})")
        ax.set_ylabel("test ROC-AUC")
        ax.legend(loc="lower right")
        _save(fig, path)


def save_classification_figure(report: dict, path: str | os.PathLike) -> None:
    """Micro/macro F1 means with per-repeat points."""
    micro = report["micro_f1"]
    macro = report["macro_f1"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.bar(
            [0, 1],
            [micro["mean"], macro["mean"]],
            yerr=[micro["half_width_90"], macro["half_width_90"]],
            capsize=3,
            color=_BAR_COLOR,
            width=0.5,
        )
        for i, summary in enumerate((micro, macro)):
            values = summary["values"]
            ax.plot([i] * len(values), values, "o", color=_ACCENT, markersize=3,
                    zorder=3)
        ax.set_xticks([0, 1], ["micro F1", "macro F1"])
        ax.set_ylim(0.0, 1.05)
        frac = report["config"]["train_frac"]
        ax.set_title(f"classification at {frac:.0%} training labels")
        _save(fig, path)


def save_bench_figure(report: dict, path: str | os.PathLike) -> None:
    """Per-node embedding wall-time distribution and touched-node counts."""
    samples = report["samples"]
    wall_ms = [s["wall_ns"] / 1e6 for s in samples]
    touched = [s["nodes_touched"] for s in samples]
    bound = report["summary"]["locality_bound_nodes"]
    with plt.rc_context(_RC):
        fig, (ax_time, ax_touch) = plt.subplots(1, 2, figsize=(8.0, 3.2))
        ax_time.hist(wall_ms, bins=min(30, max(5, len(wall_ms) // 3)),
                     color=_BAR_COLOR)
        ax_time.axvline(report["summary"]["wall_ns_median"] / 1e6,
                        color=_ACCENT, linestyle="--", linewidth=1,
                        label="median")
        ax_time.set_xlabel("per-node wall time (ms)")
        ax_time.set_ylabel("count")
        ax_time.legend()
        ax_touch.hist(touched, bins=min(30, max(5, len(touched) // 3)),
                      color=_BAR_COLOR)
        ax_touch.axvline(bound, color=_ACCENT, linestyle="--", linewidth=1,
                         label="2/((1-a)e)")
        ax_touch.set_xlabel("nodes touched")
        ax_touch.legend()
        fig.suptitle("per-node embedding cost")
        _save(fig, path)
