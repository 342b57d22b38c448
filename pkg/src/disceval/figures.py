"""Matplotlib rendering of report contents to image files.

Every function takes an already-computed report structure and writes one PNG
next to the delimited/JSON output; nothing here recomputes numbers.  Rendering
is optional at the CLI (--figures) and kept out of the analysis core.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _bar(ax, labels: Sequence[str], values: Sequence[float], title: str, ylabel: str) -> None:
    ax.bar(range(len(labels)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.grid(axis="y", alpha=0.3)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def segment_correlation_figure(report: dict, path: Path) -> Path:
    """Bar chart of segment-level tau per metric (first tie policy found)."""
    metrics, values = [], []
    for name, entry in sorted(report["metrics"].items()):
        seg = entry.get("segment_level") or {}
        for policy in sorted(seg):
            metrics.append(f"{name} [{policy}]" if len(seg) > 1 else name)
            values.append(seg[policy]["overall"])
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(metrics) + 2), 4.0))
    _bar(ax, metrics, values, "Segment-level Kendall tau", "tau")
    return _save(fig, path)


def system_correlation_figure(report: dict, path: Path) -> Path:
    metrics, spearmans, pearsons = [], [], []
    for name, entry in sorted(report["metrics"].items()):
        sys_level = entry.get("system_level") or {}
        if not sys_level:
            continue
        metrics.append(name)
        spearmans.append(sys_level.get("spearman", {}).get("overall", float("nan")))
        pearsons.append(sys_level.get("pearson", {}).get("overall", float("nan")))
    fig, ax = plt.subplots(figsize=(max(4.0, 0.8 * len(metrics) + 2), 4.0))
    x = range(len(metrics))
    width = 0.38
    ax.bar([i - width / 2 for i in x], spearmans, width, label="Spearman", color="#4878a8")
    ax.bar([i + width / 2 for i in x], pearsons, width, label="Pearson", color="#d1605e")
    ax.set_xticks(list(x))
    ax.set_xticklabels(metrics, rotation=60, ha="right", fontsize=8)
    ax.set_title("System-level correlation")
    ax.set_ylabel("correlation")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def depth_distribution_figure(dd: dict, path: Path) -> Path:
    depths = sorted(int(k) for k in dd["proportions"])
    props = [dd["proportions"][str(d)] for d in depths]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(depths, props, marker="o", color="#4878a8")
    ax.set_xlabel("Depth of discourse tree")
    ax.set_ylabel("Proportion of sentences")
    ax.set_title(
        f"Tree depth (avg {dd['depth']['avg']:.2f}, EDUs avg {dd['edus']['avg']:.2f})"
    )
    ax.grid(alpha=0.3)
    return _save(fig, path)


def ablation_figure(ablation: dict, path: Path) -> Path:
    variants = list(ablation)
    spearmans = [ablation[v]["spearman"] for v in variants]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(variants) + 2), 4.0))
    _bar(ax, variants, spearmans, "Ablation: system-level Spearman", "rho")
    return _save(fig, path)


def label_distribution_figure(cohorts: dict, path: Path) -> Path:
    """Gold vs good vs bad relation-frequency bars over the top relations."""
    labels = cohorts["top_relations"]
    series = {
        "gold": cohorts["gold"]["relation_distribution"],
        "good": cohorts["cohorts"]["good"]["relation_distribution"],
        "bad": cohorts["cohorts"]["bad"]["relation_distribution"],
    }
    fig, ax = plt.subplots(figsize=(max(5.0, 1.2 * len(labels) + 2), 4.0))
    width = 0.26
    colors = {"gold": "#6aa84f", "good": "#4878a8", "bad": "#d1605e"}
    for offset, (name, dist) in enumerate(series.items()):
        xs = [i + (offset - 1) * width for i in range(len(labels))]
        ax.bar(xs, [dist.get(l, 0.0) for l in labels], width, label=name, color=colors[name])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=40, ha="right", fontsize=8)
    ax.set_ylabel("proportion")
    ax.set_title("Relation label distributions")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def cohort_f1_figure(cohorts: dict, path: Path) -> Path:
    labels = cohorts["top_relations"] + ["Nucleus", "Satellite", "EDU"]

    def values(cohort: dict) -> list[float]:
        vals = [cohort["relation_f1"].get(l, {}).get("f1", 0.0) for l in cohorts["top_relations"]]
        vals.append(cohort["nuclearity_f1"].get("Nucleus", {}).get("f1", 0.0))
        vals.append(cohort["nuclearity_f1"].get("Satellite", {}).get("f1", 0.0))
        vals.append(cohort["edu_f1"]["f1"])
        return vals

    fig, ax = plt.subplots(figsize=(max(5.0, 1.0 * len(labels) + 2), 4.0))
    width = 0.38
    for offset, name, color in ((-0.5, "good", "#4878a8"), (0.5, "bad", "#d1605e")):
        xs = [i + offset * width for i in range(len(labels))]
        ax.bar(xs, values(cohorts["cohorts"][name]), width, label=name, color=color)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=40, ha="right", fontsize=8)
    ax.set_ylabel("simplified F1")
    ax.set_title("Good vs bad cohorts against gold trees")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def model_weights_figure(model_payload: dict, path: Path) -> Path:
    metrics = model_payload["metrics"]
    weights = [abs(w) for w in model_payload["weights"]]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(metrics) + 2), 4.0))
    _bar(ax, metrics, weights, "Absolute combination weights", "|weight|")
    return _save(fig, path)
