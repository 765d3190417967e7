"""Render report figures to files next to the delimited output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus_model import AlignmentType
from .eval_alignment import AlignmentEvalReport
from .metrics_stats import CorpusStatsTable, MetricReport


def save_alignment_type_figure(table: CorpusStatsTable, path: str | Path) -> Path:
    """Bar chart of alignment-type counts."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labels = [alignment_type.value for alignment_type in AlignmentType]
    counts = [table.type_counts.get(alignment_type, 0) for alignment_type in AlignmentType]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(labels, counts, color="#4878a8")
    ax.set_ylabel("records")
    ax.set_title("Alignment types")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_eval_figure(
    reports: Sequence[AlignmentEvalReport], path: str | Path
) -> Path:
    """Grouped bars of precision, recall, F1, and F-beta per subset."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics = ("precision", "recall", "f1", "f_beta")
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    width = 0.8 / max(len(reports), 1)
    for offset, report in enumerate(reports):
        values = [getattr(report, name) for name in metrics]
        positions = [i + offset * width for i in range(len(metrics))]
        ax.bar(positions, values, width=width, label=f"subset={report.subset}")
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(metrics))])
    ax.set_xticklabels(metrics)
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title("Alignment evaluation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_metric_figure(
    rows: Sequence[tuple[str, MetricReport]], path: str | Path
) -> Path:
    """SARI/BLEU bars plus a reading-ease panel per system."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    systems = [name for name, _ in rows]
    fig, (left, right) = plt.subplots(1, 2, figsize=(8, 3.5))
    width = 0.35
    positions = range(len(systems))
    left.bar(
        [p - width / 2 for p in positions],
        [report.sari for _, report in rows],
        width=width,
        label="SARI",
    )
    left.bar(
        [p + width / 2 for p in positions],
        [report.bleu for _, report in rows],
        width=width,
        label="BLEU",
    )
    left.set_xticks(list(positions))
    left.set_xticklabels(systems, rotation=20)
    left.set_ylim(0, 105)
    left.legend(fontsize=8)
    left.set_title("SARI / BLEU")
    right.bar(list(positions), [report.fre for _, report in rows], color="#70ad70")
    right.set_xticks(list(positions))
    right.set_xticklabels(systems, rotation=20)
    right.set_title("Reading ease")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
