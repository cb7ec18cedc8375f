"""Report rendering: JSON, delimited tables, and figures.

The evaluate and ablate stages emit the same material three ways: a
nested ``report.json`` for machines, a TSV plus aligned plain-text table
for eyeballing, and PNG bar charts rendered with matplotlib.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from tdmine.evaluation import EvalReport
from tdmine.manifest import atomic_write_bytes

METRIC_COLUMNS = ("macro_p", "macro_r", "macro_f1", "micro_p", "micro_r", "micro_f1")
METRIC_HEADERS = ("Macro P", "Macro R", "Macro F1", "Micro P", "Micro R", "Micro F1")


def report_tree_to_dict(tree: Mapping[str, Mapping[str, EvalReport]]) -> dict:
    """Nested {setting: {granularity: report}} to plain dicts."""
    return {
        setting: {gran: report.to_dict() for gran, report in cells.items()}
        for setting, cells in tree.items()
    }


def format_metric_table(rows: Sequence[tuple[str, EvalReport]], title: str = "") -> str:
    """Aligned text table with one row per report."""
    label_width = max([len(r[0]) for r in rows] + [len("rows")]) + 2
    lines = []
    if title:
        lines.append(title)
    header = "".join(h.rjust(10) for h in METRIC_HEADERS)
    lines.append(" " * label_width + header)
    for label, report in rows:
        values = report.metrics()
        cells = "".join(f"{values[c]:10.4f}" for c in METRIC_COLUMNS)
        lines.append(label.ljust(label_width) + cells)
    return "\n".join(lines)


def format_report_tree(tree: Mapping[str, Mapping[str, EvalReport]]) -> str:
    """One block per setting, one row per granularity."""
    blocks = []
    for setting, cells in tree.items():
        rows = [(gran, report) for gran, report in cells.items()]
        blocks.append(format_metric_table(rows, title=f"[{setting}]"))
    return "\n\n".join(blocks) + "\n"


def write_tsv(rows: Sequence[tuple[str, EvalReport]], path: Path, label_header: str = "row") -> None:
    """Delimited output, one line per report."""
    lines = ["\t".join([label_header, "setting", "granularity", *METRIC_COLUMNS])]
    for label, report in rows:
        values = report.metrics()
        lines.append(
            "\t".join(
                [label, report.setting.value, report.granularity.value]
                + [f"{values[c]:.4f}" for c in METRIC_COLUMNS]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def tree_rows(tree: Mapping[str, Mapping[str, EvalReport]]) -> list[tuple[str, EvalReport]]:
    return [
        (f"{setting}/{gran}", report)
        for setting, cells in tree.items()
        for gran, report in cells.items()
    ]


def render_report_figure(
    tree: Mapping[str, Mapping[str, EvalReport]], path: Path, title: str = "Evaluation"
) -> None:
    """Grouped bar chart per setting: six metric bars per granularity."""
    settings = list(tree)
    fig, axes = plt.subplots(
        1, len(settings), figsize=(6.5 * len(settings), 4.2), squeeze=False
    )
    for ax, setting in zip(axes[0], settings):
        cells = tree[setting]
        grans = list(cells)
        width = 0.8 / len(METRIC_COLUMNS)
        for i, (column, header) in enumerate(zip(METRIC_COLUMNS, METRIC_HEADERS)):
            xs = [j + i * width for j in range(len(grans))]
            ys = [cells[g].metrics()[column] for g in grans]
            ax.bar(xs, ys, width=width, label=header)
        ax.set_xticks([j + 0.4 - width / 2 for j in range(len(grans))])
        ax.set_xticklabels(grans)
        ax.set_ylim(0.0, 1.05)
        ax.set_title(f"{title} ({setting})")
        ax.legend(fontsize=7, ncol=2)
    _save_figure(fig, path)


def render_ablation_figure(rows: Sequence[tuple[str, EvalReport]], path: Path) -> None:
    """Macro/micro F1 per feature-part configuration."""
    labels = [label for label, _ in rows]
    macro = [report.macro_f1 for _, report in rows]
    micro = [report.micro_f1 for _, report in rows]
    xs = range(len(labels))
    fig, ax = plt.subplots(figsize=(1.8 * len(labels) + 3, 4.2))
    ax.bar([x - 0.18 for x in xs], macro, width=0.36, label="Macro F1")
    ax.bar([x + 0.18 for x in xs], micro, width=0.36, label="Micro F1")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=15, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Context-part ablation")
    ax.legend()
    _save_figure(fig, path)


def _save_figure(fig, path: Path) -> None:
    fig.tight_layout()
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=120)
    plt.close(fig)
    atomic_write_bytes(path, buffer.getvalue())
