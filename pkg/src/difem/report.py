"""Rendering of evaluation results: text tables, delimited files, figures.

Report writers emit three artifacts side by side: a human-readable text
table, a machine-readable CSV (raw fractions, 9 significant digits), and
PNG figures (confusion-matrix heatmap, and per-fold accuracies for
cross-validation runs).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import ConfusionMatrix, CvReport, EvaluationReport
from .pose import CLASS_LABELS

REPORT_CSV_HEADER = ("fold", "class", "precision", "recall", "f1", "accuracy", "tn", "fp", "fn", "tp")


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def _sig(x: float) -> str:
    return f"{x:.9g}"


def _confusion_lines(cm: ConfusionMatrix) -> list[str]:
    width = max(len(label) for label in CLASS_LABELS) + 2
    cell = max(len(str(v)) for v in (cm.tn, cm.fp, cm.fn, cm.tp)) + 6
    lines = ["confusion matrix (rows: truth, columns: prediction)"]
    header = " " * width + "".join(label.rjust(cell) for label in CLASS_LABELS)
    lines.append(header)
    lines.append(CLASS_LABELS[0].ljust(width) + str(cm.tn).rjust(cell) + str(cm.fp).rjust(cell))
    lines.append(CLASS_LABELS[1].ljust(width) + str(cm.fn).rjust(cell) + str(cm.tp).rjust(cell))
    return lines


def _class_table_lines(report: EvaluationReport) -> list[str]:
    lines = [f"{'class':<10}{'precision':>12}{'recall':>12}{'f1-score':>12}"]
    for label in CLASS_LABELS:
        m = report.per_class[label]
        lines.append(f"{label:<10}{_pct(m.precision):>12}{_pct(m.recall):>12}{_pct(m.f1):>12}")
    return lines


def format_report(report: EvaluationReport, title: str = "evaluation") -> str:
    lines = [title, "=" * len(title), ""]
    lines.append(f"samples:  {report.confusion.total}")
    lines.append(f"accuracy: {_pct(report.accuracy)}")
    lines.append("")
    lines.extend(_confusion_lines(report.confusion))
    lines.append("")
    lines.extend(_class_table_lines(report))
    return "\n".join(lines) + "\n"


def format_cv_report(cv: CvReport, title: str = "cross-validation") -> str:
    head = f"{title} ({cv.k} folds)"
    lines = [head, "=" * len(head), ""]
    lines.append("averaged over folds (metrics are fold means; confusion counts are summed)")
    lines.append(f"accuracy: {_pct(cv.averaged.accuracy)}")
    lines.append("")
    lines.extend(_confusion_lines(cv.averaged.confusion))
    lines.append("")
    lines.extend(_class_table_lines(cv.averaged))
    lines.append("")
    lines.append("per-fold results")
    lines.append("-" * len("per-fold results"))
    for i, rep in enumerate(cv.per_fold, start=1):
        lines.append("")
        lines.append(f"fold {i}: accuracy {_pct(rep.accuracy)} over {rep.confusion.total} samples")
        lines.extend(_confusion_lines(rep.confusion))
        lines.extend(_class_table_lines(rep))
    return "\n".join(lines) + "\n"


def _report_rows(fold_tag: str, report: EvaluationReport) -> list[tuple]:
    cm = report.confusion
    rows = [(fold_tag, "", "", "", "", _sig(report.accuracy), cm.tn, cm.fp, cm.fn, cm.tp)]
    for label in CLASS_LABELS:
        m = report.per_class[label]
        rows.append(
            (fold_tag, label, _sig(m.precision), _sig(m.recall), _sig(m.f1), "", "", "", "", "")
        )
    return rows


def write_report_csv(path, report: EvaluationReport) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_HEADER)
        writer.writerows(_report_rows("", report))
    return path


def write_cv_csv(path, cv: CvReport) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_HEADER)
        writer.writerows(_report_rows("avg", cv.averaged))
        for i, rep in enumerate(cv.per_fold, start=1):
            writer.writerows(_report_rows(str(i), rep))
    return path


def save_confusion_figure(cm: ConfusionMatrix, path, title: str = "") -> Path:
    """Row-normalized heatmap with absolute counts annotated per cell."""
    path = Path(path)
    counts = np.array([[cm.tn, cm.fp], [cm.fn, cm.tp]], dtype=float)
    row_sums = counts.sum(axis=1, keepdims=True)
    shades = np.divide(counts, row_sums, out=np.zeros_like(counts), where=row_sums > 0)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    image = ax.imshow(shades, cmap="Blues", vmin=0.0, vmax=1.0)
    for r in range(2):
        for c in range(2):
            color = "white" if shades[r, c] > 0.5 else "black"
            ax.text(c, r, f"{int(counts[r, c])}\n({shades[r, c]:.2f})",
                    ha="center", va="center", color=color)
    ax.set_xticks([0, 1], CLASS_LABELS)
    ax.set_yticks([0, 1], CLASS_LABELS)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    if title:
        ax.set_title(title)
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_fold_accuracy_figure(cv: CvReport, path) -> Path:
    path = Path(path)
    accuracies = [rep.accuracy for rep in cv.per_fold]
    folds = np.arange(1, cv.k + 1)
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.bar(folds, accuracies, color="#4878a8")
    ax.axhline(cv.averaged.accuracy, color="#b04030", linestyle="--",
               label=f"mean {cv.averaged.accuracy:.3f}")
    ax.set_xticks(folds)
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("fold")
    ax.set_ylabel("accuracy")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_evaluation_outputs(out_dir, report: EvaluationReport, figures: bool = True) -> list[Path]:
    """report.txt + report.csv (+ confusion_matrix.png) inside out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    text_path = out_dir / "report.txt"
    text_path.write_text(format_report(report), encoding="utf-8")
    written.append(text_path)
    written.append(write_report_csv(out_dir / "report.csv", report))
    if figures:
        written.append(save_confusion_figure(report.confusion, out_dir / "confusion_matrix.png"))
    return written


def write_cv_outputs(out_dir, cv: CvReport, figures: bool = True) -> list[Path]:
    """cv_report.txt + cv_report.csv (+ heatmap and fold-accuracy figures)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    text_path = out_dir / "cv_report.txt"
    text_path.write_text(format_cv_report(cv), encoding="utf-8")
    written.append(text_path)
    written.append(write_cv_csv(out_dir / "cv_report.csv", cv))
    if figures:
        written.append(
            save_confusion_figure(cv.averaged.confusion, out_dir / "cv_confusion_matrix.png",
                                  title="pooled over folds")
        )
        written.append(save_fold_accuracy_figure(cv, out_dir / "cv_fold_accuracy.png"))
    return written
