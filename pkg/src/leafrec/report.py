"""Evaluation-report rendering: JSON, CSV and matplotlib figures."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .pipeline import EvaluationReport


def write_report(report: EvaluationReport, json_path: str | Path) -> dict[str, Path]:
    """Write the report as JSON plus a CSV table and two PNG charts that
    share the JSON path's stem. Returns the written paths by kind."""
    json_path = Path(json_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")

    csv_path = json_path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "test_count", "incorrect"])
        for row in report.per_class:
            writer.writerow([row.label, row.test_count, row.incorrect])

    labels = [row.label for row in report.per_class]
    positions = range(len(labels))

    errors_path = json_path.with_name(json_path.stem + "_errors.png")
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.28 * len(labels))))
    ax.barh(positions, [row.incorrect for row in report.per_class], color="#a03232")
    ax.set_yticks(positions, labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("incorrect recognitions")
    ax.set_title(f"Per-class errors (overall accuracy {report.accuracy:.3%})")
    fig.tight_layout()
    fig.savefig(errors_path, dpi=120)
    plt.close(fig)

    accuracy_path = json_path.with_name(json_path.stem + "_accuracy.png")
    per_class_acc = [
        1.0 - row.incorrect / row.test_count if row.test_count else 0.0
        for row in report.per_class
    ]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.28 * len(labels))))
    ax.barh(positions, per_class_acc, color="#3a7d44")
    ax.set_yticks(positions, labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.axvline(report.accuracy, color="#222", linestyle="--", linewidth=1, label="overall")
    ax.set_xlabel("per-class accuracy")
    ax.legend(loc="lower left", fontsize=7)
    fig.tight_layout()
    fig.savefig(accuracy_path, dpi=120)
    plt.close(fig)

    return {"json": json_path, "csv": csv_path, "errors_png": errors_path, "accuracy_png": accuracy_path}
