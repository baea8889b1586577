"""
Run summaries and their CSV/JSON artifacts.

The metrics CSV has one row per logged round and a fixed header. Floats
are written with 9 significant digits and missing values as empty cells,
so two runs with the same seed produce byte-identical files. Wall-clock
time and the run id only go into the JSON summary.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from src.hetero_agg import GroupSpec
from src.shared.logging import setup_logging
from src.shared.models import LayerKey

logger = setup_logging("fl_sim.reporting", level="INFO")

Row = dict[str, Any]


@dataclass
class RunSummary:
    """Per-round metric rows of one run plus its final state."""

    method: str
    seed: int
    run_id: str
    columns: list[str]
    rows: list[Row] = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    # Mean theta per deep layer of the largest group, keyed by layer suffix.
    mean_theta: dict[str, float | None] = field(default_factory=dict)

    @property
    def final(self) -> Row:
        return self.rows[-1] if self.rows else {}

    def to_json(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "method": self.method,
            "seed": self.seed,
            "config": self.config,
            "final": self.final,
            "rounds_logged": len(self.rows),
            "mean_theta": self.mean_theta,
            "wall_clock_seconds": self.wall_clock_seconds,
            "artifacts": self.artifacts,
        }


def layer_suffix(key: LayerKey) -> str:
    return f"layer_{key.stage}_{key.index_in_stage}"


def beta_column(key: LayerKey) -> str:
    return f"beta_pos_rate_{layer_suffix(key)}"


def metric_columns(groups: list[GroupSpec], stages: int, deep_layers: Iterable[LayerKey]) -> list[str]:
    """The fixed CSV header for a run over ``groups``."""
    columns = ["round", "method", "seed", "mean_acc", "max_acc", "min_acc"]
    columns += [f"acc_group_{g.group_id}" for g in sorted(groups, key=lambda g: g.group_id)]
    columns += [f"cka_stage_{s}" for s in range(stages)]
    columns += [beta_column(k) for k in sorted(deep_layers)]
    columns.append("eta_bound_estimate")
    return columns


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_metrics_csv(path: Path, columns: list[str], rows: list[Row]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(col)) for col in columns])
    return path


def write_summary_json(path: Path, summary: RunSummary) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary.to_json(), indent=2, default=str), encoding="utf-8")
    return path


def write_run_artifacts(out_dir: Path, summary: RunSummary) -> dict[str, str]:
    """Write ``<method>_seed<seed>.csv`` and ``.json`` into ``out_dir``."""
    stem = f"{summary.method}_seed{summary.seed}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    summary.artifacts = {"metrics_csv": str(csv_path), "summary_json": str(json_path)}
    write_metrics_csv(csv_path, summary.columns, summary.rows)
    write_summary_json(json_path, summary)
    logger.info("Wrote %s and %s", csv_path, json_path)
    return summary.artifacts
