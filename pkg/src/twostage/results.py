"""Result records and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SeRecord", "CSV_HEADER", "ci95_half_width", "write_results", "read_results"]

CSV_HEADER = ("experiment", "sweep_value", "method", "mean_se_bits_per_symbol", "trials", "ci95_half_width")


@dataclass(frozen=True)
class SeRecord:
    experiment: str
    sweep_value: float
    method: str
    mean_se: float
    trials: int
    ci95_half_width: float


def ci95_half_width(values) -> float:
    """``1.96 * std / sqrt(n)`` with the unbiased standard deviation; 0 for n < 2."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(1.96 * np.std(values, ddof=1) / np.sqrt(values.size))


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_results(records, path) -> None:
    """CSV with 9 significant digits, rows sorted by (experiment, sweep, method)."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda r: (r.experiment, r.sweep_value, r.method))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [r.experiment, _fmt(r.sweep_value), r.method, _fmt(r.mean_se), r.trials, _fmt(r.ci95_half_width)]
            )


def read_results(path) -> list[SeRecord]:
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            SeRecord(
                row["experiment"],
                float(row["sweep_value"]),
                row["method"],
                float(row["mean_se_bits_per_symbol"]),
                int(row["trials"]),
                float(row["ci95_half_width"]),
            )
            for row in reader
        ]
