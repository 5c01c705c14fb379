"""CSV artifacts: campaign history, surface grids, metric and aggregate tables.

Floats are written with 17 significant digits; missing values are empty cells.
"""

from __future__ import annotations

import csv
import logging
import math
import os

import numpy as np

from mfsrbf.constants import NUMBER_FORMAT
from mfsrbf.errors import InvalidArgumentError, UnsupportedDimensionError
from mfsrbf.logic import metrics

logger = logging.getLogger(__name__)

AGGREGATED_METRICS = ("E_x", "E_f", "E_t", "Delta_x", "Delta_f", "E_p", "abs_E_p", "cc")
AGGREGATE_COLUMNS = ("metric", "n", "q1", "median", "q3", "whisker_lo", "whisker_hi", "n_outliers", "outliers")


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else format(float(value), NUMBER_FORMAT)
    return str(value)


def _open_csv(path, mode="w"):
    d_name = os.path.dirname(path)
    if d_name:
        os.makedirs(d_name, exist_ok=True)
    return open(path, mode, newline="")


def history_header(dim, n_levels):
    return (
        ["iteration", "phase", "level"]
        + [f"x_{d}" for d in range(1, dim + 1)]
        + [f"s_{l}" for l in range(1, n_levels + 1)]
        + ["cc_after"]
        + [f"kstar_eps_{l}" for l in range(1, n_levels)]
        + [f"kstar_f_{n_levels}"]
    )


def history_cells(row):
    return (
        [format_value(row["iteration"]), row["phase"], format_value(row["level"])]
        + [format_value(v) for v in row["x"]]
        + [format_value(v) for v in row["observed"]]
        + [format_value(row["cc_after"])]
        + [format_value(k) for k in row["kstar"]]
    )


class HistoryWriter:
    """Append-only history file, one flushed line per campaign row."""

    def __init__(self, path, dim, n_levels):
        self.path = path
        self._file = _open_csv(path)
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(history_header(dim, n_levels))
        self._file.flush()

    def __call__(self, row):
        self._writer.writerow(history_cells(row))
        self._file.flush()

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def emit_history(record, path):
    with HistoryWriter(path, record.dim, record.n_levels) as writer:
        for row in record.iterations:
            writer(row)
    return path


def surface_points(dim, resolution):
    if dim > 2:
        raise UnsupportedDimensionError(f"surface export supports D <= 2, got D={dim}")
    if resolution < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    axis = np.linspace(0.0, 1.0, resolution)
    if dim == 1:
        return axis.reshape(-1, 1)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def emit_surface_grid(model, resolution, path):
    """(x, mean, uncertainty) of the MF prediction on a regular grid over [0,1]^D."""
    X = surface_points(model.dim, resolution)
    mean, unc = model.predict_many(X)
    if np.any(unc < 0):
        raise InvalidArgumentError("negative uncertainty in surface export")
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"x_{d}" for d in range(1, model.dim + 1)] + ["mean", "uncertainty"])
        for x, m, u in zip(X, mean, unc):
            writer.writerow([format_value(v) for v in x] + [format_value(m), format_value(u)])
    return path


def write_metrics(rows, path):
    """One row per repetition, in the given order; columns from the first row."""
    if not rows:
        raise InvalidArgumentError("no metric rows to write")
    columns = list(rows[0])
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
    return path


def read_metrics(path):
    """Metric rows back as dicts of floats (strings kept where a cell is not numeric)."""
    rows = []
    with open(path, "r", newline="") as f:
        for raw in csv.DictReader(f):
            row = {}
            for key, cell in raw.items():
                if cell == "":
                    row[key] = float("nan")
                    continue
                try:
                    row[key] = float(cell)
                except ValueError:
                    row[key] = cell
            rows.append(row)
    return rows


def aggregate_rows(rows):
    """BoxStats per metric and per level count; NaN cells are left out."""
    if not rows:
        raise InvalidArgumentError("no metric rows to aggregate")
    names = list(AGGREGATED_METRICS) + sorted(k for k in rows[0] if k.startswith("J_"))
    table = []
    for name in names:
        values = [float(r[name]) for r in rows if name in r and r[name] is not None]
        values = [v for v in values if not math.isnan(v)]
        if not values:
            table.append({"metric": name, "n": 0})
            continue
        stats = metrics.aggregate_stats(values)
        table.append(
            {
                "metric": name,
                "n": stats.n,
                "q1": stats.q1,
                "median": stats.q2,
                "q3": stats.q3,
                "whisker_lo": stats.whisker_lo,
                "whisker_hi": stats.whisker_hi,
                "n_outliers": len(stats.outliers),
                "outliers": ";".join(format_value(v) for v in stats.outliers),
            }
        )
    return table


def write_aggregate(rows, path):
    with _open_csv(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for entry in aggregate_rows(rows):
            writer.writerow([format_value(entry.get(c)) for c in AGGREGATE_COLUMNS])
    return path
