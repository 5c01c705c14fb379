import csv
import math

import numpy as np
import pytest

from mfsrbf.campaign_state import CampaignRecord
from mfsrbf.errors import InvalidArgumentError, UnsupportedDimensionError
from mfsrbf.output import writers


class SurfaceModel:
    def __init__(self, dim):
        self.dim = dim

    def predict_many(self, X):
        X = np.atleast_2d(X)
        return X.sum(axis=1), 0.1 * np.ones(len(X))


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def three_level_record():
    rows = [
        {"iteration": 0, "phase": "seed", "level": 1, "x": [0.5], "observed": [1.0, 2.0, 3.0],
         "cc_after": 1.3, "kstar": [2, 2, 2]},
        {"iteration": 1, "phase": "adaptive", "level": 2, "x": [0.25], "observed": [None, 2.5, 3.5],
         "cc_after": 1.6, "kstar": [2, 2, 3]},
    ]
    return CampaignRecord("P1", 1, 3, 0, (1.0, 0.2, 0.1), 45.0, iterations=rows)


class TestFormat:
    def test_seventeen_digits(self):
        assert writers.format_value(0.1) == "0.10000000000000001"
        assert float(writers.format_value(math.pi)) == math.pi

    def test_blank_cells(self):
        assert writers.format_value(None) == ""
        assert writers.format_value(float("nan")) == ""

    def test_integers_and_text(self):
        assert writers.format_value(np.int64(12)) == "12"
        assert writers.format_value("budget") == "budget"


class TestHistory:
    def test_header(self):
        assert writers.history_header(2, 3) == [
            "iteration", "phase", "level", "x_1", "x_2", "s_1", "s_2", "s_3", "cc_after",
            "kstar_eps_1", "kstar_eps_2", "kstar_f_3",
        ]

    def test_nested_addition_leaves_higher_levels_blank(self, tmp_path):
        path = writers.emit_history(three_level_record(), str(tmp_path / "history.csv"))
        header, seed, added = read_rows(path)
        assert len(header) == len(seed) == len(added)
        assert added[header.index("s_1")] == ""
        assert float(added[header.index("s_2")]) == 2.5
        assert added[header.index("level")] == "2"
        assert seed[header.index("phase")] == "seed"

    def test_seed_only(self, tmp_path):
        record = three_level_record()
        record.iterations = record.iterations[:1]
        rows = read_rows(writers.emit_history(record, str(tmp_path / "h.csv")))
        assert len(rows) == 2

    def test_rows_are_flushed_as_written(self, tmp_path):
        path = str(tmp_path / "live.csv")
        with writers.HistoryWriter(path, 1, 3) as writer:
            writer(three_level_record().iterations[0])
            assert len(read_rows(path)) == 2


class TestSurface:
    def test_one_dimensional_grid(self, tmp_path):
        rows = read_rows(writers.emit_surface_grid(SurfaceModel(1), 101, str(tmp_path / "s.csv")))
        assert rows[0] == ["x_1", "mean", "uncertainty"]
        assert len(rows) - 1 == 101

    def test_two_dimensional_grid(self, tmp_path):
        rows = read_rows(writers.emit_surface_grid(SurfaceModel(2), 51, str(tmp_path / "s.csv")))
        assert len(rows) - 1 == 2601
        assert all(float(r[-1]) >= 0.0 for r in rows[1:])

    def test_higher_dimensions_rejected(self, tmp_path):
        with pytest.raises(UnsupportedDimensionError):
            writers.emit_surface_grid(SurfaceModel(3), 11, str(tmp_path / "s.csv"))

    def test_resolution_checked(self):
        with pytest.raises(InvalidArgumentError):
            writers.surface_points(1, 1)


class TestMetricTables:
    rows = [
        {"rep": 0, "seed": 0, "termination": "budget", "E_x": 0.1, "E_t": 0.2, "J_1": 45, "cc": 45.0},
        {"rep": 1, "seed": 1, "termination": "stagnation", "E_x": 0.3, "E_t": float("nan"), "J_1": 30, "cc": 30.0},
    ]

    def test_round_trip(self, tmp_path):
        path = writers.write_metrics(self.rows, str(tmp_path / "metrics.csv"))
        back = writers.read_metrics(path)
        assert back[0]["termination"] == "budget"
        assert back[1]["E_x"] == 0.3
        assert math.isnan(back[1]["E_t"])

    def test_aggregate_skips_missing_values(self):
        table = {entry["metric"]: entry for entry in writers.aggregate_rows(self.rows)}
        assert table["E_x"]["median"] == pytest.approx(0.2)
        assert table["E_t"]["n"] == 1
        assert table["E_f"]["n"] == 0
        assert table["J_1"]["median"] == pytest.approx(37.5)

    def test_single_repetition_aggregate_is_the_run(self, tmp_path):
        path = writers.write_aggregate(self.rows[:1], str(tmp_path / "aggregate.csv"))
        rows = read_rows(path)
        assert tuple(rows[0]) == writers.AGGREGATE_COLUMNS
        e_x = next(r for r in rows if r[0] == "E_x")
        assert float(e_x[2]) == float(e_x[3]) == float(e_x[4]) == 0.1

    def test_empty(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            writers.write_metrics([], str(tmp_path / "m.csv"))
