import math

import numpy as np
import pandas as pd
import pytest

from evaluation.metrics import compute_metrics
from evaluation.references import references_for
from evaluation.reports import (
    plot_confusion,
    plot_history,
    plot_pretext_accuracy,
    plot_sweep,
    read_json,
    sweep_report,
    sweep_rows,
    write_json,
    write_sweep_csv,
)
from evaluation.sweeps import SweepAxis, SweepPoint, SweepResult


def _result():
    main = [SweepPoint("1", [0, 1], [0.4, 0.6]), SweepPoint("5", [0, 1], [0.7, 0.9])]
    control = [SweepPoint("1", [0, 1], [0.3, 0.3]), SweepPoint("5", [0, 1], [0.5, 0.4])]
    return SweepResult(SweepAxis.LABELS_PER_CLASS, main, {"random_init": control})


class TestJson:
    def test_canonical_and_finite(self, tmp_path):
        path = write_json(tmp_path / "r.json", {"b": np.float32(0.5), "a": [math.nan, math.inf, np.int64(3)]})
        text = path.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"b"')
        assert read_json(path) == {"a": [None, None, 3], "b": 0.5}

    def test_identical_input_identical_bytes(self, tmp_path):
        data = {"report": compute_metrics([0, 1, 1], [0, 1, 0], 2).to_dict()}
        a = write_json(tmp_path / "a.json", data).read_bytes()
        b = write_json(tmp_path / "b.json", data).read_bytes()
        assert a == b


class TestSweepTables:
    def test_one_row_per_series_setting_and_seed(self):
        rows = sweep_rows(_result())
        assert len(rows) == 8
        assert rows[0] == {"axis": "labels_per_class", "series": "main", "setting": "1", "seed": 0, "mean_f1": 0.4}
        assert {r["series"] for r in rows} == {"main", "random_init"}

    def test_csv(self, tmp_path):
        frame = pd.read_csv(write_sweep_csv(_result(), tmp_path / "sweep.csv"), dtype={"setting": str})
        assert list(frame.columns) == ["axis", "series", "setting", "seed", "mean_f1"]
        assert frame.groupby("series")["mean_f1"].median().to_dict() == pytest.approx({"main": 0.65, "random_init": 0.35})

    def test_report_document(self):
        report = sweep_report(_result(), {"seed": 0}, references_for("uci_har"))
        assert report["sweep"]["points"][1]["median"] == pytest.approx(0.8)
        assert report["sweep"]["controls"]["random_init"][0]["std"] == 0.0
        assert report["references"]["freeze_f1"] == {"enc_le2": 82.58}


def test_references_for_synthetic_data_are_empty():
    assert references_for("") == {"representation_f1": {}, "freeze_f1": {}, "best_horizon": None}


class TestPlots:
    def test_files_are_svg(self, tmp_path):
        paths = [
            plot_sweep(_result(), tmp_path / "sweep.svg"),
            plot_pretext_accuracy({"conv_k3": [0.9, 0.5, 0.2]}, tmp_path / "acc.svg"),
            plot_confusion(np.array([[3, 1], [0, 0]]), tmp_path / "conf.svg", ["sit", "walk"]),
            plot_history([{"epoch": 0, "train_loss": 2.0, "val_loss": 2.1}, {"epoch": 1, "train_loss": 1.5}],
                         tmp_path / "hist.svg"),
        ]
        for path in paths:
            assert path.read_text(encoding="utf-8").lstrip().startswith("<?xml")
            assert "<svg" in path.read_text(encoding="utf-8")

    def test_plots_are_reproducible(self, tmp_path):
        a = plot_sweep(_result(), tmp_path / "a.svg").read_bytes()
        b = plot_sweep(_result(), tmp_path / "b.svg").read_bytes()
        assert a == b

    def test_confusion_falls_back_to_indices(self, tmp_path):
        path = plot_confusion(np.eye(3, dtype=int), tmp_path / "c.svg", ["only", "two"])
        assert path.exists()
