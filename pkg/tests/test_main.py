import json

import pytest
import torch

import training.pretrain as pretrain_module
from evaluation.reports import read_json
from main import build_parser, run

TINY_CONFIG = {
    "data": {"synthetic": {"num_subjects": 6, "num_classes": 3, "duration_s": 40.0, "seed": 3}},
    "pretrain": {
        "K": 4,
        "epochs": 2,
        "batch_size": 16,
        "context_dim": 16,
        "encoder": {"family": "conv1d", "layer_widths": [8, 8, 8], "kernel_size": 3},
    },
    "finetune": {"epochs": 3, "batch_size": 16},
    "labels_per_class": 5,
}


@pytest.fixture(autouse=True)
def _restore_numerics():
    deterministic = torch.are_deterministic_algorithms_enabled()
    threads = torch.get_num_threads()
    yield
    torch.use_deterministic_algorithms(deterministic)
    torch.set_num_threads(threads)


@pytest.fixture
def config_file(tmp_path):
    def write(**changes):
        document = json.loads(json.dumps(TINY_CONFIG))
        document.update(changes)
        path = tmp_path / f"config_{len(list(tmp_path.glob('config_*')))}.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def pretrained(tmp_path, config_file):
    out = tmp_path / "pretrain"
    assert run(["pretrain", "--config", config_file(), "--out", str(out)]) == 0
    return out


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        assert run(["train"]) == 1
        assert "usage:" in capsys.readouterr().err

    def test_conflicting_flags(self, tmp_path, config_file):
        argv = ["pretrain", "--config", config_file(), "--out", str(tmp_path / "o"), "--deterministic", "--parallel"]
        assert run(argv) == 1

    def test_missing_config(self, tmp_path):
        assert run(["pretrain", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "o")]) == 1

    def test_out_is_required(self, config_file):
        assert run(["pretrain", "--config", config_file()]) == 1

    def test_help(self):
        assert run(["--help"]) == 0

    def test_flags_parse(self):
        args = build_parser().parse_args(["sweep", "--seed", "4", "--parallel", "--out", "x"])
        assert (args.command, args.seed, args.deterministic, args.out_dir) == ("sweep", 4, False, "x")

    def test_invalid_config_stops_before_running(self, tmp_path, config_file):
        out = tmp_path / "o"
        path = config_file(pretrain={**TINY_CONFIG["pretrain"], "K": 30})
        assert run(["pretrain", "--config", path, "--out", str(out)]) == 1
        assert not out.exists()

    def test_finetune_needs_a_checkpoint(self, tmp_path, config_file):
        assert run(["finetune", "--config", config_file(), "--out", str(tmp_path / "o")]) == 1


class TestPretrain:
    def test_writes_checkpoint_and_history(self, pretrained):
        for name in ("checkpoint.bin", "history.json", "report.json", "config.json", "run.log", "history.svg"):
            assert (pretrained / name).exists(), name
        assert len(read_json(pretrained / "history.json")["epochs"]) == 2
        assert read_json(pretrained / "config.json")["pretrain"]["K"] == 4
        assert "epoch 2/2" in (pretrained / "run.log").read_text(encoding="utf-8")

    def test_existing_output_needs_force(self, pretrained, config_file):
        argv = ["pretrain", "--config", config_file(), "--out", str(pretrained)]
        assert run(argv) == 1
        assert run(argv + ["--force"]) == 0

    def test_runs_are_reproducible(self, tmp_path, pretrained, config_file):
        again = tmp_path / "again"
        assert run(["pretrain", "--config", config_file(), "--out", str(again)]) == 0
        for name in ("checkpoint.bin", "history.json", "report.json"):
            assert (again / name).read_bytes() == (pretrained / name).read_bytes(), name

    def test_non_finite_loss_exits_3_with_partial_history(self, tmp_path, config_file, monkeypatch):
        real = pretrain_module.evaluate_pretext
        calls = []

        def flaky(*args, **kwargs):
            calls.append(1)
            loss, acc = real(*args, **kwargs)
            return (float("nan") if len(calls) == 2 else loss), acc

        monkeypatch.setattr(pretrain_module, "evaluate_pretext", flaky)
        out = tmp_path / "nan"
        assert run(["pretrain", "--config", config_file(), "--out", str(out)]) == 3
        history = read_json(out / "history.json")
        assert len(history["epochs"]) == 1
        assert "Non-finite" in history["error"]
        assert not (out / "checkpoint.bin").exists()

    def test_missing_csv_is_a_data_error(self, tmp_path, config_file):
        path = config_file(data={"source": "csv", "paths": [str(tmp_path / "none.csv")]})
        assert run(["pretrain", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_synth_output_feeds_a_csv_run(tmp_path, config_file):
    synth = tmp_path / "synth"
    assert run(["synth", "--config", config_file(), "--out", str(synth)]) == 0
    report = read_json(synth / "report.json")
    assert report["subjects"] == ["1", "2", "3", "4", "5", "6"]

    data = {"source": "csv", "paths": [str(synth / "recordings.csv")], "num_classes": 3}
    out = tmp_path / "csv"
    assert run(["pretrain", "--config", config_file(data=data), "--out", str(out)]) == 0
    assert (out / "checkpoint.bin").exists()


class TestDownstream:
    def test_finetune_is_reproducible(self, tmp_path, pretrained, config_file):
        checkpoint = str(pretrained / "checkpoint.bin")
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(["finetune", "--config", config_file(), "--out", str(out), "--checkpoint", checkpoint]) == 0
            outputs.append(out)
        for name in ("classifier.bin", "report.json", "history.json"):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name
        report = read_json(outputs[0] / "report.json")
        assert report["policy"] == "enc_le3_plus_gar"
        assert report["labeled_windows"] == 15
        assert 0.0 <= report["test"]["mean_f1"] <= 1.0

    def test_evaluate_compares_frozen_and_end_to_end(self, tmp_path, pretrained, config_file):
        out = tmp_path / "eval"
        argv = ["evaluate", "--config", config_file(), "--out", str(out), "--checkpoint", str(pretrained / "checkpoint.bin")]
        assert run(argv) == 0
        report = read_json(out / "report.json")
        assert report["mode"] == "representation"
        assert len(report["frozen"]["pretext_step_accuracy"]) == 4
        assert (out / "confusion_end_to_end.svg").exists()

    def test_evaluate_scores_a_saved_classifier(self, tmp_path, pretrained, config_file):
        tuned = tmp_path / "tuned"
        argv = ["finetune", "--config", config_file(), "--out", str(tuned), "--checkpoint", str(pretrained / "checkpoint.bin")]
        assert run(argv) == 0
        out = tmp_path / "eval"
        argv = ["evaluate", "--config", config_file(), "--out", str(out), "--checkpoint", str(tuned / "classifier.bin")]
        assert run(argv) == 0
        assert read_json(out / "report.json")["test"] == read_json(tuned / "report.json")["test"]

    def test_freeze_sweep(self, tmp_path, pretrained, config_file):
        sweep = {"kind": "freeze_policy", "policies": ["enc_le3_plus_gar", "none"], "num_seeds": 2, "labels_per_class": 5}
        out = tmp_path / "sweep"
        argv = ["sweep", "--config", config_file(sweep=sweep), "--out", str(out), "--checkpoint", str(pretrained / "checkpoint.bin")]
        assert run(argv) == 0
        for name in ("report.json", "sweep.csv", "freeze_policy.svg", "confusion_none.svg"):
            assert (out / name).exists(), name
        points = read_json(out / "report.json")["sweep"]["points"]
        assert [p["setting"] for p in points] == ["enc_le3_plus_gar", "none"]
        assert all(p["seeds"] == [0, 1] for p in points)
        assert len((out / "sweep.csv").read_text(encoding="utf-8").splitlines()) == 5
