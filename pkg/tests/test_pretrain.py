import math
from dataclasses import replace

import numpy as np
import pytest

import training.pretrain as pretrain_module
from training.pretrain import PretrainConfig, evaluate_pretext, pretrain, random_checkpoint, tune_pretraining
from utils.error_handler import ConfigError, DataError, NumericError


class TestPretrain:
    def test_history_records_every_epoch(self, prepared, tiny_pretrain_config):
        result = pretrain(tiny_pretrain_config, prepared.train, prepared.val)
        assert [r["epoch"] for r in result.history] == [0, 1]
        for record in result.history:
            assert len(record["train_accuracy"]) == 4
            assert len(record["val_accuracy"]) == 4
            assert math.isfinite(record["val_loss"])
        best = min(range(2), key=lambda e: result.history[e]["val_loss"])
        assert result.best_epoch == best
        assert result.checkpoint.config["pretrained"] is True

    def test_same_seed_same_checkpoint(self, prepared, tiny_pretrain_config):
        a = pretrain(tiny_pretrain_config, prepared.train, prepared.val)
        b = pretrain(tiny_pretrain_config, prepared.train, prepared.val)
        assert a.checkpoint.digest() == b.checkpoint.digest()
        assert a.history == b.history

    def test_zero_learning_rate_leaves_weights_alone(self, prepared, tiny_pretrain_config):
        config = replace(tiny_pretrain_config, learning_rate=0.0)
        trained = pretrain(config, prepared.train, prepared.val).checkpoint
        untrained = random_checkpoint(config, prepared.num_channels, prepared.window_length)
        assert trained.digest() == untrained.digest()

    def test_loss_decreases(self, prepared, tiny_pretrain_config):
        config = replace(tiny_pretrain_config, epochs=8, learning_rate=1e-3)
        history = pretrain(config, prepared.train).history
        assert history[-1]["train_loss"] < history[0]["train_loss"]

    def test_callback_sees_each_epoch(self, prepared, tiny_pretrain_config):
        seen = []
        pretrain(tiny_pretrain_config, prepared.train, prepared.val, epoch_callback=seen.append)
        assert len(seen) == 2

    def test_training_loss_selects_without_validation(self, prepared, tiny_pretrain_config, caplog):
        result = pretrain(tiny_pretrain_config, prepared.train)
        assert "val_loss" not in result.history[0]
        assert "selecting the epoch by training loss" in caplog.text

    def test_dataset_smaller_than_a_batch(self, prepared, tiny_pretrain_config):
        with pytest.raises(DataError, match="smaller than one batch"):
            pretrain(tiny_pretrain_config, prepared.train.subset(range(5)))

    @pytest.mark.parametrize("overrides, message", [
        ({"K": 30}, "horizon leaves no context"),
        ({"batch_size": 1}, "no negatives available"),
    ])
    def test_invalid_config(self, prepared, tiny_pretrain_config, overrides, message):
        with pytest.raises(ConfigError, match=message):
            pretrain(replace(tiny_pretrain_config, **overrides), prepared.train)

    def test_non_finite_loss_keeps_partial_history(self, prepared, tiny_pretrain_config, monkeypatch):
        real = pretrain_module.evaluate_pretext
        calls = []

        def flaky(*args, **kwargs):
            calls.append(1)
            loss, acc = real(*args, **kwargs)
            return (math.nan if len(calls) == 2 else loss), acc

        monkeypatch.setattr(pretrain_module, "evaluate_pretext", flaky)
        with pytest.raises(NumericError) as info:
            pretrain(tiny_pretrain_config, prepared.train, prepared.val)
        assert len(info.value.history) == 1


def test_evaluate_pretext_is_repeatable(prepared, tiny_pretrain_config):
    model = pretrain(tiny_pretrain_config, prepared.train).model
    first = evaluate_pretext(model, prepared.test, seed=3, batch_size=8)
    second = evaluate_pretext(model, prepared.test, seed=3, batch_size=8)
    assert first[0] == second[0]
    np.testing.assert_array_equal(first[1], second[1])
    assert np.all((first[1] >= 0) & (first[1] <= 1))


def test_tuning_picks_the_lower_validation_loss(prepared, tiny_pretrain_config):
    best = tune_pretraining(tiny_pretrain_config, prepared.train, prepared.val, learning_rates=(1e-3, 0.0))
    losses = [
        min(r["val_loss"] for r in pretrain(replace(tiny_pretrain_config, learning_rate=lr), prepared.train, prepared.val).history)
        for lr in (1e-3, 0.0)
    ]
    assert best.history[best.best_epoch]["val_loss"] == min(losses)


def test_config_round_trip(tiny_pretrain_config):
    assert PretrainConfig.from_dict(tiny_pretrain_config.to_dict()) == tiny_pretrain_config
