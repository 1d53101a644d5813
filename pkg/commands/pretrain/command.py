from pathlib import Path

from commands.base import BaseCommand
from config.config import CHECKPOINT_FILE
from config.run_config import RunConfig
from evaluation.references import references_for
from evaluation.reports import plot_history, plot_pretext_accuracy
from training.pretrain import evaluate_pretext, pretrain, tune_pretraining


class PretrainCommand(BaseCommand):
    """Self-supervised CPC pre-training on the train split; model selection on validation."""

    name = "pretrain"

    def run(self, config: RunConfig, out_dir: Path) -> None:
        data = self.prepare_data(config)
        callback = self.epoch_logger(self.name, config.pretrain.epochs)
        if config.tune_learning_rate:
            result = tune_pretraining(config.pretrain, data.train, data.val, epoch_callback=callback)
        else:
            result = pretrain(config.pretrain, data.train, data.val, epoch_callback=callback)

        self.save_checkpoint(out_dir, CHECKPOINT_FILE, result.checkpoint)
        self.save_history(out_dir, result.history)

        test_loss, test_accuracy = evaluate_pretext(
            result.model, data.test, config.pretrain.seed, config.pretrain.batch_size
        )
        self.logger.info(
            f"Test pretext loss {test_loss:.5f}; step accuracy "
            + ", ".join(f"{a:.3f}" for a in test_accuracy)
        )
        self.save_report(out_dir, {
            "command": self.name,
            "config": config.experiment_dict(),
            "data": self.data_summary(data),
            "best_epoch": result.best_epoch,
            "learning_rate": result.checkpoint.config.get("learning_rate"),
            "checkpoint_digest": result.checkpoint.digest(),
            "history": result.history,
            "pretext": {"test_loss": test_loss, "test_step_accuracy": test_accuracy.tolist()},
            "references": references_for(config.data.profile or ""),
        })
        if result.history:
            self.runner.logger.artifact(plot_history(result.history, out_dir / "history.svg", "CPC pre-training"))
        self.runner.logger.artifact(plot_pretext_accuracy(
            {"test": test_accuracy.tolist()},
            out_dir / "pretext_accuracy.svg",
            "test pretext accuracy",
        ))


def setup(runner):
    """Add the pretrain command to the runner."""
    runner.add_command(PretrainCommand(runner))
