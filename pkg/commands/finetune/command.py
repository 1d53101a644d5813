from pathlib import Path

from commands.base import BaseCommand
from config.config import CLASSIFIER_FILE
from config.run_config import RunConfig
from evaluation.reports import plot_confusion
from evaluation.sweeps import labeled_train_set
from models.checkpoint import Checkpoint, export_tensors
from models.classifier import FreezePolicy, frozen_parameter_names, trainable_parameter_count
from pipeline.datasets import get_profile
from training.finetune import evaluate_classifier, train_classifier, tune_classifier


class FinetuneCommand(BaseCommand):
    """Train the activity classifier on a checkpoint's features and score it on the test split."""

    name = "finetune"

    def run(self, config: RunConfig, out_dir: Path) -> None:
        checkpoint = self.load_checkpoint(config)
        data = self.prepare_data(config)
        labeled = labeled_train_set(data, config.labels_per_class, config.seed)
        policy = FreezePolicy(config.policy)
        self.logger.info(f"Fine-tuning with policy {policy.value} on {len(labeled)} labeled windows")

        if config.tune_learning_rate:
            result = tune_classifier(checkpoint, labeled, policy, config.finetune, data.num_classes, data.val)
        else:
            result = train_classifier(
                checkpoint, labeled, policy, config.finetune, data.num_classes, data.val,
                epoch_callback=self.epoch_logger(self.name, config.finetune.epochs),
            )

        container = Checkpoint(
            tensors=export_tensors(result.classifier),
            config=result.container_config(checkpoint.config),
        )
        self.save_checkpoint(out_dir, CLASSIFIER_FILE, container)
        self.save_history(out_dir, result.history)

        test = evaluate_classifier(result.classifier, data.test, data.num_classes)
        self.logger.info(f"Test mean F1 {test.mean_f1:.4f}")
        self.save_report(out_dir, {
            "command": self.name,
            "config": config.experiment_dict(),
            "data": self.data_summary(data),
            "checkpoint_digest": checkpoint.digest(),
            "policy": policy.value,
            "labeled_windows": len(labeled),
            "trainable_parameters": trainable_parameter_count(result.classifier),
            "frozen_parameters": frozen_parameter_names(result.classifier),
            "learning_rate": result.config.learning_rate,
            "validation": result.report.to_dict() if result.report is not None else None,
            "test": test.to_dict(),
            "history": result.history,
        })
        names = get_profile(config.data.profile).class_names if config.data.profile else None
        self.runner.logger.artifact(plot_confusion(test.confusion, out_dir / "confusion.svg", names, "test confusion"))


def setup(runner):
    """Add the finetune command to the runner."""
    runner.add_command(FinetuneCommand(runner))
