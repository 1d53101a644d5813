from pathlib import Path
from typing import Any, Dict

from commands.base import BaseCommand
from config.run_config import RunConfig
from evaluation.references import references_for
from evaluation.reports import plot_confusion, plot_pretext_accuracy
from evaluation.sweeps import architecture_of, labeled_train_set
from models.checkpoint import Checkpoint, load_cpc_model
from models.classifier import FreezePolicy
from pipeline.datasets import PreparedData, get_profile
from training.finetune import evaluate_classifier, load_classifier, train_classifier, train_end_to_end
from training.pretrain import evaluate_pretext


class EvaluateCommand(BaseCommand):
    """
    Score a trained classifier, or compare frozen CPC features with end-to-end training.

    A classifier container is simply scored on the test split. A CPC checkpoint
    gets a classifier trained on its frozen features and the same architecture
    trained end to end from scratch, both on the same labeled windows; the
    report also holds the test pretext accuracy and published reference values.
    """

    name = "evaluate"

    def run(self, config: RunConfig, out_dir: Path) -> None:
        checkpoint = self.load_checkpoint(config)
        data = self.prepare_data(config)
        report: Dict[str, Any] = {
            "command": self.name,
            "config": config.experiment_dict(),
            "data": self.data_summary(data),
            "references": references_for(config.data.profile or ""),
        }
        if checkpoint.config.get("kind") == "classifier":
            report.update(self._score_classifier(checkpoint, data, config, out_dir))
        else:
            report.update(self._compare_representations(checkpoint, data, config, out_dir))
        self.save_report(out_dir, report)

    def _class_names(self, config: RunConfig):
        return get_profile(config.data.profile).class_names if config.data.profile else None

    def _score_classifier(self, container: Checkpoint, data: PreparedData, config: RunConfig, out_dir: Path) -> Dict[str, Any]:
        classifier = load_classifier(container)
        test = evaluate_classifier(classifier, data.test, data.num_classes)
        self.logger.info(f"Test mean F1 {test.mean_f1:.4f} (policy {container.config['policy']})")
        self.runner.logger.artifact(
            plot_confusion(test.confusion, out_dir / "confusion.svg", self._class_names(config), "test confusion")
        )
        return {"mode": "classifier", "policy": container.config["policy"], "test": test.to_dict()}

    def _compare_representations(self, checkpoint: Checkpoint, data: PreparedData, config: RunConfig, out_dir: Path) -> Dict[str, Any]:
        policy = FreezePolicy(config.policy)
        labeled = labeled_train_set(data, config.labels_per_class, config.seed)

        frozen = train_classifier(checkpoint, labeled, policy, config.finetune, data.num_classes, data.val)
        frozen_test = evaluate_classifier(frozen.classifier, data.test, data.num_classes)

        architecture = architecture_of(checkpoint)
        end_to_end = train_end_to_end(
            architecture.encoder, labeled, config.finetune, data.num_classes, architecture, data.val
        )
        end_to_end_test = evaluate_classifier(end_to_end.classifier, data.test, data.num_classes)

        model = load_cpc_model(checkpoint)
        _, accuracy = evaluate_pretext(model, data.test, config.seed, config.pretrain.batch_size)
        frozen_test.pretext_step_accuracy = accuracy.tolist()

        self.logger.info(
            f"Test mean F1: frozen ({policy.value}) {frozen_test.mean_f1:.4f}, "
            f"end-to-end {end_to_end_test.mean_f1:.4f}"
        )
        names = self._class_names(config)
        self.runner.logger.artifact(
            plot_confusion(frozen_test.confusion, out_dir / "confusion_frozen.svg", names, f"frozen ({policy.value})")
        )
        self.runner.logger.artifact(
            plot_confusion(end_to_end_test.confusion, out_dir / "confusion_end_to_end.svg", names, "end to end")
        )
        self.runner.logger.artifact(
            plot_pretext_accuracy({"test": accuracy.tolist()}, out_dir / "pretext_accuracy.svg", "test pretext accuracy")
        )
        return {
            "mode": "representation",
            "policy": policy.value,
            "labeled_windows": len(labeled),
            "frozen": frozen_test.to_dict(),
            "end_to_end": end_to_end_test.to_dict(),
        }


def setup(runner):
    """Add the evaluate command to the runner."""
    runner.add_command(EvaluateCommand(runner))
