from pathlib import Path

from commands.base import BaseCommand
from config.config import CHECKPOINT_FILE
from config.run_config import RunConfig
from evaluation.references import references_for
from evaluation.reports import plot_confusion, plot_pretext_accuracy, plot_sweep, sweep_report, write_sweep_csv
from evaluation.sweeps import (
    SweepResult,
    ablation_encoders,
    ablation_freeze,
    ablation_horizon,
    semi_supervised_sweep,
)
from models.checkpoint import Checkpoint
from models.classifier import FreezePolicy
from models.encoders import encoder_spec_from_name
from pipeline.datasets import PreparedData, get_profile
from training.pretrain import pretrain

SWEEP_CSV = "sweep.csv"


class SweepCommand(BaseCommand):
    """Run one multi-seed sweep and write its JSON report, per-seed CSV and plots."""

    name = "sweep"

    def run(self, config: RunConfig, out_dir: Path) -> None:
        sweep = config.sweep
        data = self.prepare_data(config)
        seeds = [config.seed + i for i in range(sweep.num_seeds)]
        common = dict(
            finetune=config.finetune,
            seeds=seeds,
            deterministic=config.deterministic,
            on_point=self.runner.logger.sweep_point,
        )

        if sweep.kind == "labels_per_class":
            result = semi_supervised_sweep(
                self._checkpoint(config, data, out_dir), data, sweep.budgets,
                policy=FreezePolicy(config.policy), controls=sweep.controls, **common,
            )
        elif sweep.kind == "encoder_spec":
            specs = [encoder_spec_from_name(n, config.pretrain.encoder.dropout_p) for n in sweep.encoders]
            result = ablation_encoders(data, specs, config.pretrain, budget=sweep.labels_per_class, **common)
        elif sweep.kind == "k_horizon":
            result = ablation_horizon(data, sweep.k_values, config.pretrain, budget=sweep.labels_per_class, **common)
        else:
            result = ablation_freeze(
                self._checkpoint(config, data, out_dir), data, [FreezePolicy(p) for p in sweep.policies],
                budget=sweep.labels_per_class, **common,
            )

        self._write(result, config, data, out_dir)

    def _checkpoint(self, config: RunConfig, data: PreparedData, out_dir: Path) -> Checkpoint:
        """The configured checkpoint, or a fresh pre-training run saved next to the sweep."""
        if config.checkpoint:
            return self.load_checkpoint(config)
        self.logger.info("No checkpoint given; pre-training one for the sweep")
        result = pretrain(
            config.pretrain, data.train, data.val,
            epoch_callback=self.epoch_logger("pretrain", config.pretrain.epochs),
        )
        self.save_checkpoint(out_dir, CHECKPOINT_FILE, result.checkpoint)
        self.save_history(out_dir, result.history)
        return result.checkpoint

    def _write(self, result: SweepResult, config: RunConfig, data: PreparedData, out_dir: Path) -> None:
        self.save_report(out_dir, sweep_report(result, config.experiment_dict(), references_for(config.data.profile or "")))
        self.runner.logger.artifact(write_sweep_csv(result, out_dir / SWEEP_CSV))
        self.runner.logger.artifact(plot_sweep(result, out_dir / f"{result.axis.value}.svg"))

        curves = {p.setting: p.median_pretext_accuracy() for p in result.points}
        curves = {name: acc for name, acc in curves.items() if acc is not None}
        if curves:
            self.runner.logger.artifact(plot_pretext_accuracy(curves, out_dir / "pretext_accuracy.svg"))

        if result.axis.value == "freeze_policy":
            names = get_profile(config.data.profile).class_names if config.data.profile else None
            for point in result.points:
                # first seed's matrix per policy
                report = point.reports[0]
                if report is not None:
                    self.runner.logger.artifact(plot_confusion(
                        report.confusion, out_dir / f"confusion_{point.setting}.svg", names, point.setting
                    ))

        for point in result.points:
            self.logger.info(
                f"{result.axis.value} [{point.setting}] median {point.median:.4f} "
                f"(min {point.min:.4f}, max {point.max:.4f}, std {point.std:.4f})"
            )


def setup(runner):
    """Add the sweep command to the runner."""
    runner.add_command(SweepCommand(runner))
