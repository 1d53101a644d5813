import logging
from pathlib import Path
from typing import Any, Callable, Dict, Mapping

from config.config import HISTORY_FILE, REPORT_FILE
from config.run_config import RunConfig
from evaluation.reports import write_json
from models.checkpoint import Checkpoint
from pipeline.datasets import PreparedData, get_profile, prepare_dataset
from pipeline.recordings import RecordingSet, load_recordings
from pipeline.synthetic import generate_synthetic
from utils.error_handler import ConfigError


class BaseCommand:
    """Base command class with common utilities."""

    name = "base"

    def __init__(self, runner):
        self.runner = runner
        self.logger = logging.getLogger(self.__class__.__name__)

    def run(self, config: RunConfig, out_dir: Path) -> None:
        raise NotImplementedError

    def load_recordings(self, config: RunConfig) -> RecordingSet:
        """Recordings named by the data section: generated or read from CSV."""
        data = config.data
        if data.source == "synthetic":
            self.logger.info(
                f"Generating synthetic recordings ({data.synthetic.num_subjects} subjects, "
                f"{data.synthetic.num_classes} classes, seed {data.synthetic.seed})"
            )
            return generate_synthetic(data.synthetic)
        return load_recordings(data.paths)

    def prepare_data(self, config: RunConfig) -> PreparedData:
        """Resampled, split, normalized and windowed splits for this run."""
        data = config.data
        profile = get_profile(data.profile) if data.profile else None
        num_classes = data.num_classes
        if num_classes is None and data.source == "synthetic":
            num_classes = data.synthetic.num_classes
        return prepare_dataset(
            self.load_recordings(config),
            seed=data.split_seed,
            target_hz=data.target_hz,
            window_seconds=data.window_seconds,
            overlap_fraction=data.overlap_fraction,
            policy=data.split_policy,
            fixed_lists=data.fixed_lists,
            num_classes=num_classes,
            profile=profile,
        )

    def load_checkpoint(self, config: RunConfig) -> Checkpoint:
        if not config.checkpoint:
            raise ConfigError("No checkpoint given")
        checkpoint = Checkpoint.load(config.checkpoint)
        self.logger.info(f"Loaded checkpoint {config.checkpoint} ({len(checkpoint.tensors)} tensors)")
        return checkpoint

    def epoch_logger(self, stage: str, total: int) -> Callable[[Dict[str, Any]], None]:
        """Per-epoch callback writing one flushed log line."""
        run_logger = self.runner.logger

        def log_epoch(record: Dict[str, Any]) -> None:
            accuracy = record.get("train_accuracy")
            if accuracy is None and "val_mean_f1" in record:
                accuracy = [record["val_mean_f1"]]
            run_logger.epoch(
                stage,
                record["epoch"],
                total,
                record["train_loss"],
                accuracy=accuracy,
                learning_rate=record.get("learning_rate"),
                val_loss=record.get("val_loss"),
            )

        return log_epoch

    def save_json(self, out_dir: Path, name: str, data: Mapping[str, Any]) -> Path:
        path = write_json(out_dir / name, data)
        self.runner.logger.artifact(path)
        return path

    def save_history(self, out_dir: Path, history) -> Path:
        return self.save_json(out_dir, HISTORY_FILE, {"epochs": list(history)})

    def save_report(self, out_dir: Path, report: Mapping[str, Any]) -> Path:
        return self.save_json(out_dir, REPORT_FILE, report)

    def save_checkpoint(self, out_dir: Path, name: str, checkpoint: Checkpoint) -> Path:
        path = checkpoint.save(out_dir / name)
        self.runner.logger.artifact(path)
        return path

    def data_summary(self, data: PreparedData) -> Dict[str, Any]:
        return {
            "windows": {"train": len(data.train), "val": len(data.val), "test": len(data.test)},
            "window_length": data.window_length,
            "channels": list(data.channels),
            "num_classes": data.num_classes,
            "split": data.split.to_dict(),
            "normalization": data.stats.to_dict(),
        }
