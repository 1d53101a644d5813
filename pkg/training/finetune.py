from __future__ import annotations

import copy
import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from config.config import (
    BATCH_SIZE,
    DROPOUT_P,
    FINETUNE_EPOCHS,
    FINETUNE_LR_GRID,
    LR_DECAY_EVERY,
    LR_DECAY_FACTOR,
    UNLABELED,
)
from evaluation.metrics import MetricsReport, compute_metrics
from models.checkpoint import Checkpoint, build_cpc_model, load_tensors
from models.classifier import ActivityClassifier, FreezePolicy, predict
from models.encoders import EncoderSpec
from pipeline.windows import WindowDataset
from training.pretrain import PretrainConfig, random_checkpoint
from utils.error_handler import ConfigError, DataError, NumericError
from utils.runtime import seeded

logger = logging.getLogger(__name__)


@dataclass
class FinetuneConfig:
    """Classifier training settings: Adam, cross-entropy, step decay of the learning rate."""

    learning_rate: float = FINETUNE_LR_GRID[0]
    epochs: int = FINETUNE_EPOCHS
    decay_factor: float = LR_DECAY_FACTOR
    decay_every: int = LR_DECAY_EVERY
    batch_size: int = BATCH_SIZE
    seed: int = 0
    dropout_p: float = DROPOUT_P

    def violations(self) -> List[str]:
        problems = []
        if self.learning_rate < 0:
            problems.append("finetune learning_rate must be non-negative")
        if self.epochs < 0:
            problems.append("finetune epochs must be non-negative")
        if self.decay_every < 1:
            problems.append("decay_every must be a positive number of epochs")
        if self.batch_size < 2:
            problems.append("finetune batch_size must be >= 2 for batch normalization")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FinetuneConfig":
        return cls(**data)


def learning_rate_factor(config: FinetuneConfig, epoch: int) -> float:
    return config.decay_factor ** (epoch // config.decay_every)


def learning_rate_at(config: FinetuneConfig, epoch: int) -> float:
    """base x decay ** floor(epoch / decay_every)."""
    return config.learning_rate * learning_rate_factor(config, epoch)


@dataclass
class FinetuneResult:
    classifier: ActivityClassifier
    report: Optional[MetricsReport]
    history: List[Dict[str, Any]]
    policy: FreezePolicy
    config: FinetuneConfig

    def container_config(self, backbone_config: Dict[str, Any]) -> Dict[str, Any]:
        """Config block stored next to the classifier tensors."""
        return {
            "kind": "classifier",
            "backbone": dict(backbone_config),
            "policy": self.policy.value,
            "num_classes": self.classifier.num_classes,
            "finetune": self.config.to_dict(),
        }


def build_classifier(
    checkpoint: Checkpoint,
    policy: FreezePolicy,
    num_classes: int,
    seed: int,
    dropout_p: float = DROPOUT_P,
) -> ActivityClassifier:
    """
    Fresh classifier on the checkpoint's architecture.

    Everything starts from a seeded random initialization; the checkpoint's
    weights are copied in only for the layers the policy freezes.
    """
    with seeded(seed):
        backbone = build_cpc_model(checkpoint.config)
        classifier = ActivityClassifier(backbone, num_classes, dropout_p=dropout_p)

    policy = FreezePolicy(policy)
    prefixes = [f"enc.layer{i}." for i in range(1, policy.frozen_encoder_layers + 1)]
    if policy.freezes_gar:
        prefixes.append("gar.")
    if prefixes:
        load_tensors(classifier, checkpoint.tensors, prefixes)
    classifier.freeze(policy)
    return classifier


def load_classifier(container: Checkpoint) -> ActivityClassifier:
    """Rebuild a trained classifier saved with ``FinetuneResult.container_config``."""
    config = container.config
    if config.get("kind") != "classifier":
        raise DataError("Container does not hold a classifier")
    backbone = build_cpc_model(config["backbone"])
    classifier = ActivityClassifier(backbone, int(config["num_classes"]), dropout_p=config["finetune"]["dropout_p"])
    load_tensors(classifier, container.tensors)
    classifier.freeze(FreezePolicy(config["policy"]))
    classifier.eval()
    return classifier


def evaluate_classifier(classifier: ActivityClassifier, data: WindowDataset, num_classes: int) -> MetricsReport:
    labeled = data.labeled()
    if len(labeled) == 0:
        raise DataError("No labeled windows to evaluate")
    return compute_metrics(labeled.labels, predict(classifier, labeled.windows), num_classes)


def _check_labels(data: WindowDataset, num_classes: int) -> None:
    if len(data) == 0:
        raise DataError("Labeled set is empty")
    if np.any(data.labels == UNLABELED):
        raise DataError("Labeled set contains unlabeled windows")
    if np.any(data.labels < 0) or np.any(data.labels >= num_classes):
        raise DataError(f"Labels must lie in [0, {num_classes}), found {sorted(set(data.labels.tolist()))}")


def train_classifier(
    checkpoint: Checkpoint,
    labeled: WindowDataset,
    policy: FreezePolicy,
    config: FinetuneConfig,
    num_classes: int,
    val_data: Optional[WindowDataset] = None,
    epoch_callback=None,
) -> FinetuneResult:
    """
    Train the MLP head (and any non-frozen backbone layers) with cross-entropy.

    When a validation split is given it is scored after every epoch and the
    epoch with the highest validation mean F1 is kept.

    Args:
        checkpoint: Pre-trained (or random) CPC checkpoint
        labeled: Labeled training windows
        policy: Which pre-trained weights stay frozen
        config: Fine-tuning settings
        num_classes: Size of the target label set
        val_data: Optional validation windows
        epoch_callback: Called with each finished epoch record

    Returns:
        FinetuneResult with the validation report (None without a validation split)
    """
    problems = config.violations()
    if problems:
        raise ConfigError("; ".join(problems))
    _check_labels(labeled, num_classes)
    in_channels = int(checkpoint.config.get("in_channels", labeled.num_channels))
    if in_channels != labeled.num_channels:
        raise DataError(f"Checkpoint expects {in_channels} channels, data has {labeled.num_channels}")

    policy = FreezePolicy(policy)
    classifier = build_classifier(checkpoint, policy, num_classes, config.seed, config.dropout_p)
    trainable = [p for p in classifier.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(trainable, lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lambda e: learning_rate_factor(config, e))

    windows = torch.as_tensor(labeled.windows)
    targets = torch.as_tensor(labeled.labels)
    history: List[Dict[str, Any]] = []
    best_f1, best_state, best_report = -math.inf, None, None

    with seeded(config.seed) as rng:
        for epoch in range(config.epochs):
            classifier.train()
            lr = optimizer.param_groups[0]["lr"]
            order = rng.permutation(len(labeled))
            batches = [order[i:i + config.batch_size] for i in range(0, len(order), config.batch_size)]
            losses = []
            for idx in batches:
                # batch normalization needs more than one sample per batch
                if len(idx) < 2:
                    continue
                loss = F.cross_entropy(classifier(windows[idx]), targets[idx])
                if not torch.isfinite(loss):
                    raise NumericError(f"Non-finite classifier loss at epoch {epoch + 1}", history)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                losses.append(float(loss))
            scheduler.step()

            record: Dict[str, Any] = {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)) if losses else math.nan,
                "learning_rate": lr,
            }
            if val_data is not None and len(val_data.labeled()):
                report = evaluate_classifier(classifier, val_data, num_classes)
                record["val_mean_f1"] = report.mean_f1
                if report.mean_f1 > best_f1:
                    best_f1, best_report = report.mean_f1, report
                    best_state = copy.deepcopy(classifier.state_dict())
            history.append(record)
            if epoch_callback is not None:
                epoch_callback(record)

    if best_state is not None:
        classifier.load_state_dict(best_state)
    elif val_data is not None and len(val_data.labeled()):
        best_report = evaluate_classifier(classifier, val_data, num_classes)
    classifier.eval()
    return FinetuneResult(classifier, best_report, history, policy, config)


def train_end_to_end(
    spec: EncoderSpec,
    labeled: WindowDataset,
    config: FinetuneConfig,
    num_classes: int,
    pretrain_config: Optional[PretrainConfig] = None,
    val_data: Optional[WindowDataset] = None,
    epoch_callback=None,
) -> FinetuneResult:
    """Supervised baseline: the same architecture, randomly initialized and trained end to end."""
    architecture = replace(pretrain_config or PretrainConfig(), encoder=spec, seed=config.seed)
    checkpoint = random_checkpoint(architecture, labeled.num_channels, labeled.window_length)
    return train_classifier(checkpoint, labeled, FreezePolicy.NONE, config, num_classes, val_data, epoch_callback)


def tune_classifier(
    checkpoint: Checkpoint,
    labeled: WindowDataset,
    policy: FreezePolicy,
    config: FinetuneConfig,
    num_classes: int,
    val_data: WindowDataset,
    learning_rates: Sequence[float] = FINETUNE_LR_GRID,
) -> FinetuneResult:
    """Train once per learning rate; keep the run with the highest validation mean F1."""
    best: Optional[FinetuneResult] = None
    for lr in learning_rates:
        result = train_classifier(checkpoint, labeled, policy, replace(config, learning_rate=lr), num_classes, val_data)
        score = result.report.mean_f1 if result.report is not None else -math.inf
        logger.info(f"Fine-tuning lr={lr:g}: validation mean F1 {score:.4f}")
        if best is None or score > (best.report.mean_f1 if best.report is not None else -math.inf):
            best = result
    if best is None:
        raise ConfigError("Learning-rate grid is empty")
    return best
