from __future__ import annotations

import copy
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch

from config.config import (
    ADAM_BETAS,
    ADAM_EPS,
    BATCH_SIZE,
    CONTEXT_DIM,
    DEFAULT_K,
    DROPOUT_P,
    ERROR_MESSAGES,
    GAR_LAYERS,
    PRETRAIN_EPOCHS,
    PRETRAIN_LR_GRID,
)
from models.checkpoint import Checkpoint, checkpoint_from_model, model_config
from models.cpc import CpcModel, forward_cpc, info_nce, pretext_accuracy, sample_anchor
from models.encoders import EncoderSpec
from pipeline.windows import WindowDataset
from utils.error_handler import ConfigError, DataError, NumericError
from utils.runtime import seeded

logger = logging.getLogger(__name__)

# Validation anchors come from their own stream so they repeat every epoch
VALIDATION_SEED_OFFSET = 7919


@dataclass
class PretrainConfig:
    """CPC pre-training settings (Adam, shuffled mini-batches, one anchor per batch)."""

    K: int = DEFAULT_K
    learning_rate: float = PRETRAIN_LR_GRID[0]
    epochs: int = PRETRAIN_EPOCHS
    batch_size: int = BATCH_SIZE
    seed: int = 0
    betas: Tuple[float, float] = ADAM_BETAS
    eps: float = ADAM_EPS
    encoder: EncoderSpec = field(default_factory=EncoderSpec)
    context_dim: int = CONTEXT_DIM
    gar_layers: int = GAR_LAYERS
    gar_dropout: float = DROPOUT_P

    def violations(self, window_length: Optional[int] = None) -> List[str]:
        problems = list(self.encoder.violations())
        if self.K < 1:
            problems.append(f"K must be a positive integer, got {self.K}")
        if window_length is not None and window_length - self.K < 1:
            problems.append(f"{ERROR_MESSAGES['no_context']} (T={window_length}, K={self.K})")
        if self.batch_size < 2:
            problems.append(f"{ERROR_MESSAGES['no_negatives']} (batch_size={self.batch_size})")
        if self.learning_rate < 0:
            problems.append("learning_rate must be non-negative")
        if self.epochs < 0:
            problems.append("epochs must be non-negative")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["betas"] = list(self.betas)
        data["encoder"] = self.encoder.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PretrainConfig":
        data = dict(data)
        if "encoder" in data and isinstance(data["encoder"], dict):
            data["encoder"] = EncoderSpec.from_dict(data["encoder"])
        if "betas" in data:
            data["betas"] = tuple(data["betas"])
        return cls(**data)


@dataclass
class PretrainResult:
    """Best checkpoint, the matching model and the per-epoch history."""

    checkpoint: Checkpoint
    model: CpcModel
    history: List[Dict[str, Any]]
    best_epoch: int


def build_model(config: PretrainConfig, in_channels: int) -> CpcModel:
    """Seeded, randomly initialized CPC network."""
    with seeded(config.seed):
        return CpcModel(
            config.encoder,
            in_channels,
            config.K,
            context_dim=config.context_dim,
            gar_layers=config.gar_layers,
            gar_dropout=config.gar_dropout,
        )


def random_checkpoint(config: PretrainConfig, in_channels: int, window_length: int) -> Checkpoint:
    """Untrained network in checkpoint form: the random-feature-extractor control."""
    model = build_model(config, in_channels)
    return checkpoint_from_model(
        model, model_config(model, window_length, seed=config.seed, epochs=0, pretrained=False)
    )


def _batches(order: np.ndarray, batch_size: int) -> List[np.ndarray]:
    batches = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
    # A lone window has no negatives
    if batches and len(batches[-1]) < 2:
        batches.pop()
    return batches


@torch.no_grad()
def evaluate_pretext(
    model: CpcModel,
    data: WindowDataset,
    seed: int,
    batch_size: int = BATCH_SIZE,
) -> Tuple[float, np.ndarray]:
    """
    Mean InfoNCE and per-step pretext accuracy over a split in eval mode.

    Batches are taken in dataset order; anchors come from ``seed``.

    Returns:
        Tuple of (window-weighted mean loss, per-step accuracy [K])
    """
    was_training = model.training
    model.eval()
    rng = np.random.default_rng(seed)
    dtype = next(model.parameters()).dtype
    total_loss, total_acc, seen = 0.0, np.zeros(model.K), 0
    try:
        for idx in _batches(np.arange(len(data)), batch_size):
            batch = torch.as_tensor(data.windows[idx], dtype=dtype)
            t = sample_anchor(data.window_length, model.K, rng)
            logits, _ = forward_cpc(model, batch, t)
            total_loss += float(info_nce(logits)) * len(idx)
            total_acc += pretext_accuracy(logits) * len(idx)
            seen += len(idx)
    finally:
        model.train(was_training)
    if seen == 0:
        return math.nan, np.full(model.K, math.nan)
    return total_loss / seen, total_acc / seen


def pretrain(
    config: PretrainConfig,
    data: WindowDataset,
    val_data: Optional[WindowDataset] = None,
    epoch_callback=None,
) -> PretrainResult:
    """
    Train a CPC network with InfoNCE and in-batch negatives.

    Each epoch shuffles the windows (seeded), draws one anchor per batch, and
    takes one Adam step per batch. After every epoch the validation split is
    scored; the returned checkpoint is the epoch with the lowest validation
    loss (training loss when no validation split is given).

    Args:
        config: Pre-training settings
        data: Training windows (labels are ignored)
        val_data: Held-out windows for model selection
        epoch_callback: Called with each finished epoch record

    Raises:
        ConfigError: Invalid settings for the window length
        DataError: Fewer windows than one batch
        NumericError: A non-finite loss; carries the epochs completed so far
    """
    problems = config.violations(data.window_length)
    if problems:
        raise ConfigError("; ".join(problems))
    if len(data) < config.batch_size:
        raise DataError(f"Dataset of {len(data)} windows is smaller than one batch of {config.batch_size}")
    if val_data is None or len(val_data) < 2:
        logger.warning("No usable validation split; selecting the epoch by training loss")
        val_data = None

    model = build_model(config, data.num_channels)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=tuple(config.betas), eps=config.eps
    )
    T = data.window_length
    windows = torch.as_tensor(data.windows)

    history: List[Dict[str, Any]] = []
    best_loss, best_epoch, best_state = math.inf, -1, copy.deepcopy(model.state_dict())

    with seeded(config.seed) as rng:
        for epoch in range(config.epochs):
            model.train()
            losses, accuracies = [], []
            for idx in _batches(rng.permutation(len(data)), config.batch_size):
                t = sample_anchor(T, config.K, rng)
                logits, _ = forward_cpc(model, windows[idx], t)
                loss = info_nce(logits)
                if not torch.isfinite(loss):
                    raise NumericError(f"Non-finite loss at epoch {epoch + 1}", history)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                losses.append(float(loss))
                accuracies.append(pretext_accuracy(logits))

            record: Dict[str, Any] = {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)),
                "train_accuracy": np.mean(accuracies, axis=0).tolist(),
            }
            if val_data is not None:
                val_loss, val_acc = evaluate_pretext(model, val_data, config.seed + VALIDATION_SEED_OFFSET, config.batch_size)
                if not math.isfinite(val_loss):
                    raise NumericError(f"Non-finite validation loss at epoch {epoch + 1}", history)
                record["val_loss"] = val_loss
                record["val_accuracy"] = val_acc.tolist()
            history.append(record)

            selection = record.get("val_loss", record["train_loss"])
            if selection < best_loss:
                best_loss, best_epoch = selection, epoch
                best_state = copy.deepcopy(model.state_dict())
            if epoch_callback is not None:
                epoch_callback(record)

    model.load_state_dict(best_state)
    model.eval()
    checkpoint = checkpoint_from_model(model, model_config(
        model,
        T,
        seed=config.seed,
        epochs=config.epochs,
        best_epoch=best_epoch,
        learning_rate=config.learning_rate,
        batch_size=config.batch_size,
        pretrained=True,
    ))
    return PretrainResult(checkpoint, model, history, best_epoch)


def tune_pretraining(
    config: PretrainConfig,
    data: WindowDataset,
    val_data: WindowDataset,
    learning_rates: Sequence[float] = PRETRAIN_LR_GRID,
    epoch_callback=None,
) -> PretrainResult:
    """Pre-train once per learning rate; keep the run with the lowest validation loss."""
    best: Optional[PretrainResult] = None
    best_loss = math.inf
    for lr in learning_rates:
        result = pretrain(replace(config, learning_rate=lr), data, val_data, epoch_callback)
        record = result.history[result.best_epoch] if result.history else {}
        loss = record.get("val_loss", record.get("train_loss", math.inf))
        logger.info(f"Pre-training lr={lr:g}: best validation loss {loss:.5f} at epoch {result.best_epoch + 1}")
        if best is None or loss < best_loss:
            best, best_loss = result, loss
    if best is None:
        raise ConfigError("Learning-rate grid is empty")
    return best
