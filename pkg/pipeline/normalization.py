from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List

import numpy as np

from config.config import NORMALIZATION_EPSILON
from pipeline.recordings import RecordingSet
from utils.error_handler import DataError


@dataclass(frozen=True)
class NormalizationStats:
    """Per-channel mean and population std fitted on the training split."""

    channels: List[str]
    mean: np.ndarray
    std: np.ndarray
    source_split: str = "train"

    @property
    def applied_std(self) -> np.ndarray:
        return np.maximum(self.std, NORMALIZATION_EPSILON)

    def to_dict(self) -> Dict[str, object]:
        return {
            "channels": list(self.channels),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "source_split": self.source_split,
        }


def fit_normalization(train: RecordingSet) -> NormalizationStats:
    """Mean and population std (N denominator) over all concatenated train timesteps."""
    stacked = np.concatenate([rec.samples for rec in train], axis=0)
    if stacked.shape[0] == 0:
        raise DataError("Cannot fit normalization on an empty training split")
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0, ddof=0)
    # constant channels: exact value and zero spread, so they map to exact zeros
    constant = np.ptp(stacked, axis=0) == 0
    mean = np.where(constant, stacked[0], mean)
    std = np.where(constant, 0.0, std)
    return NormalizationStats(channels=train.channels, mean=mean, std=std)


def apply_normalization(rs: RecordingSet, stats: NormalizationStats) -> RecordingSet:
    """Z-score every channel with ``stats``: ``(x - mean) / max(std, eps)``."""
    if list(rs.channels) != list(stats.channels):
        raise DataError(f"Channel mismatch: data has {rs.channels}, stats fitted on {stats.channels}")
    scale = stats.applied_std
    return RecordingSet([
        replace(rec, samples=(rec.samples - stats.mean) / scale)
        for rec in rs
    ])
