from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from config.config import ERROR_MESSAGES, UNLABELED
from pipeline.recordings import RecordingSet
from utils.error_handler import ConfigError, DataError

logger = logging.getLogger(__name__)


@dataclass
class WindowDataset:
    """
    Fixed-length windows cut from recordings.

    Attributes:
        windows (np.ndarray): [N x T x C] float32 samples
        labels (np.ndarray): [N] class indices, ``UNLABELED`` when the majority is unlabeled
        subject_ids (np.ndarray): [N] subject id of each window
        window_seconds (float): Window duration
        overlap_fraction (float): Fraction of T shared by consecutive windows
        sample_rate_hz (float): Sample rate of the source recordings
    """

    windows: np.ndarray
    labels: np.ndarray
    subject_ids: np.ndarray
    window_seconds: float
    overlap_fraction: float
    sample_rate_hz: float

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.subject_ids = np.asarray(self.subject_ids, dtype=object)
        if self.windows.ndim != 3:
            raise DataError(f"windows must be [N x T x C], got shape {self.windows.shape}")
        if not (len(self.labels) == len(self.subject_ids) == self.windows.shape[0]):
            raise DataError("windows, labels and subject_ids must have the same length")

    def __len__(self) -> int:
        return self.windows.shape[0]

    @property
    def window_length(self) -> int:
        return self.windows.shape[1]

    @property
    def num_channels(self) -> int:
        return self.windows.shape[2]

    def subset(self, indices: Sequence[int]) -> "WindowDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            windows=self.windows[indices],
            labels=self.labels[indices],
            subject_ids=self.subject_ids[indices],
        )

    def labeled(self) -> "WindowDataset":
        """Windows carrying a class label."""
        return self.subset(np.flatnonzero(self.labels != UNLABELED))

    def class_counts(self, num_classes: int) -> np.ndarray:
        labeled = self.labels[self.labels != UNLABELED]
        return np.bincount(labeled, minlength=num_classes)


def window_length(window_seconds: float, sample_rate_hz: float) -> int:
    return int(math.floor(window_seconds * sample_rate_hz + 0.5))


def window_stride(length: int, overlap_fraction: float) -> int:
    return length - int(math.floor(length * overlap_fraction))


def count_windows(length: int, window: int, stride: int) -> int:
    """floor((L - T) / stride) + 1 windows for L >= T, else 0."""
    if length < window:
        return 0
    return (length - window) // stride + 1


def majority_label(labels: np.ndarray) -> int:
    """
    Most frequent label of a window.

    Ties go to the tied label occurring latest, so a tie that includes the
    final timestep's label resolves to it.
    """
    values, counts = np.unique(labels, return_counts=True)
    tied = values[counts == counts.max()]
    if len(tied) == 1:
        return int(tied[0])
    last_seen = {int(v): int(np.flatnonzero(labels == v)[-1]) for v in tied}
    return max(last_seen, key=last_seen.get)


def segment_windows(rs: RecordingSet, window_seconds: float, overlap_fraction: float) -> WindowDataset:
    """
    Cut every recording into overlapping windows.

    Args:
        rs: Recordings at a common sample rate
        window_seconds: Window duration in seconds
        overlap_fraction: Fraction of each window shared with the next, in [0, 1)

    Returns:
        WindowDataset: Windows of length round(window_seconds * rate)
    """
    if not 0.0 <= overlap_fraction < 1.0:
        raise ConfigError(ERROR_MESSAGES['bad_overlap'])
    rate = rs.sample_rate_hz
    T = window_length(window_seconds, rate)
    if T < 1:
        raise ConfigError(f"window of {window_seconds}s at {rate}Hz has no samples")
    stride = window_stride(T, overlap_fraction)

    windows, labels, subjects = [], [], []
    for rec in rs:
        n = count_windows(len(rec), T, stride)
        if n == 0:
            logger.warning(f"Recording {rec.subject_id} has {len(rec)} timesteps, shorter than window {T}; no windows")
            continue
        starts = np.arange(n) * stride
        views = np.lib.stride_tricks.sliding_window_view(rec.samples, T, axis=0)[starts]
        # sliding_window_view puts the window axis last: [n, C, T] -> [n, T, C]
        windows.append(np.transpose(views, (0, 2, 1)))
        labels.extend(majority_label(rec.labels[s:s + T]) for s in starts)
        subjects.extend([rec.subject_id] * n)

    channels = len(rs.channels)
    return WindowDataset(
        windows=np.concatenate(windows, axis=0) if windows else np.zeros((0, T, channels)),
        labels=np.asarray(labels, dtype=np.int64),
        subject_ids=np.asarray(subjects, dtype=object),
        window_seconds=window_seconds,
        overlap_fraction=overlap_fraction,
        sample_rate_hz=rate,
    )


def sample_labeled_subset(
    ds: WindowDataset,
    per_class: int,
    seed: int,
    num_classes: Optional[int] = None,
) -> WindowDataset:
    """
    Draw ``min(per_class, available)`` windows per class without replacement.

    Args:
        ds: Labeled windows
        per_class: Label budget per class
        seed: Sampling seed
        num_classes: Classes to sample from; defaults to the labels present

    Returns:
        WindowDataset: The sampled windows, grouped by class
    """
    if per_class < 1:
        raise ConfigError(f"per_class must be a positive integer, got {per_class}")
    labeled = ds.labels != UNLABELED
    if not labeled.any():
        raise DataError("Dataset has no labeled windows to sample from")
    classes = range(num_classes) if num_classes is not None else np.unique(ds.labels[labeled])

    rng = np.random.default_rng(seed)
    chosen = []
    for c in classes:
        candidates = np.flatnonzero(ds.labels == c)
        if len(candidates) == 0:
            logger.warning(f"Class {c} has no windows; excluded from the labeled subset")
            continue
        if len(candidates) < per_class:
            logger.warning(f"Class {c} has only {len(candidates)} windows for a budget of {per_class}; taking all")
        take = min(per_class, len(candidates))
        chosen.append(np.sort(rng.choice(candidates, size=take, replace=False)))
    return ds.subset(np.concatenate(chosen))
