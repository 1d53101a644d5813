from __future__ import annotations

import glob
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from config.config import ERROR_MESSAGES, UNLABELED
from utils.error_handler import ConfigError, DataError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class Recording:
    """
    One subject's multichannel stream.

    Attributes:
        subject_id (str): Participant identifier
        sample_rate_hz (float): Sampling rate of ``samples``
        channels (List[str]): Channel names, one per column of ``samples``
        samples (np.ndarray): [num_timesteps x num_channels] sensor values
        labels (np.ndarray): [num_timesteps] class indices, ``UNLABELED`` for none
        timestamps (np.ndarray): [num_timesteps] seconds, strictly increasing
    """

    subject_id: str
    sample_rate_hz: float
    channels: List[str]
    samples: np.ndarray
    labels: np.ndarray
    timestamps: np.ndarray = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise DataError(f"Recording {self.subject_id} must be a non-empty [timesteps x channels] matrix")
        if self.samples.shape[1] != len(self.channels):
            raise DataError(f"Recording {self.subject_id} has {self.samples.shape[1]} columns for {len(self.channels)} channels")
        if self.labels.shape != (self.samples.shape[0],):
            raise DataError(f"Recording {self.subject_id}: labels length differs from sample rows")
        if self.sample_rate_hz <= 0:
            raise DataError(f"Recording {self.subject_id}: sample rate must be positive")
        if self.timestamps is None:
            self.timestamps = np.arange(self.samples.shape[0], dtype=np.float64) / self.sample_rate_hz
        else:
            self.timestamps = np.asarray(self.timestamps, dtype=np.float64)

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass
class RecordingSet:
    """Per-subject recordings sharing one channel list."""

    recordings: List[Recording] = field(default_factory=list)

    def __post_init__(self):
        if not self.recordings:
            raise DataError(ERROR_MESSAGES['no_recordings'])
        channels = self.recordings[0].channels
        for rec in self.recordings[1:]:
            if list(rec.channels) != list(channels):
                raise DataError(
                    f"Recording {rec.subject_id} has channels {rec.channels}, expected {channels}"
                )

    def __len__(self) -> int:
        return len(self.recordings)

    def __iter__(self):
        return iter(self.recordings)

    @property
    def channels(self) -> List[str]:
        return list(self.recordings[0].channels)

    @property
    def sample_rate_hz(self) -> float:
        """Common sample rate; raises when recordings still disagree."""
        rates = {rec.sample_rate_hz for rec in self.recordings}
        if len(rates) != 1:
            raise DataError(f"Recordings have different sample rates {sorted(rates)}; resample first")
        return rates.pop()

    @property
    def subject_ids(self) -> List[str]:
        """Distinct subject ids in first-appearance order."""
        return list(dict.fromkeys(rec.subject_id for rec in self.recordings))

    def subset(self, subject_ids: Iterable[str]) -> "RecordingSet":
        wanted = set(subject_ids)
        return RecordingSet([rec for rec in self.recordings if rec.subject_id in wanted])

    def max_label(self) -> int:
        return int(max(rec.labels.max() for rec in self.recordings))


def _expand_paths(path: Union[PathLike, Sequence[PathLike]]) -> List[Path]:
    if isinstance(path, (str, Path)):
        candidates = [path]
    else:
        candidates = list(path)

    files = []
    for candidate in candidates:
        candidate = Path(candidate)
        if candidate.is_dir():
            files.extend(Path(p) for p in sorted(glob.glob(os.path.join(candidate, "*.csv"))))
        elif candidate.exists():
            files.append(candidate)
        else:
            raise DataError(f"Recording file not found: {candidate}")
    return files


def _read_csv(file: Path) -> List[Recording]:
    try:
        frame = pd.read_csv(file, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return []

    columns = [c.strip() for c in frame.columns]
    if len(columns) < 4 or columns[0] != "subject" or columns[1] != "timestamp" or columns[-1] != "label":
        raise DataError(f"{file}: header must be 'subject,timestamp,<channel...>,label'")
    frame.columns = columns
    channels = columns[2:-1]

    numeric = frame[["timestamp", *channels, "label"]].apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().any(axis=1) | ~np.isfinite(numeric.to_numpy(dtype=np.float64)).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DataError(f"{file}: unparseable or non-finite value in row {row}")

    labels = numeric["label"].to_numpy()
    if not np.all(labels == np.round(labels)):
        row = int(np.flatnonzero(labels != np.round(labels))[0])
        raise DataError(f"{file}: non-integer label in row {row}")

    recordings = []
    for subject, rows in frame.groupby("subject", sort=False):
        values = numeric.loc[rows.index]
        timestamps = values["timestamp"].to_numpy(dtype=np.float64)
        if len(timestamps) > 1 and np.any(np.diff(timestamps) <= 0):
            row = int(rows.index[1 + int(np.flatnonzero(np.diff(timestamps) <= 0)[0])])
            raise DataError(f"{file}: non-monotonic timestamp for subject {subject} at row {row}")
        if len(timestamps) > 1:
            rate = 1.0 / float(np.median(np.diff(timestamps)))
        else:
            rate = 1.0
        recordings.append(Recording(
            subject_id=str(subject).strip(),
            sample_rate_hz=rate,
            channels=channels,
            samples=values[channels].to_numpy(dtype=np.float64),
            labels=values["label"].to_numpy().astype(np.int64),
            timestamps=timestamps,
        ))
    return recordings


def load_recordings(path: Union[PathLike, Sequence[PathLike]]) -> RecordingSet:
    """
    Load canonical recording CSV files.

    Args:
        path: A CSV file, a directory of CSV files, or a list of either

    Returns:
        RecordingSet: One recording per subject group per file

    Raises:
        DataError: Missing file, empty input, bad rows, non-monotonic timestamps,
            or channel lists that differ between files
    """
    files = _expand_paths(path)
    recordings: List[Recording] = []
    channels = None
    for file in files:
        found = _read_csv(file)
        if found and channels is not None and found[0].channels != channels:
            raise DataError(
                f"{file}: {len(found[0].channels)} channels, earlier files have {len(channels)}"
            )
        if found:
            channels = found[0].channels
        recordings.extend(found)

    if not recordings:
        raise DataError(ERROR_MESSAGES['no_recordings'])

    logger.info(f"Loaded {len(recordings)} recordings with {len(channels)} channels from {len(files)} file(s)")
    return RecordingSet(recordings)


def save_recordings(rs: RecordingSet, path: PathLike) -> Path:
    """Write a RecordingSet as one canonical CSV file."""
    frames = []
    for rec in rs:
        frame = pd.DataFrame(rec.samples, columns=rec.channels)
        frame.insert(0, "timestamp", rec.timestamps)
        frame.insert(0, "subject", rec.subject_id)
        frame["label"] = rec.labels
        frames.append(frame)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format="%.10g", encoding="utf-8")
    return path


def _nearest_indices(source: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Index of the nearest source time for each grid time; ties go to the earlier sample."""
    right = np.clip(np.searchsorted(source, grid, side="left"), 0, len(source) - 1)
    left = np.clip(right - 1, 0, len(source) - 1)
    take_left = np.abs(grid - source[left]) <= np.abs(source[right] - grid)
    return np.where(take_left, left, right)


def resample(rs: RecordingSet, target_hz: float) -> RecordingSet:
    """
    Resample every recording onto a uniform grid at ``target_hz``.

    Channels are linearly interpolated; labels take the value of the nearest
    source timestep. The grid starts at each recording's first timestamp.

    Args:
        rs: Recordings to resample
        target_hz: Output sample rate

    Returns:
        RecordingSet: Recordings at ``target_hz``
    """
    if target_hz is None or target_hz <= 0:
        raise ConfigError(ERROR_MESSAGES['bad_rate'])

    out = []
    for rec in rs:
        t = rec.timestamps
        duration = float(t[-1] - t[0])
        # Small tolerance keeps the final grid point when duration * rate is integral
        count = int(np.floor(duration * target_hz + 1e-9)) + 1
        grid = t[0] + np.arange(count, dtype=np.float64) / target_hz
        samples = np.column_stack([np.interp(grid, t, rec.samples[:, c]) for c in range(rec.samples.shape[1])])
        labels = rec.labels[_nearest_indices(t, grid)]
        out.append(replace(rec, sample_rate_hz=float(target_hz), samples=samples, labels=labels, timestamps=grid))
    return RecordingSet(out)


__all__ = ["Recording", "RecordingSet", "load_recordings", "save_recordings", "resample", "UNLABELED"]
