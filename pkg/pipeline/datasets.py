"""Benchmark dataset profiles and the end-to-end preparation of a RecordingSet."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from config.config import OVERLAP_FRACTION, TARGET_RATE_HZ, USC_HAD_SPLIT, WINDOW_SECONDS
from pipeline.normalization import NormalizationStats, apply_normalization, fit_normalization
from pipeline.recordings import RecordingSet, resample
from pipeline.splits import SplitAssignment, SplitPolicy, split_by_subject
from pipeline.windows import WindowDataset, segment_windows
from utils.error_handler import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetProfile:
    """Facts about a benchmark used to check a converted dataset and pick its split."""

    name: str
    num_subjects: int
    class_names: Sequence[str]
    split_policy: SplitPolicy = SplitPolicy.FRACTIONAL
    fixed_split: Optional[Dict[str, Sequence[str]]] = None

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


PROFILES: Dict[str, DatasetProfile] = {
    "mobiact": DatasetProfile(
        name="mobiact",
        num_subjects=61,
        class_names=(
            "sitting", "walking", "jogging", "jumping", "stairs_up", "stairs_down",
            "stand_to_sit", "sitting_on_chair", "sit_to_stand", "car_step_in", "car_step_out",
        ),
    ),
    "motionsense": DatasetProfile(
        name="motionsense",
        num_subjects=24,
        class_names=("walking", "jogging", "upstairs", "downstairs", "sitting", "standing"),
    ),
    "uci_har": DatasetProfile(
        name="uci_har",
        num_subjects=30,
        class_names=("walking", "walking_upstairs", "walking_downstairs", "sitting", "standing", "lying"),
    ),
    "usc_had": DatasetProfile(
        name="usc_had",
        num_subjects=14,
        class_names=(
            "walking_forward", "walking_left", "walking_right", "walking_upstairs", "walking_downstairs",
            "running_forward", "jumping", "sitting", "standing", "sleeping", "elevator_up", "elevator_down",
        ),
        split_policy=SplitPolicy.FIXED_LIST,
        fixed_split=USC_HAD_SPLIT,
    ),
}


def get_profile(name: str) -> DatasetProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ConfigError(f"Unknown dataset profile '{name}'. Known: {sorted(PROFILES)}") from None


@dataclass
class PreparedData:
    """Windowed, normalized train/val/test splits ready for training."""

    train: WindowDataset
    val: WindowDataset
    test: WindowDataset
    stats: NormalizationStats
    split: SplitAssignment
    num_classes: int
    channels: List[str]

    @property
    def window_length(self) -> int:
        return self.train.window_length

    @property
    def num_channels(self) -> int:
        return len(self.channels)


def prepare_dataset(
    rs: RecordingSet,
    seed: int = 0,
    target_hz: float = TARGET_RATE_HZ,
    window_seconds: float = WINDOW_SECONDS,
    overlap_fraction: float = OVERLAP_FRACTION,
    policy: SplitPolicy | str = SplitPolicy.FRACTIONAL,
    fixed_lists: Optional[Dict[str, Sequence[str]]] = None,
    num_classes: Optional[int] = None,
    profile: Optional[DatasetProfile] = None,
) -> PreparedData:
    """
    Run the full preparation chain on raw recordings.

    Resample to ``target_hz``, split by subject, fit normalization on the train
    split only, apply it to every split, then segment each split into windows.
    """
    if profile is not None:
        policy = profile.split_policy
        fixed_lists = profile.fixed_split
        num_classes = num_classes or profile.num_classes
        if len(rs.subject_ids) != profile.num_subjects:
            logger.warning(
                f"{profile.name}: expected {profile.num_subjects} subjects, found {len(rs.subject_ids)}"
            )

    rs = resample(rs, target_hz)
    split = split_by_subject(rs, policy, seed, fixed_lists)
    stats = fit_normalization(rs.subset(split.train))

    def windows_for(subjects) -> WindowDataset:
        normalized = apply_normalization(rs.subset(subjects), stats)
        return segment_windows(normalized, window_seconds, overlap_fraction)

    train, val, test = windows_for(split.train), windows_for(split.val), windows_for(split.test)
    classes = num_classes if num_classes is not None else rs.max_label() + 1
    logger.info(
        f"Prepared {len(train)}/{len(val)}/{len(test)} train/val/test windows "
        f"(T={train.window_length}, {classes} classes, subjects {len(split.train)}/{len(split.val)}/{len(split.test)})"
    )
    return PreparedData(train, val, test, stats, split, classes, rs.channels)
