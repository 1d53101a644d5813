from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.config import TEST_FRACTION, USC_HAD_SPLIT, VAL_FRACTION
from pipeline.recordings import RecordingSet
from utils.error_handler import ConfigError, DataError


class SplitPolicy(str, Enum):
    FRACTIONAL = "fractional"
    FIXED_LIST = "fixed_list"


@dataclass(frozen=True)
class SplitAssignment:
    """
    Disjoint train/validation/test subject sets.

    Attributes:
        train (Tuple[str, ...]): Training subjects
        val (Tuple[str, ...]): Validation subjects
        test (Tuple[str, ...]): Test subjects
        seed (int): Seed that produced the assignment
        policy (SplitPolicy): How the assignment was made
    """

    train: Tuple[str, ...]
    val: Tuple[str, ...]
    test: Tuple[str, ...]
    seed: int
    policy: SplitPolicy

    def to_dict(self) -> Dict[str, object]:
        return {
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
            "seed": self.seed,
            "policy": self.policy.value,
        }


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _sort_key(subject: str):
    # numeric ids order numerically so "10" follows "9"
    return (0, int(subject), subject) if subject.isdigit() else (1, 0, subject)


def split_by_subject(
    subjects: RecordingSet | Iterable[str],
    policy: SplitPolicy | str = SplitPolicy.FRACTIONAL,
    seed: int = 0,
    fixed_lists: Optional[Dict[str, Sequence[str]]] = None,
) -> SplitAssignment:
    """
    Assign every subject to exactly one of train/val/test.

    Args:
        subjects: A RecordingSet or the subject ids themselves
        policy: ``fractional`` (20 % test, then 20 % of the rest for validation)
            or ``fixed_list`` (explicit lists, USC-HAD protocol by default)
        seed: Seed for the fractional shuffle
        fixed_lists: ``{"train": [...], "val": [...], "test": [...]}`` for fixed_list

    Returns:
        SplitAssignment: Deterministic for a given seed
    """
    policy = SplitPolicy(policy)
    ids = subjects.subject_ids if isinstance(subjects, RecordingSet) else list(dict.fromkeys(str(s) for s in subjects))
    ordered = sorted(ids, key=_sort_key)

    if policy is SplitPolicy.FIXED_LIST:
        lists = fixed_lists or USC_HAD_SPLIT
        present = set(ordered)
        parts = {name: tuple(s for s in map(str, lists.get(name, [])) if s in present) for name in ("train", "val", "test")}
        assigned: List[str] = [s for part in parts.values() for s in part]
        if len(assigned) != len(set(assigned)):
            raise ConfigError("fixed_list split assigns a subject to more than one split")
        missing = [s for s in ordered if s not in set(assigned)]
        if missing:
            raise DataError(f"Subjects {missing} are not assigned by the fixed_list split")
        return SplitAssignment(parts["train"], parts["val"], parts["test"], seed, policy)

    n = len(ordered)
    n_test = round_half_up(TEST_FRACTION * n)
    n_val = round_half_up(VAL_FRACTION * (n - n_test))
    n_train = n - n_test - n_val
    if n < 3 or min(n_test, n_val, n_train) < 1:
        raise DataError(
            f"Fractional split of {n} subjects gives test={n_test}, val={n_val}, train={n_train}; every split must be non-empty"
        )

    permuted = [ordered[i] for i in np.random.default_rng(seed).permutation(n)]
    test = tuple(sorted(permuted[:n_test], key=_sort_key))
    val = tuple(sorted(permuted[n_test:n_test + n_val], key=_sort_key))
    train = tuple(sorted(permuted[n_test + n_val:], key=_sort_key))
    return SplitAssignment(train, val, test, seed, policy)
