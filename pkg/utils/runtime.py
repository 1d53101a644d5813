"""Process-wide numeric settings: determinism, thread caps and seeded RNG scopes."""

import os
import threading
from contextlib import contextmanager
from typing import Iterator

import numpy as np
import torch

from config.config import CPC_SEQ_THREADS


def worker_count(deterministic: bool) -> int:
    """Number of worker threads a sweep may use."""
    if deterministic:
        return 1
    cap = CPC_SEQ_THREADS if CPC_SEQ_THREADS > 0 else (os.cpu_count() or 1)
    return max(1, cap)


def configure_determinism(deterministic: bool) -> None:
    """Select deterministic single-threaded numerics or parallel execution."""
    torch.use_deterministic_algorithms(deterministic)
    if deterministic:
        torch.set_num_threads(1)
    elif CPC_SEQ_THREADS > 0:
        torch.set_num_threads(CPC_SEQ_THREADS)


# torch has one global generator per process; seeded scopes take turns on it
_RNG_LOCK = threading.RLock()


@contextmanager
def seeded(seed: int) -> Iterator[np.random.Generator]:
    """Seed torch inside a forked RNG scope and yield a matching numpy generator.

    The global torch generator is restored on exit. Scopes are serialized
    across threads, so every draw inside one (weight init, dropout masks)
    depends on ``seed`` alone; sweep workers still overlap on the unseeded
    work such as scoring.
    """
    with _RNG_LOCK:
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            yield np.random.default_rng(seed)
