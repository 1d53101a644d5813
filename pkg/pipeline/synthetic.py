"""Desk-scale stand-in for the HAR benchmarks: regime-switching multichannel oscillations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from pipeline.recordings import Recording, RecordingSet
from utils.error_handler import ConfigError


@dataclass
class SyntheticConfig:
    """
    Generator settings.

    Each class is a regime with its own base frequency, per-channel amplitude
    profile and inter-channel phase offsets. Subjects add a random phase, an
    amplitude scale and a small frequency jitter. Labels switch regime after
    dwell times drawn uniformly from [min_dwell_s, max_dwell_s].
    """

    num_subjects: int = 10
    num_classes: int = 4
    duration_s: float = 120.0
    rate_hz: float = 30.0
    noise_std: float = 0.1
    seed: int = 0
    num_channels: int = 6
    min_dwell_s: float = 2.0
    max_dwell_s: float = 8.0
    amplitude_jitter: float = 0.2
    frequency_jitter: float = 0.05
    class_frequencies: Optional[List[float]] = field(default=None)

    def validate(self) -> None:
        problems = []
        if self.num_classes < 2:
            problems.append("num_classes must be >= 2")
        if self.num_subjects < 1:
            problems.append("num_subjects must be >= 1")
        if self.num_channels < 1:
            problems.append("num_channels must be >= 1")
        if self.duration_s <= 0 or self.rate_hz <= 0:
            problems.append("duration_s and rate_hz must be positive")
        if self.noise_std < 0 or self.amplitude_jitter < 0 or self.frequency_jitter < 0:
            problems.append("noise_std and jitters must be non-negative")
        if self.min_dwell_s < 2.0 or self.max_dwell_s < self.min_dwell_s:
            problems.append("dwell times must satisfy 2 <= min_dwell_s <= max_dwell_s")
        if self.class_frequencies is not None and len(self.class_frequencies) != self.num_classes:
            problems.append("class_frequencies needs one entry per class")
        if self.class_frequencies is not None and any(f <= 0 for f in self.class_frequencies):
            problems.append("class_frequencies must be positive")
        if problems:
            raise ConfigError("Invalid synthetic config: " + "; ".join(problems))

    def frequencies(self) -> np.ndarray:
        if self.class_frequencies is not None:
            return np.asarray(self.class_frequencies, dtype=np.float64)
        # Distinct, well separated and below the 15 Hz Nyquist limit at 30 Hz
        return np.linspace(0.6, 4.0, self.num_classes)


def _regime_schedule(rng: np.random.Generator, config: SyntheticConfig, n: int) -> np.ndarray:
    labels = np.empty(n, dtype=np.int64)
    start, current = 0, int(rng.integers(config.num_classes))
    while start < n:
        dwell = int(round(rng.uniform(config.min_dwell_s, config.max_dwell_s) * config.rate_hz))
        labels[start:start + dwell] = current
        start += dwell
        # Next regime always differs from the current one
        current = (current + int(rng.integers(1, config.num_classes))) % config.num_classes
    return labels


def generate_synthetic(config: SyntheticConfig) -> RecordingSet:
    """Generate one labeled recording per subject; bit-identical for a given seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    C, K = config.num_channels, config.num_classes
    freqs = config.frequencies()

    # Class regimes are shared by all subjects
    amplitudes = rng.uniform(0.5, 1.5, size=(K, C))
    phases = rng.uniform(0.0, 2 * np.pi, size=(K, C))
    harmonic = rng.uniform(0.0, 0.5, size=(K, C))

    n = int(round(config.duration_s * config.rate_hz))
    t = np.arange(n, dtype=np.float64) / config.rate_hz
    channels = [f"ch{i}" for i in range(C)]

    recordings = []
    for subject in range(config.num_subjects):
        subject_phase = rng.uniform(0.0, 2 * np.pi)
        subject_scale = 1.0 + rng.uniform(-config.amplitude_jitter, config.amplitude_jitter)
        subject_freq = 1.0 + rng.uniform(-config.frequency_jitter, config.frequency_jitter, size=K)
        labels = _regime_schedule(rng, config, n)

        f = (freqs * subject_freq)[labels][:, None]
        arg = 2 * np.pi * f * t[:, None] + phases[labels] + subject_phase
        clean = subject_scale * amplitudes[labels] * (np.sin(arg) + harmonic[labels] * np.sin(2 * arg))
        noise = rng.normal(0.0, config.noise_std, size=clean.shape) if config.noise_std > 0 else 0.0

        recordings.append(Recording(
            subject_id=str(subject + 1),
            sample_rate_hz=float(config.rate_hz),
            channels=channels,
            samples=clean + noise,
            labels=labels,
            timestamps=t,
        ))
    return RecordingSet(recordings)
