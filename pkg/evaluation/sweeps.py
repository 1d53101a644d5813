"""
Multi-seed sweeps: the label-budget protocol and the three ablations.

Every (setting, seed) run is independent. Runs are fanned out over a thread
pool and their outcomes collected in an append-only ``ResultStore`` keyed by
(axis, setting, seed); points are assembled in the configured setting order
afterwards, so the result does not depend on completion order. Each seed
drives both the labeled subsample and every weight initialization of its run.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.config import K_GRID, LABEL_BUDGETS, NUM_SEEDS
from evaluation.metrics import MetricsReport
from models.checkpoint import Checkpoint
from models.classifier import FreezePolicy
from models.encoders import EncoderFamily, EncoderSpec, default_encoder_grid
from pipeline.datasets import PreparedData
from pipeline.windows import WindowDataset, sample_labeled_subset
from training.finetune import FinetuneConfig, FinetuneResult, evaluate_classifier, train_classifier, train_end_to_end
from training.pretrain import PretrainConfig, evaluate_pretext, pretrain, random_checkpoint
from utils.error_handler import ConfigError
from utils.runtime import worker_count

logger = logging.getLogger(__name__)

PointCallback = Callable[[str, str, int, float], None]


class SweepAxis(str, Enum):
    LABELS_PER_CLASS = "labels_per_class"
    K_HORIZON = "k_horizon"
    ENCODER_SPEC = "encoder_spec"
    FREEZE_POLICY = "freeze_policy"


@dataclass
class SeedOutcome:
    """What one (setting, seed) run produced."""

    mean_f1: float
    report: Optional[MetricsReport] = None
    pretext_accuracy: Optional[List[float]] = None


class ResultStore:
    """Thread-safe, append-only store of seed outcomes."""

    def __init__(self):
        self._lock = threading.Lock()
        self._outcomes: Dict[Tuple[str, str, int], SeedOutcome] = {}

    def add(self, axis: str, setting: str, seed: int, outcome: SeedOutcome) -> None:
        key = (axis, setting, seed)
        with self._lock:
            if key in self._outcomes:
                raise ValueError(f"Result for {key} already recorded")
            self._outcomes[key] = outcome

    def get(self, axis: str, setting: str, seed: int) -> SeedOutcome:
        with self._lock:
            return self._outcomes[(axis, setting, seed)]

    def __len__(self) -> int:
        with self._lock:
            return len(self._outcomes)


@dataclass
class SweepPoint:
    """One setting on a sweep axis with its per-seed scores and their summary."""

    setting: str
    seeds: List[int]
    mean_f1: List[float]
    reports: List[Optional[MetricsReport]] = field(default_factory=list)
    pretext_accuracy: List[Optional[List[float]]] = field(default_factory=list)

    @property
    def median(self) -> float:
        return float(np.median(self.mean_f1))

    @property
    def mean(self) -> float:
        return float(np.mean(self.mean_f1))

    @property
    def min(self) -> float:
        return float(np.min(self.mean_f1))

    @property
    def max(self) -> float:
        return float(np.max(self.mean_f1))

    @property
    def std(self) -> float:
        return float(np.std(self.mean_f1))

    def median_pretext_accuracy(self) -> Optional[List[float]]:
        """Per-step median over seeds, when pretext accuracy was measured."""
        measured = [a for a in self.pretext_accuracy if a is not None]
        if not measured:
            return None
        return np.median(np.asarray(measured), axis=0).tolist()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "setting": self.setting,
            "seeds": list(self.seeds),
            "mean_f1": list(self.mean_f1),
            "median": self.median,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "std": self.std,
        }
        if any(r is not None for r in self.reports):
            data["reports"] = [r.to_dict() if r is not None else None for r in self.reports]
        if any(a is not None for a in self.pretext_accuracy):
            data["pretext_accuracy"] = self.pretext_accuracy
            data["median_pretext_accuracy"] = self.median_pretext_accuracy()
        return data


@dataclass
class SweepResult:
    """
    Points along one axis, plus control series over the same settings.

    Attributes:
        axis (SweepAxis): What was varied
        points (List[SweepPoint]): Main series, in configured setting order
        controls (Dict[str, List[SweepPoint]]): Named comparison series
    """

    axis: SweepAxis
    points: List[SweepPoint]
    controls: Dict[str, List[SweepPoint]] = field(default_factory=dict)

    def point(self, setting: str, series: Optional[str] = None) -> SweepPoint:
        points = self.points if series is None else self.controls[series]
        for p in points:
            if p.setting == setting:
                return p
        raise KeyError(setting)

    def series(self) -> Dict[str, List[SweepPoint]]:
        """Main series under ``main``, then the controls."""
        return {"main": self.points, **self.controls}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "axis": self.axis.value,
            "points": [p.to_dict() for p in self.points],
            "controls": {name: [p.to_dict() for p in pts] for name, pts in self.controls.items()},
        }


def _run_jobs(
    store: ResultStore,
    jobs: List[Tuple[str, str, int, Callable[[], SeedOutcome]]],
    deterministic: bool,
    on_point: Optional[PointCallback] = None,
) -> None:
    """Execute (axis, setting, seed, job) tuples; serially in deterministic mode."""

    def execute(axis: str, setting: str, seed: int, job: Callable[[], SeedOutcome]) -> None:
        outcome = job()
        store.add(axis, setting, seed, outcome)
        if on_point is not None:
            on_point(axis, setting, seed, outcome.mean_f1)
        else:
            logger.info(f"Sweep {axis} [{setting}] seed={seed}: mean_f1={outcome.mean_f1:.4f}")

    workers = worker_count(deterministic)
    if workers == 1:
        for args in jobs:
            execute(*args)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute, *args) for args in jobs]
        for future in futures:
            future.result()


def _collect(store: ResultStore, axis: str, settings: Sequence[str], seeds: Sequence[int]) -> List[SweepPoint]:
    points = []
    for setting in settings:
        outcomes = [store.get(axis, setting, s) for s in seeds]
        points.append(SweepPoint(
            setting=setting,
            seeds=list(seeds),
            mean_f1=[o.mean_f1 for o in outcomes],
            reports=[o.report for o in outcomes],
            pretext_accuracy=[o.pretext_accuracy for o in outcomes],
        ))
    return points


def _check_seeds(seeds: Sequence[int]) -> List[int]:
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("Seed list is empty")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"Seed list has duplicates: {seeds}")
    return seeds


def architecture_of(checkpoint: Checkpoint) -> PretrainConfig:
    """PretrainConfig describing the network stored in ``checkpoint``."""
    config = checkpoint.config
    return PretrainConfig(
        K=int(config["K"]),
        encoder=EncoderSpec.from_dict(config["encoder"]),
        context_dim=int(config["context_dim"]),
        gar_layers=int(config["gar_layers"]),
        gar_dropout=float(config["gar_dropout"]),
    )


def labeled_train_set(data: PreparedData, budget: Optional[int], seed: int) -> WindowDataset:
    """Labeled train windows: a per-class budget sample, or all of them when ``budget`` is None."""
    if budget is None:
        return data.train.labeled()
    return sample_labeled_subset(data.train, budget, seed, data.num_classes)


def _score(result: FinetuneResult, data: PreparedData) -> MetricsReport:
    return evaluate_classifier(result.classifier, data.test, data.num_classes)


def semi_supervised_sweep(
    checkpoint: Checkpoint,
    data: PreparedData,
    budgets: Sequence[int] = LABEL_BUDGETS,
    seeds: Sequence[int] = range(NUM_SEEDS),
    finetune: Optional[FinetuneConfig] = None,
    policy: FreezePolicy = FreezePolicy.ENC_LE3_PLUS_GAR,
    controls: bool = True,
    deterministic: bool = True,
    on_point: Optional[PointCallback] = None,
) -> SweepResult:
    """
    Train a classifier head per (label budget, seed) and score it on the test split.

    The main series reuses the pre-trained checkpoint under ``policy``. With
    ``controls`` the same protocol runs on a randomly initialized checkpoint of
    the same architecture (series ``random_init``) and on the architecture
    trained end to end from scratch (series ``end_to_end``).

    Args:
        checkpoint: Pre-trained CPC checkpoint
        data: Prepared splits; labels are drawn from the train split
        budgets: Labeled windows per class
        seeds: One run per seed and budget
        finetune: Fine-tuning settings (seed is overridden per run)
        policy: Freeze policy for the pre-trained series
        controls: Also run the random-checkpoint and end-to-end series
        deterministic: Run serially
        on_point: Called after every finished run

    Returns:
        SweepResult with points in ascending budget order
    """
    if not budgets:
        raise ConfigError("Label budget list is empty")
    if any(int(b) < 1 for b in budgets):
        raise ConfigError(f"Label budgets must be positive, got {list(budgets)}")
    seeds = _check_seeds(seeds)
    budgets = sorted({int(b) for b in budgets})
    finetune = finetune or FinetuneConfig()
    architecture = architecture_of(checkpoint)
    axis = SweepAxis.LABELS_PER_CLASS.value

    def pretrained_run(budget: int, seed: int) -> SeedOutcome:
        labeled = labeled_train_set(data, budget, seed)
        result = train_classifier(checkpoint, labeled, policy, replace(finetune, seed=seed), data.num_classes, data.val)
        report = _score(result, data)
        return SeedOutcome(report.mean_f1, report)

    def random_run(budget: int, seed: int) -> SeedOutcome:
        labeled = labeled_train_set(data, budget, seed)
        control = random_checkpoint(replace(architecture, seed=seed), data.num_channels, data.window_length)
        result = train_classifier(control, labeled, policy, replace(finetune, seed=seed), data.num_classes, data.val)
        report = _score(result, data)
        return SeedOutcome(report.mean_f1, report)

    def end_to_end_run(budget: int, seed: int) -> SeedOutcome:
        labeled = labeled_train_set(data, budget, seed)
        result = train_end_to_end(
            architecture.encoder, labeled, replace(finetune, seed=seed), data.num_classes, architecture, data.val
        )
        report = _score(result, data)
        return SeedOutcome(report.mean_f1, report)

    series = {"pretrained": pretrained_run}
    if controls:
        series.update(random_init=random_run, end_to_end=end_to_end_run)

    store = ResultStore()
    jobs = []
    for name, run in series.items():
        for budget in budgets:
            for seed in seeds:
                jobs.append((f"{axis}/{name}", str(budget), seed, lambda run=run, b=budget, s=seed: run(b, s)))
    _run_jobs(store, jobs, deterministic, on_point)

    settings = [str(b) for b in budgets]
    collected = {name: _collect(store, f"{axis}/{name}", settings, seeds) for name in series}
    main = collected.pop("pretrained")
    return SweepResult(SweepAxis.LABELS_PER_CLASS, main, collected)


def _pretrain_and_probe(
    pretrain_config: PretrainConfig,
    data: PreparedData,
    finetune: FinetuneConfig,
    seed: int,
    budget: Optional[int],
    policy: FreezePolicy = FreezePolicy.ENC_LE3_PLUS_GAR,
) -> SeedOutcome:
    """Pre-train with ``seed``, measure pretext accuracy on test, then score frozen features."""
    result = pretrain(replace(pretrain_config, seed=seed), data.train, data.val)
    _, accuracy = evaluate_pretext(result.model, data.test, seed, pretrain_config.batch_size)
    labeled = labeled_train_set(data, budget, seed)
    tuned = train_classifier(result.checkpoint, labeled, policy, replace(finetune, seed=seed), data.num_classes, data.val)
    report = _score(tuned, data)
    report.pretext_step_accuracy = accuracy.tolist()
    return SeedOutcome(report.mean_f1, report, accuracy.tolist())


def ablation_encoders(
    data: PreparedData,
    specs: Optional[Sequence[EncoderSpec]] = None,
    pretrain_config: Optional[PretrainConfig] = None,
    finetune: Optional[FinetuneConfig] = None,
    seeds: Sequence[int] = range(NUM_SEEDS),
    budget: Optional[int] = None,
    deterministic: bool = True,
    on_point: Optional[PointCallback] = None,
) -> SweepResult:
    """
    Pre-train one network per encoder spec at a fixed K and probe its frozen features.

    Each point records the test mean F1 and the per-step pretext accuracy
    measured on the test split.
    """
    specs = list(specs) if specs is not None else default_encoder_grid()
    if not specs:
        raise ConfigError("Encoder spec list is empty")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"Encoder specs repeat: {labels}")
    base = pretrain_config or PretrainConfig()
    problems = []
    for spec in specs:
        problems.extend(replace(base, encoder=spec).violations(data.window_length))
    if problems:
        raise ConfigError("; ".join(problems))
    seeds = _check_seeds(seeds)
    finetune = finetune or FinetuneConfig()
    axis = SweepAxis.ENCODER_SPEC.value

    store = ResultStore()
    jobs = []
    for spec in specs:
        config = replace(base, encoder=spec)
        for seed in seeds:
            jobs.append((axis, spec.label, seed,
                         lambda c=config, s=seed: _pretrain_and_probe(c, data, finetune, s, budget)))
    _run_jobs(store, jobs, deterministic, on_point)
    return SweepResult(SweepAxis.ENCODER_SPEC, _collect(store, axis, labels, seeds))


def ablation_horizon(
    data: PreparedData,
    k_values: Sequence[int] = K_GRID,
    pretrain_config: Optional[PretrainConfig] = None,
    finetune: Optional[FinetuneConfig] = None,
    seeds: Sequence[int] = range(NUM_SEEDS),
    budget: Optional[int] = None,
    deterministic: bool = True,
    on_point: Optional[PointCallback] = None,
) -> SweepResult:
    """Pre-train the conv k=3 network once per prediction horizon K and probe it."""
    if not k_values:
        raise ConfigError("K list is empty")
    base = pretrain_config or PretrainConfig()
    base = replace(base, encoder=replace(base.encoder, family=EncoderFamily.CONV1D, kernel_size=3))
    k_values = [int(k) for k in k_values]
    problems = []
    for k in k_values:
        problems.extend(replace(base, K=k).violations(data.window_length))
    if problems:
        raise ConfigError("; ".join(problems))
    seeds = _check_seeds(seeds)
    finetune = finetune or FinetuneConfig()
    axis = SweepAxis.K_HORIZON.value

    store = ResultStore()
    jobs = []
    for k in k_values:
        config = replace(base, K=k)
        for seed in seeds:
            jobs.append((axis, str(k), seed,
                         lambda c=config, s=seed: _pretrain_and_probe(c, data, finetune, s, budget)))
    _run_jobs(store, jobs, deterministic, on_point)
    return SweepResult(SweepAxis.K_HORIZON, _collect(store, axis, [str(k) for k in k_values], seeds))


def ablation_freeze(
    checkpoint: Checkpoint,
    data: PreparedData,
    policies: Sequence[FreezePolicy] = tuple(FreezePolicy),
    finetune: Optional[FinetuneConfig] = None,
    seeds: Sequence[int] = range(NUM_SEEDS),
    budget: Optional[int] = None,
    deterministic: bool = True,
    on_point: Optional[PointCallback] = None,
) -> SweepResult:
    """
    Fine-tune the checkpoint once per freeze policy and seed.

    Every point keeps its per-seed MetricsReport, confusion matrix included.
    """
    policies = [FreezePolicy(p) for p in policies]
    if not policies:
        raise ConfigError("Freeze policy list is empty")
    seeds = _check_seeds(seeds)
    finetune = finetune or FinetuneConfig()
    axis = SweepAxis.FREEZE_POLICY.value

    def run(policy: FreezePolicy, seed: int) -> SeedOutcome:
        labeled = labeled_train_set(data, budget, seed)
        result = train_classifier(checkpoint, labeled, policy, replace(finetune, seed=seed), data.num_classes, data.val)
        report = _score(result, data)
        return SeedOutcome(report.mean_f1, report)

    store = ResultStore()
    jobs = [
        (axis, p.value, seed, lambda p=p, s=seed: run(p, s))
        for p in policies
        for seed in seeds
    ]
    _run_jobs(store, jobs, deterministic, on_point)
    return SweepResult(SweepAxis.FREEZE_POLICY, _collect(store, axis, [p.value for p in policies], seeds))
