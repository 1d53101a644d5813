"""
Run configuration: one JSON document per run, overridable from the command line.

The resolved configuration (file values merged with flags) is what a run stores
in its output directory; loading that file again reproduces the run.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from config.config import (
    CONV_KERNEL_SIZES,
    ERROR_MESSAGES,
    K_GRID,
    LABEL_BUDGETS,
    NUM_SEEDS,
    OVERLAP_FRACTION,
    TARGET_RATE_HZ,
    WINDOW_SECONDS,
)
from models.classifier import FreezePolicy
from models.encoders import encoder_spec_from_name
from pipeline.datasets import PROFILES
from pipeline.splits import SplitPolicy
from pipeline.synthetic import SyntheticConfig
from pipeline.windows import window_length
from training.finetune import FinetuneConfig
from training.pretrain import PretrainConfig
from utils.error_handler import ConfigError

COMMANDS = ("synth", "pretrain", "finetune", "evaluate", "sweep")
DATA_SOURCES = ("synthetic", "csv")
SWEEP_KINDS = ("labels_per_class", "encoder_spec", "k_horizon", "freeze_policy")
DEFAULT_ENCODERS = ("fc", *[f"conv_k{k}" for k in CONV_KERNEL_SIZES], "lstm", "gru")


def _build(cls, data: Any, section: str):
    """Instantiate a config dataclass, turning unknown or missing keys into ConfigError."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"Config section '{section}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {', '.join(unknown)}")
    try:
        return cls.from_dict(data) if hasattr(cls, "from_dict") else cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid '{section}' section: {e}") from None


@dataclass
class DataConfig:
    """Where recordings come from and how they are windowed."""

    source: str = "synthetic"
    paths: List[str] = field(default_factory=list)
    profile: Optional[str] = None
    target_hz: float = TARGET_RATE_HZ
    window_seconds: float = WINDOW_SECONDS
    overlap_fraction: float = OVERLAP_FRACTION
    split_policy: str = SplitPolicy.FRACTIONAL.value
    fixed_lists: Optional[Dict[str, List[str]]] = None
    split_seed: int = 0
    num_classes: Optional[int] = None
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)

    @property
    def window_length(self) -> int:
        return window_length(self.window_seconds, self.target_hz)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DataConfig":
        data = dict(data)
        data["synthetic"] = _build(SyntheticConfig, data.get("synthetic"), "data.synthetic")
        return cls(**data)


@dataclass
class SweepConfig:
    """
    Which sweep the ``sweep`` command runs.

    Attributes:
        kind (str): labels_per_class, encoder_spec, k_horizon or freeze_policy
        budgets (List[int]): Labels per class for the label-budget sweep
        k_values (List[int]): Horizons for the K ablation
        encoders (List[str]): Encoder names for the encoder ablation
        policies (List[str]): Freeze policies for the freeze ablation
        num_seeds (int): Runs per setting, seeds 0..num_seeds-1 offset by the run seed
        labels_per_class (Optional[int]): Label budget for the ablations (None = all labels)
        controls (bool): Run the random-init and end-to-end controls in the label sweep
    """

    kind: str = "labels_per_class"
    budgets: List[int] = field(default_factory=lambda: list(LABEL_BUDGETS))
    k_values: List[int] = field(default_factory=lambda: list(K_GRID))
    encoders: List[str] = field(default_factory=lambda: list(DEFAULT_ENCODERS))
    policies: List[str] = field(default_factory=lambda: [p.value for p in FreezePolicy])
    num_seeds: int = NUM_SEEDS
    labels_per_class: Optional[int] = None
    controls: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        return cls(**data)


@dataclass
class RunConfig:
    """Everything one invocation needs; fully JSON-serializable."""

    command: str = "pretrain"
    data: DataConfig = field(default_factory=DataConfig)
    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    finetune: FinetuneConfig = field(default_factory=FinetuneConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    out_dir: Optional[str] = None
    seed: int = 0
    deterministic: bool = True
    force: bool = False
    checkpoint: Optional[str] = None
    policy: str = FreezePolicy.ENC_LE3_PLUS_GAR.value
    labels_per_class: Optional[int] = None
    tune_learning_rate: bool = False

    def resolved(self) -> "RunConfig":
        """Copy whose stage configs carry the run seed."""
        return replace(
            self,
            pretrain=replace(self.pretrain, seed=self.seed),
            finetune=replace(self.finetune, seed=self.seed),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "data": self.data.to_dict(),
            "pretrain": self.pretrain.to_dict(),
            "finetune": self.finetune.to_dict(),
            "sweep": self.sweep.to_dict(),
            "out_dir": self.out_dir,
            "seed": self.seed,
            "deterministic": self.deterministic,
            "force": self.force,
            "checkpoint": self.checkpoint,
            "policy": self.policy,
            "labels_per_class": self.labels_per_class,
            "tune_learning_rate": self.tune_learning_rate,
        }

    def experiment_dict(self) -> Dict[str, Any]:
        """Resolved config without where the run writes or reads files; embedded in reports."""
        data = self.to_dict()
        for key in ("out_dir", "force", "checkpoint"):
            data.pop(key)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        data["data"] = _build(DataConfig, data.get("data"), "data")
        data["pretrain"] = _build(PretrainConfig, data.get("pretrain"), "pretrain")
        data["finetune"] = _build(FinetuneConfig, data.get("finetune"), "finetune")
        data["sweep"] = _build(SweepConfig, data.get("sweep"), "sweep")
        return cls(**data)


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Read a run configuration and apply flag overrides.

    Args:
        path: JSON config file; defaults only when None
        overrides: Top-level values from the command line; None values are ignored

    Returns:
        RunConfig: The resolved configuration

    Raises:
        ConfigError: Missing file, malformed JSON or unknown keys
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"{ERROR_MESSAGES['missing_config']}: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return RunConfig.from_dict(data).resolved()


def validate_config(config: RunConfig) -> List[str]:
    """
    Return every violation in ``config``; an empty list means the run can start.

    Args:
        config: Parsed run configuration

    Returns:
        List[str]: Human-readable violations
    """
    problems: List[str] = []
    if config.command not in COMMANDS:
        problems.append(f"unknown command '{config.command}' (expected one of {', '.join(COMMANDS)})")

    data = config.data
    if data.source not in DATA_SOURCES:
        problems.append(f"data.source must be one of {', '.join(DATA_SOURCES)}")
    if data.source == "csv" and not data.paths and config.command != "synth":
        problems.append("data.paths is empty for a csv source")
    if data.profile is not None and data.profile not in PROFILES:
        problems.append(f"unknown dataset profile '{data.profile}'")
    if data.split_policy not in [p.value for p in SplitPolicy]:
        problems.append(f"unknown split policy '{data.split_policy}'")
    if data.target_hz <= 0:
        problems.append(ERROR_MESSAGES['bad_rate'])
    if not 0.0 <= data.overlap_fraction < 1.0:
        problems.append(ERROR_MESSAGES['bad_overlap'])
    if data.window_seconds <= 0:
        problems.append("window_seconds must be positive")
    if data.num_classes is not None and data.num_classes < 2:
        problems.append("num_classes must be >= 2")
    try:
        data.synthetic.validate()
    except ConfigError as e:
        problems.append(str(e))

    T = data.window_length if data.target_hz > 0 and data.window_seconds > 0 else None
    if T is not None and T < 1:
        problems.append("window is shorter than one sample")
        T = None
    problems.extend(config.pretrain.violations(T))
    problems.extend(config.finetune.violations())

    try:
        FreezePolicy(config.policy)
    except ValueError:
        problems.append(f"unknown freeze policy '{config.policy}'")
    if config.labels_per_class is not None and config.labels_per_class < 1:
        problems.append("labels_per_class must be a positive integer")
    if config.command == "finetune" and not config.checkpoint:
        problems.append(ERROR_MESSAGES['missing_checkpoint'])
    if config.command == "evaluate" and not config.checkpoint:
        problems.append(ERROR_MESSAGES['missing_checkpoint'])
    if config.command == "sweep":
        problems.extend(_sweep_violations(config, T))
    return list(dict.fromkeys(problems))


def _sweep_violations(config: RunConfig, T: Optional[int]) -> List[str]:
    sweep = config.sweep
    problems = []
    if sweep.kind not in SWEEP_KINDS:
        problems.append(f"unknown sweep kind '{sweep.kind}'")
    if sweep.num_seeds < 1:
        problems.append("sweep.num_seeds must be >= 1")
    if sweep.labels_per_class is not None and sweep.labels_per_class < 1:
        problems.append("sweep.labels_per_class must be a positive integer")
    if sweep.kind == "labels_per_class":
        if not sweep.budgets:
            problems.append("sweep.budgets is empty")
        elif any(b < 1 for b in sweep.budgets):
            problems.append("sweep.budgets must be positive integers")
    elif sweep.kind == "k_horizon":
        if not sweep.k_values:
            problems.append("sweep.k_values is empty")
        for k in sweep.k_values:
            problems.extend(replace(config.pretrain, K=k).violations(T))
    elif sweep.kind == "encoder_spec":
        if not sweep.encoders:
            problems.append("sweep.encoders is empty")
        for name in sweep.encoders:
            try:
                problems.extend(encoder_spec_from_name(name).violations())
            except ConfigError as e:
                problems.append(str(e))
    elif sweep.kind == "freeze_policy":
        if not sweep.policies:
            problems.append("sweep.policies is empty")
        for policy in sweep.policies:
            if policy not in [p.value for p in FreezePolicy]:
                problems.append(f"unknown freeze policy '{policy}'")
    return problems
