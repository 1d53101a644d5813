"""Machine-readable reports (JSON, CSV) and standalone SVG plots for runs and sweeps."""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from evaluation.sweeps import SweepResult  # noqa: E402

PathLike = Union[str, Path]

# Fixed SVG ids and no timestamp, so identical runs write identical files
plt.rcParams["svg.hashsalt"] = "cpc-toolkit"
SVG_METADATA = {"Date": None}

# Series colors
SERIES_COLORS = {
    "main": "#5865F2",
    "random_init": "#ED4245",
    "end_to_end": "#57F287",
}
FALLBACK_COLORS = ("#5865F2", "#ED4245", "#57F287", "#FEE75C", "#EB459E", "#99AAB5", "#3BA55C")


def _jsonable(value: Any) -> Any:
    """Replace non-finite floats by None and numpy scalars/arrays by Python values."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: PathLike, data: Mapping[str, Any]) -> Path:
    """Write one canonical JSON document (sorted keys, fixed indentation)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(dict(data)), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sweep_rows(result: SweepResult) -> List[Dict[str, Any]]:
    """One row per series x setting x seed."""
    rows = []
    for series, points in result.series().items():
        for point in points:
            for seed, score in zip(point.seeds, point.mean_f1):
                rows.append({
                    "axis": result.axis.value,
                    "series": series,
                    "setting": point.setting,
                    "seed": seed,
                    "mean_f1": score,
                })
    return rows


def write_sweep_csv(result: SweepResult, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(sweep_rows(result), columns=["axis", "series", "setting", "seed", "mean_f1"])
    frame.to_csv(path, index=False, float_format="%.6f")
    return path


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA, bbox_inches="tight")
    plt.close(fig)
    return path


def _color(name: str, index: int) -> str:
    return SERIES_COLORS.get(name, FALLBACK_COLORS[index % len(FALLBACK_COLORS)])


def plot_sweep(result: SweepResult, path: PathLike, title: Optional[str] = None) -> Path:
    """
    Median mean F1 per setting for every series, with the min-max range shaded.

    Args:
        result: Sweep to draw
        path: Output SVG file
        title: Figure title (defaults to the axis name)

    Returns:
        Path: The written file
    """
    fig, ax = plt.subplots(figsize=(7, 4))
    settings = [p.setting for p in result.points]
    x = np.arange(len(settings))
    for i, (name, points) in enumerate(result.series().items()):
        color = _color(name, i)
        medians = [p.median for p in points]
        ax.plot(x, medians, marker="o", color=color, label=name)
        ax.fill_between(x, [p.min for p in points], [p.max for p in points], color=color, alpha=0.2)
    ax.set_xticks(x)
    ax.set_xticklabels(settings)
    ax.set_xlabel(result.axis.value)
    ax.set_ylabel("test mean F1")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(title or result.axis.value)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_pretext_accuracy(curves: Mapping[str, Sequence[float]], path: PathLike, title: str = "pretext accuracy") -> Path:
    """Per-step pretext accuracy, one line per curve (steps numbered from 1)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, (name, accuracy) in enumerate(curves.items()):
        steps = np.arange(1, len(accuracy) + 1)
        ax.plot(steps, accuracy, marker=".", color=_color(name, i), label=name)
    ax.set_xlabel("prediction step k")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_confusion(
    confusion: np.ndarray,
    path: PathLike,
    class_names: Optional[Sequence[str]] = None,
    title: str = "confusion matrix",
) -> Path:
    """Row-normalized confusion heatmap annotated with raw counts."""
    confusion = np.asarray(confusion)
    n = confusion.shape[0]
    names = list(class_names) if class_names is not None and len(class_names) == n else [str(c) for c in range(n)]
    rows = confusion.sum(axis=1, keepdims=True)
    normalized = np.divide(confusion, rows, out=np.zeros(confusion.shape, dtype=float), where=rows > 0)

    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * n, 1.0 + 0.6 * n))
    image = ax.imshow(normalized, cmap="Blues", vmin=0.0, vmax=1.0)
    for i in range(n):
        for j in range(n):
            ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center",
                    color="white" if normalized[i, j] > 0.5 else "black", fontsize=8)
    ax.set_xticks(np.arange(n))
    ax.set_yticks(np.arange(n))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_yticklabels(names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    fig.colorbar(image, ax=ax)
    return _save(fig, path)


def plot_history(history: Sequence[Mapping[str, Any]], path: PathLike, title: str = "training") -> Path:
    """Training (and validation, when recorded) loss per epoch."""
    fig, ax = plt.subplots(figsize=(7, 4))
    epochs = [r["epoch"] + 1 for r in history]
    ax.plot(epochs, [r["train_loss"] for r in history], label="train")
    if any("val_loss" in r for r in history):
        ax.plot(epochs, [r.get("val_loss", np.nan) for r in history], label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def sweep_report(result: SweepResult, config: Mapping[str, Any], references: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Report document for a sweep run."""
    return {
        "config": dict(config),
        "sweep": result.to_dict(),
        "references": dict(references or {}),
    }
