"""
Binary checkpoint container.

Layout (little-endian):
    u32  format_version
    u64  config byte length, then the config as canonical JSON (UTF-8)
    u64  tensor count
    per tensor:
        u32 name byte length, UTF-8 name
        u32 rank, rank x u64 dims
        row-major float32 values
"""

from __future__ import annotations

import hashlib
import json
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import torch
from torch import nn

from config.config import CHECKPOINT_FORMAT_VERSION
from models.cpc import CpcModel
from models.encoders import ConvBlock, Encoder, EncoderSpec, LinearBlock, RecurrentBlock
from utils.error_handler import DataError

GRU_GATES = ("reset", "update", "new")
LSTM_GATES = ("input", "forget", "cell", "output")


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class Checkpoint:
    """Named float32 tensors plus the configuration that produced them."""

    tensors: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    config: Dict[str, Any] = field(default_factory=dict)
    format_version: int = CHECKPOINT_FORMAT_VERSION

    def to_bytes(self) -> bytes:
        config = canonical_json(self.config).encode("utf-8")
        parts = [struct.pack("<I", self.format_version), struct.pack("<Q", len(config)), config]
        parts.append(struct.pack("<Q", len(self.tensors)))
        for name, array in self.tensors.items():
            encoded = name.encode("utf-8")
            array = np.ascontiguousarray(array, dtype="<f4")
            parts.append(struct.pack("<I", len(encoded)))
            parts.append(encoded)
            parts.append(struct.pack("<I", array.ndim))
            parts.append(struct.pack(f"<{array.ndim}Q", *array.shape))
            parts.append(array.tobytes(order="C"))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        view = memoryview(data)
        offset = 0

        def take(fmt: str):
            nonlocal offset
            size = struct.calcsize(fmt)
            if offset + size > len(view):
                raise DataError("Checkpoint is truncated")
            values = struct.unpack_from(fmt, view, offset)
            offset += size
            return values

        def take_bytes(size: int) -> bytes:
            nonlocal offset
            if offset + size > len(view):
                raise DataError("Checkpoint is truncated")
            chunk = bytes(view[offset:offset + size])
            offset += size
            return chunk

        (version,) = take("<I")
        if version != CHECKPOINT_FORMAT_VERSION:
            raise DataError(f"Unsupported checkpoint format version {version}")
        (config_len,) = take("<Q")
        config = json.loads(take_bytes(config_len).decode("utf-8"))
        (count,) = take("<Q")
        tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for _ in range(count):
            (name_len,) = take("<I")
            name = take_bytes(name_len).decode("utf-8")
            (rank,) = take("<I")
            dims = take(f"<{rank}Q") if rank else ()
            n = int(np.prod(dims)) if rank else 1
            values = np.frombuffer(take_bytes(4 * n), dtype="<f4").reshape(dims)
            tensors[name] = values.astype(np.float32)
        if offset != len(view):
            raise DataError("Checkpoint has trailing bytes")
        return cls(tensors=tensors, config=config, format_version=version)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Checkpoint":
        path = Path(path)
        if not path.exists():
            raise DataError(f"Checkpoint not found: {path}")
        return cls.from_bytes(path.read_bytes())

    def digest(self, names: Optional[Iterable[str]] = None) -> str:
        """SHA-256 over the selected tensors' names and bytes."""
        sha = hashlib.sha256()
        for name in names if names is not None else self.tensors:
            sha.update(name.encode("utf-8"))
            sha.update(np.ascontiguousarray(self.tensors[name], dtype="<f4").tobytes())
        return sha.hexdigest()


def _rnn_views(prefix: str, rnn: nn.RNNBase, layer: int, gates) -> "OrderedDict[str, torch.Tensor]":
    """Per-gate views into torch's stacked RNN weights for one layer."""
    views: "OrderedDict[str, torch.Tensor]" = OrderedDict()
    stacked = {
        kind: getattr(rnn, f"{kind}_l{layer}").chunk(len(gates), dim=0)
        for kind in ("weight_ih", "weight_hh", "bias_ih", "bias_hh")
    }
    for g, gate in enumerate(gates):
        for kind in ("weight_ih", "weight_hh", "bias_ih", "bias_hh"):
            views[f"{prefix}.{gate}.{kind}"] = stacked[kind][g]
    return views


def encoder_views(encoder: Encoder) -> "OrderedDict[str, torch.Tensor]":
    views: "OrderedDict[str, torch.Tensor]" = OrderedDict()
    for i, block in enumerate(encoder.layers, start=1):
        if isinstance(block, ConvBlock):
            layer = block.conv
        elif isinstance(block, LinearBlock):
            layer = block.linear
        elif isinstance(block, RecurrentBlock):
            gates = LSTM_GATES if isinstance(block.rnn, nn.LSTM) else GRU_GATES
            views.update(_rnn_views(f"enc.layer{i}", block.rnn, 0, gates))
            continue
        else:
            raise DataError(f"Unknown encoder block {type(block).__name__}")
        views[f"enc.layer{i}.weight"] = layer.weight
        views[f"enc.layer{i}.bias"] = layer.bias
    return views


def gar_views(gar: nn.GRU) -> "OrderedDict[str, torch.Tensor]":
    views: "OrderedDict[str, torch.Tensor]" = OrderedDict()
    for layer in range(gar.num_layers):
        views.update(_rnn_views(f"gar.layer{layer + 1}", gar, layer, GRU_GATES))
    return views


def named_views(model: nn.Module) -> "OrderedDict[str, torch.Tensor]":
    """
    Checkpoint name -> tensor view sharing storage with ``model``.

    Works for CpcModel (enc/gar/head) and ActivityClassifier (enc/gar/clf).
    """
    views = encoder_views(model.encoder)
    views.update(gar_views(model.gar))
    if hasattr(model, "heads"):
        for j, head in enumerate(model.heads, start=1):
            views[f"head{j}.weight"] = head.weight
            views[f"head{j}.bias"] = head.bias
    if hasattr(model, "head"):
        head = model.head
        for i, (linear, norm) in enumerate(zip(head.linears, head.norms), start=1):
            views[f"clf.layer{i}.weight"] = linear.weight
            views[f"clf.layer{i}.bias"] = linear.bias
            views[f"clf.bn{i}.gamma"] = norm.weight
            views[f"clf.bn{i}.beta"] = norm.bias
            views[f"clf.bn{i}.running_mean"] = norm.running_mean
            views[f"clf.bn{i}.running_var"] = norm.running_var
        last = len(head.linears) + 1
        views[f"clf.layer{last}.weight"] = head.output.weight
        views[f"clf.layer{last}.bias"] = head.output.bias
    return views


def export_tensors(model: nn.Module) -> "OrderedDict[str, np.ndarray]":
    return OrderedDict(
        (name, view.detach().cpu().numpy().astype(np.float32))
        for name, view in named_views(model).items()
    )


def load_tensors(model: nn.Module, tensors: Dict[str, np.ndarray], prefixes: Optional[Iterable[str]] = None) -> None:
    """
    Copy checkpoint tensors into ``model`` in place.

    Args:
        model: Target network
        tensors: Checkpoint tensors by name
        prefixes: Only load names starting with one of these (default: all model tensors)

    Raises:
        DataError: A required tensor is missing or has the wrong shape
    """
    prefixes = tuple(prefixes) if prefixes is not None else None
    with torch.no_grad():
        for name, view in named_views(model).items():
            if prefixes is not None and not name.startswith(prefixes):
                continue
            if name not in tensors:
                raise DataError(f"Checkpoint is missing tensor {name}")
            array = tensors[name]
            if tuple(array.shape) != tuple(view.shape):
                raise DataError(f"Tensor {name} has shape {tuple(array.shape)}, model expects {tuple(view.shape)}")
            view.copy_(torch.from_numpy(np.asarray(array, dtype=np.float32)).to(view.dtype))


def checkpoint_from_model(model: nn.Module, config: Dict[str, Any]) -> Checkpoint:
    return Checkpoint(tensors=export_tensors(model), config=dict(config))


def model_config(model, window_length: int, **extra) -> Dict[str, Any]:
    """Architecture description stored with a CPC checkpoint."""
    config = {
        "encoder": model.encoder.spec.to_dict(),
        "in_channels": model.encoder.in_channels,
        "window_length": int(window_length),
        "K": model.K,
        "context_dim": model.context_dim,
        "gar_layers": model.gar.num_layers,
        "gar_dropout": float(model.gar.dropout),
    }
    config.update(extra)
    return config


def build_cpc_model(config: Dict[str, Any]):
    """Fresh (randomly initialized) CpcModel with the architecture in ``config``."""
    try:
        return CpcModel(
            EncoderSpec.from_dict(config["encoder"]),
            in_channels=int(config["in_channels"]),
            K=int(config["K"]),
            context_dim=int(config["context_dim"]),
            gar_layers=int(config["gar_layers"]),
            gar_dropout=float(config["gar_dropout"]),
        )
    except KeyError as missing:
        raise DataError(f"Checkpoint config lacks {missing}") from None


def load_cpc_model(checkpoint: Checkpoint):
    model = build_cpc_model(checkpoint.config)
    load_tensors(model, checkpoint.tensors)
    return model
