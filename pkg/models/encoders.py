from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Tuple, Union

import torch
from torch import nn

from config.config import CONV_KERNEL_SIZES, DROPOUT_P, ENCODER_WIDTHS, RECURRENT_HIDDEN
from utils.error_handler import ConfigError, DataError

UNBOUNDED_CAUSAL = "unbounded-causal"


class EncoderFamily(str, Enum):
    FULLY_CONNECTED = "fully_connected"
    CONV1D = "conv1d"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class EncoderSpec:
    """
    Architecture of the window encoder g_enc.

    Attributes:
        family (EncoderFamily): fully_connected, conv1d or recurrent
        layer_widths (Tuple[int, ...]): Units/channels per layer (FC and conv)
        kernel_size (int): Odd kernel width (conv only)
        cell (str): ``lstm`` or ``gru`` (recurrent only)
        hidden (int): Hidden size (recurrent only)
        dropout_p (float): Dropout probability
    """

    family: EncoderFamily = EncoderFamily.CONV1D
    layer_widths: Tuple[int, ...] = field(default=ENCODER_WIDTHS)
    kernel_size: int = 3
    cell: str = "gru"
    hidden: int = RECURRENT_HIDDEN
    dropout_p: float = DROPOUT_P

    def __post_init__(self):
        object.__setattr__(self, "family", EncoderFamily(self.family))
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))

    @property
    def latent_dim(self) -> int:
        if self.family is EncoderFamily.RECURRENT:
            return self.hidden
        return self.layer_widths[-1]

    @property
    def num_layers(self) -> int:
        return 1 if self.family is EncoderFamily.RECURRENT else len(self.layer_widths)

    def violations(self) -> List[str]:
        problems = []
        if not 0.0 <= self.dropout_p < 1.0:
            problems.append("encoder dropout_p must lie in [0, 1)")
        if self.family is EncoderFamily.RECURRENT:
            if self.cell not in ("lstm", "gru"):
                problems.append(f"recurrent cell must be lstm or gru, got {self.cell}")
            if self.hidden < 1:
                problems.append("recurrent hidden size must be positive")
        else:
            if not self.layer_widths or any(w < 1 for w in self.layer_widths):
                problems.append("layer_widths must be positive integers")
        if self.family is EncoderFamily.CONV1D and (self.kernel_size < 1 or self.kernel_size % 2 == 0):
            problems.append(f"kernel_size must be an odd positive integer, got {self.kernel_size}")
        return problems

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["family"] = self.family.value
        data["layer_widths"] = list(self.layer_widths)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "EncoderSpec":
        return cls(**data)

    @property
    def label(self) -> str:
        if self.family is EncoderFamily.CONV1D:
            return f"conv_k{self.kernel_size}"
        if self.family is EncoderFamily.RECURRENT:
            return self.cell
        return "fc"


def encoder_spec_from_name(name: str, dropout_p: float = DROPOUT_P) -> EncoderSpec:
    """Resolve short names used by sweeps: ``fc``, ``conv_k3`` .. ``conv_k9``, ``lstm``, ``gru``."""
    if name == "fc":
        return EncoderSpec(EncoderFamily.FULLY_CONNECTED, dropout_p=dropout_p)
    if name in ("lstm", "gru"):
        return EncoderSpec(EncoderFamily.RECURRENT, cell=name, dropout_p=dropout_p)
    if name.startswith("conv_k") and name[6:].isdigit():
        return EncoderSpec(EncoderFamily.CONV1D, kernel_size=int(name[6:]), dropout_p=dropout_p)
    raise ConfigError(f"Unknown encoder '{name}'")


def default_encoder_grid() -> List[EncoderSpec]:
    """FC, conv k in {3,5,7,9}, LSTM and GRU."""
    names = ["fc", *[f"conv_k{k}" for k in CONV_KERNEL_SIZES], "lstm", "gru"]
    return [encoder_spec_from_name(n) for n in names]


def reflect_indices(length: int, pad: int) -> torch.Tensor:
    """Source index for each position of a reflect-padded sequence.

    Matches torch's reflect padding when ``pad < length`` and keeps reflecting
    for longer pads; a length-1 sequence replicates its only sample.
    """
    idx = torch.arange(-pad, length + pad)
    if length == 1:
        return torch.zeros_like(idx)
    period = 2 * (length - 1)
    idx = idx.remainder(period)
    return torch.where(idx >= length, period - idx, idx)


class ReflectPad1d(nn.Module):
    def __init__(self, pad: int):
        super().__init__()
        self.pad = pad

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: [B, C, T]
        if self.pad == 0:
            return x
        return x.index_select(-1, reflect_indices(x.shape[-1], self.pad).to(x.device))


class LinearBlock(nn.Module):
    """Per-timestep linear layer, optionally followed by ReLU and dropout."""

    def __init__(self, in_features: int, out_features: int, dropout_p: float, activate: bool):
        super().__init__()
        self.linear = nn.Linear(in_features, out_features)
        self.activate = activate
        self.dropout = nn.Dropout(dropout_p)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.linear(x)
        if self.activate:
            x = self.dropout(torch.relu(x))
        return x


class ConvBlock(nn.Module):
    """Reflect-padded 1D convolution -> ReLU -> dropout, stride 1."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, dropout_p: float):
        super().__init__()
        self.pad = ReflectPad1d(kernel_size // 2)
        self.conv = nn.Conv1d(in_channels, out_channels, kernel_size)
        self.dropout = nn.Dropout(dropout_p)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.dropout(torch.relu(self.conv(self.pad(x))))


class RecurrentBlock(nn.Module):
    """Single-layer forward LSTM/GRU with dropout on its outputs."""

    def __init__(self, in_features: int, hidden: int, cell: str, dropout_p: float):
        super().__init__()
        rnn_cls = nn.LSTM if cell == "lstm" else nn.GRU
        self.rnn = rnn_cls(in_features, hidden, num_layers=1, batch_first=True)
        self.dropout = nn.Dropout(dropout_p)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out, _ = self.rnn(x)
        return self.dropout(out)


class Encoder(nn.Module):
    """
    g_enc: maps windows [B x T x C] to latent sequences [B x T x D].

    ``layers`` holds one block per encoder layer so freeze policies can address
    the first N of them.
    """

    def __init__(self, spec: EncoderSpec, in_channels: int):
        super().__init__()
        problems = spec.violations()
        if problems:
            raise ConfigError("; ".join(problems))
        self.spec = spec
        self.in_channels = in_channels

        if spec.family is EncoderFamily.RECURRENT:
            blocks = [RecurrentBlock(in_channels, spec.hidden, spec.cell, spec.dropout_p)]
        else:
            widths = [in_channels, *spec.layer_widths]
            blocks = []
            for i, (w_in, w_out) in enumerate(zip(widths[:-1], widths[1:])):
                if spec.family is EncoderFamily.CONV1D:
                    blocks.append(ConvBlock(w_in, w_out, spec.kernel_size, spec.dropout_p))
                else:
                    last = i == len(spec.layer_widths) - 1
                    blocks.append(LinearBlock(w_in, w_out, spec.dropout_p, activate=not last))
        self.layers = nn.ModuleList(blocks)

    @property
    def latent_dim(self) -> int:
        return self.spec.latent_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 3 or x.shape[-1] != self.in_channels:
            raise DataError(f"Expected windows [B x T x {self.in_channels}], got {tuple(x.shape)}")
        if x.shape[1] == 0:
            raise DataError("Cannot encode an empty window (T = 0)")

        if self.spec.family is EncoderFamily.CONV1D:
            h = x.transpose(1, 2)
            for block in self.layers:
                h = block(h)
            return h.transpose(1, 2)

        h = x
        for block in self.layers:
            h = block(h)
        return h


def encode(encoder: Encoder, windows: torch.Tensor, mode: str = "eval") -> torch.Tensor:
    """Encode windows with dropout on (``train``) or off (``eval``).

    Accepts a single window [T x C] or a batch [B x T x C]. In train mode the
    dropout masks come from torch's global generator; seed it for repeatable
    draws. The module's previous mode is restored afterwards.
    """
    single = windows.dim() == 2
    batch = windows.unsqueeze(0) if single else windows
    was_training = encoder.training
    encoder.train(mode == "train")
    try:
        z = encoder(batch)
    finally:
        encoder.train(was_training)
    return z[0] if single else z


def receptive_field(spec: EncoderSpec) -> Union[int, str]:
    """Input timesteps feeding one latent timestep.

    Conv: 1 + L(k - 1) for L stride-1 layers; FC: 1; recurrent: unbounded and causal.
    """
    if spec.family is EncoderFamily.RECURRENT:
        return UNBOUNDED_CAUSAL
    if spec.family is EncoderFamily.FULLY_CONNECTED:
        return 1
    return 1 + len(spec.layer_widths) * (spec.kernel_size - 1)
