from __future__ import annotations

from enum import Enum
from typing import List

import numpy as np
import torch
from torch import nn

from config.config import CLASSIFIER_WIDTHS, DROPOUT_P
from models.cpc import CpcModel
from utils.error_handler import DataError


class FreezePolicy(str, Enum):
    """Which pre-trained weights stay fixed during fine-tuning."""

    ENC_LE1 = "enc_le1"
    ENC_LE2 = "enc_le2"
    ENC_LE3 = "enc_le3"
    ENC_LE3_PLUS_GAR = "enc_le3_plus_gar"
    NONE = "none"

    @property
    def frozen_encoder_layers(self) -> int:
        return {
            FreezePolicy.ENC_LE1: 1,
            FreezePolicy.ENC_LE2: 2,
            FreezePolicy.ENC_LE3: 3,
            FreezePolicy.ENC_LE3_PLUS_GAR: 3,
            FreezePolicy.NONE: 0,
        }[self]

    @property
    def freezes_gar(self) -> bool:
        return self is FreezePolicy.ENC_LE3_PLUS_GAR


class ClassifierHead(nn.Module):
    """MLP backend: linear -> batch-norm -> ReLU -> dropout after layers 1 and 2, then a linear output."""

    def __init__(self, in_features: int, num_classes: int, widths=CLASSIFIER_WIDTHS, dropout_p: float = DROPOUT_P):
        super().__init__()
        self.linears = nn.ModuleList()
        self.norms = nn.ModuleList()
        previous = in_features
        for width in widths:
            self.linears.append(nn.Linear(previous, width))
            self.norms.append(nn.BatchNorm1d(width))
            previous = width
        self.output = nn.Linear(previous, num_classes)
        self.dropout = nn.Dropout(dropout_p)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        h = features
        for linear, norm in zip(self.linears, self.norms):
            h = self.dropout(torch.relu(norm(linear(h))))
        return self.output(h)


class ActivityClassifier(nn.Module):
    """
    Backbone (g_enc + g_ar) feeding the classifier head with c_T.

    Frozen backbone parts have ``requires_grad`` off and stay in eval mode even
    while the rest of the network trains.
    """

    def __init__(self, backbone: CpcModel, num_classes: int, dropout_p: float = DROPOUT_P):
        super().__init__()
        self.encoder = backbone.encoder
        self.gar = backbone.gar
        self.num_classes = num_classes
        self.head = ClassifierHead(backbone.context_dim, num_classes, dropout_p=dropout_p)
        self.policy = FreezePolicy.NONE

    def frozen_modules(self) -> List[nn.Module]:
        modules: List[nn.Module] = list(self.encoder.layers[: self.policy.frozen_encoder_layers])
        if self.policy.freezes_gar:
            modules.append(self.gar)
        return modules

    def freeze(self, policy: FreezePolicy) -> None:
        self.policy = FreezePolicy(policy)
        for module in self.frozen_modules():
            module.requires_grad_(False)
        self.train(self.training)

    def train(self, mode: bool = True):
        super().train(mode)
        for module in self.frozen_modules():
            module.eval()
        return self

    def features(self, windows: torch.Tensor) -> torch.Tensor:
        """c_T: top GRU layer state after all T latent steps."""
        out, _ = self.gar(self.encoder(windows))
        return out[:, -1]

    def forward(self, windows: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(windows))


def extract_features(classifier: ActivityClassifier, windows: torch.Tensor, mode: str = "eval") -> torch.Tensor:
    """c_T for a window [T x C] or a batch [B x T x C]; gradients flow only into trainable parts."""
    single = windows.dim() == 2
    batch = windows.unsqueeze(0) if single else windows
    was_training = classifier.training
    classifier.train(mode == "train")
    try:
        features = classifier.features(batch)
    finally:
        classifier.train(was_training)
    return features[0] if single else features


@torch.no_grad()
def predict(classifier: ActivityClassifier, windows, batch_size: int = 256) -> np.ndarray:
    """Class index per window by argmax over the outputs; ties go to the lowest index."""
    windows = torch.as_tensor(np.asarray(windows), dtype=next(classifier.parameters()).dtype)
    if windows.dim() != 3 or windows.shape[-1] != classifier.encoder.in_channels:
        raise DataError(
            f"Expected windows [N x T x {classifier.encoder.in_channels}], got {tuple(windows.shape)}"
        )
    was_training = classifier.training
    classifier.eval()
    try:
        outputs = [classifier(chunk).cpu().numpy() for chunk in torch.split(windows, batch_size)]
    finally:
        classifier.train(was_training)
    if not outputs:
        return np.zeros(0, dtype=np.int64)
    return np.argmax(np.concatenate(outputs), axis=1).astype(np.int64)


def trainable_parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


def head_parameter_count(context_dim: int, num_classes: int, widths=CLASSIFIER_WIDTHS) -> int:
    """Linear weights + biases plus batch-norm gamma/beta of the classifier head."""
    count, previous = 0, context_dim
    for width in widths:
        count += previous * width + width + 2 * width
        previous = width
    return count + previous * num_classes + num_classes


def frozen_parameter_names(classifier: ActivityClassifier) -> List[str]:
    return [name for name, p in classifier.named_parameters() if not p.requires_grad]
