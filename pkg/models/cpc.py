from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from config.config import CONTEXT_DIM, DROPOUT_P, ERROR_MESSAGES, GAR_LAYERS
from models.encoders import Encoder, EncoderSpec
from utils.error_handler import ConfigError, DataError, NumericError


class CpcModel(nn.Module):
    """
    Contrastive Predictive Coding network.

    Attributes:
        encoder (Encoder): g_enc, windows -> latents z [B x T x D]
        gar (nn.GRU): g_ar, multi-layer GRU summarizing z_{<=t} into c_t
        heads (nn.ModuleList): W_1..W_K, each a linear map context -> latent
        K (int): Number of future steps predicted
    """

    def __init__(
        self,
        encoder_spec: EncoderSpec,
        in_channels: int,
        K: int,
        context_dim: int = CONTEXT_DIM,
        gar_layers: int = GAR_LAYERS,
        gar_dropout: float = DROPOUT_P,
    ):
        super().__init__()
        if K < 1:
            raise ConfigError(f"K must be a positive integer, got {K}")
        self.K = K
        self.context_dim = context_dim
        self.encoder = Encoder(encoder_spec, in_channels)
        latent = self.encoder.latent_dim
        self.gar = nn.GRU(
            latent,
            context_dim,
            num_layers=gar_layers,
            dropout=gar_dropout if gar_layers > 1 else 0.0,
            batch_first=True,
        )
        self.heads = nn.ModuleList(nn.Linear(context_dim, latent) for _ in range(K))

    @property
    def latent_dim(self) -> int:
        return self.encoder.latent_dim

    def context(self, z: torch.Tensor, t: Optional[int] = None) -> torch.Tensor:
        """Top-layer GRU hidden state after consuming latents 0..t (all when t is None)."""
        steps = z if t is None else z[:, : t + 1]
        out, _ = self.gar(steps)
        return out[:, -1]


def sample_anchor(T: int, K: int, rng: np.random.Generator) -> int:
    """Uniform anchor t in [0, T - K - 1]: context 0..t, targets t+1..t+K all < T."""
    if T - K < 1:
        raise ConfigError(f"{ERROR_MESSAGES['no_context']} (T={T}, K={K})")
    return int(rng.integers(0, T - K))


def forward_cpc(
    model: CpcModel,
    batch: torch.Tensor,
    t: int,
    num_steps: Optional[int] = None,
) -> Tuple[List[torch.Tensor], torch.Tensor]:
    """
    Score every window's prediction against the latents of all windows.

    The module's own train/eval mode decides whether dropout is active.

    Args:
        model: The CPC network
        batch: Windows [B x T x C], B >= 2
        t: Shared anchor timestep for the whole batch
        num_steps: Use only heads 1..num_steps (default all K)

    Returns:
        Tuple of the per-step [B x B] logits, entry (i, m) = <z^m_{t+j}, W_j c^i_t>,
        and the contexts c_t [B x context_dim]
    """
    B, T = batch.shape[0], batch.shape[1]
    steps = model.K if num_steps is None else num_steps
    if B < 2:
        raise DataError(f"{ERROR_MESSAGES['no_negatives']} (batch of {B})")
    if not 1 <= steps <= model.K:
        raise ConfigError(f"num_steps must lie in [1, {model.K}], got {steps}")
    if not 0 <= t <= T - steps - 1:
        raise ConfigError(f"anchor t={t} out of range [0, {T - steps - 1}] for T={T}, K={steps}")

    z = model.encoder(batch)
    contexts = model.context(z, t)
    logits = []
    for j in range(1, steps + 1):
        predictions = model.heads[j - 1](contexts)
        targets = z[:, t + j]
        # Negatives for row i are the other windows' latents at the same offset
        logits.append(predictions @ targets.T)
    return logits, contexts


def _check_square(logits: Sequence[torch.Tensor]) -> None:
    if len(logits) == 0:
        raise DataError("No prediction steps to score")
    for j, matrix in enumerate(logits, start=1):
        if matrix.dim() != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DataError(f"Step {j} logits must be square, got {tuple(matrix.shape)}")
        if matrix.shape[0] < 2:
            raise DataError(f"{ERROR_MESSAGES['no_negatives']} (step {j})")


def info_nce(logits: Sequence[torch.Tensor]) -> torch.Tensor:
    """Mean over steps of the categorical cross-entropy with the diagonal as positive."""
    _check_square(logits)
    losses = []
    for matrix in logits:
        targets = torch.arange(matrix.shape[0], device=matrix.device)
        # cross_entropy subtracts the row max inside log-softmax
        losses.append(F.cross_entropy(matrix, targets))
    return torch.stack(losses).mean()


def step_losses(logits: Sequence[torch.Tensor]) -> List[float]:
    _check_square(logits)
    return [
        float(F.cross_entropy(m, torch.arange(m.shape[0], device=m.device)))
        for m in logits
    ]


def pretext_accuracy(logits: Sequence[torch.Tensor]) -> np.ndarray:
    """Per-step fraction of rows whose argmax is the diagonal; ties go to the lowest column."""
    _check_square(logits)
    accuracies = []
    for matrix in logits:
        scores = matrix.detach().cpu().numpy()
        # np.argmax returns the first maximal index
        hits = np.argmax(scores, axis=1) == np.arange(scores.shape[0])
        accuracies.append(hits.mean())
    return np.asarray(accuracies, dtype=np.float64)


def backward(model: nn.Module, loss: torch.Tensor) -> Dict[str, torch.Tensor]:
    """
    Reverse-mode gradients of ``loss`` for every trainable parameter.

    Parameters the loss does not depend on get an all-zero gradient.

    Raises:
        NumericError: ``loss`` carries no recorded graph
    """
    if not isinstance(loss, torch.Tensor) or loss.grad_fn is None:
        raise NumericError("backward called without a recorded forward pass")
    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad]
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    return {
        name: torch.zeros_like(p) if g is None else g
        for (name, p), g in zip(named, grads)
    }
