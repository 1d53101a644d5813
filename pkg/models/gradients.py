"""Central finite differences as an independent check on autograd."""

from __future__ import annotations

from typing import Dict

import numpy as np
import torch

from models.cpc import CpcModel, backward, forward_cpc, info_nce


def cpc_loss(model: CpcModel, batch: torch.Tensor, t: int) -> torch.Tensor:
    logits, _ = forward_cpc(model, batch, t)
    return info_nce(logits)


@torch.no_grad()
def numerical_gradients(model: CpcModel, batch: torch.Tensor, t: int, h: float = 1e-6) -> Dict[str, torch.Tensor]:
    """(L(p + h) - L(p - h)) / 2h for every scalar of every trainable parameter.

    Run the model in eval mode (and in float64) for a meaningful comparison.
    """
    grads = {}
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        flat = param.view(-1)
        estimate = torch.zeros_like(flat)
        for i in range(flat.numel()):
            original = flat[i].item()
            flat[i] = original + h
            upper = cpc_loss(model, batch, t).item()
            flat[i] = original - h
            lower = cpc_loss(model, batch, t).item()
            flat[i] = original
            estimate[i] = (upper - lower) / (2 * h)
        grads[name] = estimate.view_as(param)
    return grads


def gradient_check(model: CpcModel, batch: torch.Tensor, t: int, h: float = 1e-6, floor: float = 1e-4) -> float:
    """
    Largest relative disagreement between autograd and finite differences.

    The relative error of one entry is |a - n| / max(|a| + |n|, floor); the floor
    keeps round-off on near-zero gradients from dominating.
    """
    was_training = model.training
    model.eval()
    try:
        analytic = backward(model, cpc_loss(model, batch, t))
        numeric = numerical_gradients(model, batch, t, h)
    finally:
        model.train(was_training)

    worst = 0.0
    for name, a in analytic.items():
        a = a.detach().cpu().numpy().ravel()
        n = numeric[name].cpu().numpy().ravel()
        rel = np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)
        worst = max(worst, float(rel.max(initial=0.0)))
    return worst
