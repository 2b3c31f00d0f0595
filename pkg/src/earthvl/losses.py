"""Numerical-difference loss: cross entropy scaled by decode distance.

For a predicted distribution p over a numeric vocabulary and a one-hot
target y, the loss is

    ND(p, y) = (1 + d) * CE(p, y),   d = alpha * |y_pr - y_gt| ** gamma

where y_pr is the decoded (argmax) value and y_gt the target value. d is a
constant factor (no gradient flows through it), alpha = 0 recovers plain
cross entropy exactly, and gamma shapes the penalty growth: gamma > 1 turns
convex in the distance, gamma < 1 concave, gamma = 1 linear. gamma = 0 is
defined as d = alpha * [y_pr != y_gt].
"""

from __future__ import annotations

import math

import numpy as np
import torch

from .errors import ValidationError

LOG_CLAMP = 1e-12
_LOG_FLOOR = math.log(LOG_CLAMP)


def _as_2d(probs: torch.Tensor) -> tuple[torch.Tensor, bool]:
    if probs.ndim == 1:
        return probs.unsqueeze(0), True
    if probs.ndim == 2:
        return probs, False
    raise ValidationError(f"probs must be 1D or 2D, got shape {tuple(probs.shape)}")


def cross_entropy(probs: torch.Tensor, target: torch.Tensor | int) -> torch.Tensor:
    """-log p[target], probabilities clamped at 1e-12. Mean over a batch."""
    p2, squeezed = _as_2d(probs)
    t = torch.as_tensor(target, dtype=torch.long, device=probs.device).reshape(-1)
    if t.shape[0] != p2.shape[0]:
        raise ValidationError(f"target batch {t.shape[0]} != probs batch {p2.shape[0]}")
    if bool((t < 0).any()) or bool((t >= p2.shape[1]).any()):
        raise ValidationError("target index out of range")
    picked = p2[torch.arange(p2.shape[0]), t]
    ce = -torch.log(picked.clamp_min(LOG_CLAMP))
    return ce.squeeze(0) if squeezed else ce


def nd_penalty(
    y_pr: torch.Tensor | np.ndarray | float,
    y_gt: torch.Tensor | np.ndarray | float,
    alpha: float,
    gamma: float,
) -> torch.Tensor:
    """The distance factor d. Always detached from the graph."""
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    pr = torch.as_tensor(y_pr, dtype=torch.float64)
    gt = torch.as_tensor(y_gt, dtype=torch.float64)
    diff = (pr - gt).abs()
    if gamma == 0.0:
        d = alpha * (diff != 0).to(torch.float64)
    else:
        d = alpha * diff.pow(gamma)
    return d.detach()


def nd_loss(
    probs: torch.Tensor,
    target: torch.Tensor | int,
    y_pr: torch.Tensor | float,
    y_gt: torch.Tensor | float,
    alpha: float = 1.0,
    gamma: float = 1.0,
    reduction: str = "mean",
) -> torch.Tensor:
    """(1 + d) * CE over probabilities; batched or single-instance."""
    p2, squeezed = _as_2d(probs)
    t = torch.as_tensor(target, dtype=torch.long, device=probs.device).reshape(-1)
    if t.shape[0] != p2.shape[0]:
        raise ValidationError(f"target batch {t.shape[0]} != probs batch {p2.shape[0]}")
    if bool((t < 0).any()) or bool((t >= p2.shape[1]).any()):
        raise ValidationError("target index out of range")
    picked = p2[torch.arange(p2.shape[0]), t]
    ce = -torch.log(picked.clamp_min(LOG_CLAMP))
    d = nd_penalty(y_pr, y_gt, alpha, gamma).to(ce.dtype).reshape(-1)
    if d.shape[0] == 1 and ce.shape[0] > 1:
        d = d.expand_as(ce)
    if d.shape != ce.shape:
        raise ValidationError(f"penalty batch {tuple(d.shape)} != loss batch {tuple(ce.shape)}")
    out = (1.0 + d) * ce
    if squeezed:
        out = out.squeeze(0)
    if reduction == "none" or out.ndim == 0:
        return out
    if reduction == "mean":
        return out.mean()
    if reduction == "sum":
        return out.sum()
    raise ValidationError(f"unknown reduction: {reduction!r}")


def nd_loss_from_logits(
    logits: torch.Tensor,
    target: torch.Tensor,
    y_pr: torch.Tensor,
    y_gt: torch.Tensor,
    alpha: float = 1.0,
    gamma: float = 1.0,
    reduction: str = "mean",
) -> torch.Tensor:
    """Log-domain variant for training; same clamp as the probability path."""
    logp = torch.log_softmax(logits, dim=-1)
    t = target.reshape(-1)
    picked = logp.reshape(-1, logp.shape[-1])[torch.arange(t.shape[0]), t]
    ce = -picked.clamp_min(_LOG_FLOOR)
    d = nd_penalty(y_pr, y_gt, alpha, gamma).to(ce.dtype).reshape(-1)
    if d.shape != ce.shape:
        raise ValidationError(f"penalty batch {tuple(d.shape)} != loss batch {tuple(ce.shape)}")
    out = (1.0 + d) * ce
    if reduction == "none":
        return out
    if reduction == "mean":
        return out.mean()
    if reduction == "sum":
        return out.sum()
    raise ValidationError(f"unknown reduction: {reduction!r}")


def penalty_curve(diffs, alpha: float, gamma: float) -> np.ndarray:
    """d as a function of integer distance, for analysis and plots."""
    arr = np.asarray(diffs, dtype=np.float64)
    if gamma == 0.0:
        return alpha * (arr != 0).astype(np.float64)
    return alpha * np.abs(arr) ** gamma
