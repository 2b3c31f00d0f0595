"""Low-rank adaptation of a frozen linear layer.

The wrapped base weight W (out x in) never trains; the adapter contributes
s * A @ B with A (out x r), B (r x in) and s = alpha / r. B starts at zero,
so a freshly built adapter computes exactly the base forward.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from ..errors import ValidationError


class LoRALinear(nn.Module):
    def __init__(
        self,
        in_features: int,
        out_features: int,
        rank: int,
        alpha: float = 16.0,
        bias: bool = True,
    ) -> None:
        super().__init__()
        if rank < 0:
            raise ValidationError(f"rank must be >= 0, got {rank}")
        self.base = nn.Linear(in_features, out_features, bias=bias)
        self.base.weight.requires_grad_(False)
        if self.base.bias is not None:
            self.base.bias.requires_grad_(False)
        self.rank = rank
        if rank > 0:
            self.scale = alpha / rank
            self.lora_a = nn.Parameter(torch.empty(out_features, rank))
            self.lora_b = nn.Parameter(torch.zeros(rank, in_features))
            nn.init.normal_(self.lora_a, std=0.02)
        else:
            self.scale = 0.0

    def delta_weight(self) -> torch.Tensor:
        """The adapter's effective weight contribution s * A @ B."""
        if self.rank == 0:
            return torch.zeros_like(self.base.weight)
        return self.scale * (self.lora_a @ self.lora_b)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = self.base(x)
        if self.rank > 0:
            y = y + self.scale * F.linear(F.linear(x, self.lora_b), self.lora_a)
        return y
