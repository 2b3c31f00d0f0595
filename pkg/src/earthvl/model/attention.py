"""Object-guided channel attention over mask-fused features.

The (pseudo or injected) mask is nearest-neighbor resized to the feature
grid, one-hot embedded through a small conv block, and concatenated onto the
visual features. Global max and mean pooled vectors pass through one shared
reduction/expansion MLP, are summed, and squashed to per-channel gates in
(0, 1) that scale the concatenated features. Attention is channel-only by
design; no spatial map is applied.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from ..errors import ValidationError
from ..landcover import ALL_CLASSES


class ObjectGuidedAttention(nn.Module):
    def __init__(
        self,
        feature_channels: int,
        mask_embed_channels: int = 8,
        reduction_ratio: int = 16,
    ) -> None:
        super().__init__()
        n_classes = len(ALL_CLASSES)
        self.mask_embed = nn.Sequential(
            nn.Conv2d(n_classes, mask_embed_channels, kernel_size=3, padding=1),
            nn.BatchNorm2d(mask_embed_channels),
            nn.ReLU(inplace=True),
        )
        fused = feature_channels + mask_embed_channels
        hidden = max(1, fused // reduction_ratio)
        self.gate_mlp = nn.Sequential(
            nn.Linear(fused, hidden),
            nn.ReLU(inplace=True),
            nn.Linear(hidden, fused),
        )
        self.out_channels = fused
        self._n_classes = n_classes

    def forward(self, features: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        if features.ndim != 4:
            raise ValidationError(f"expected (B, C, H', W') features, got {tuple(features.shape)}")
        if mask.ndim != 3 or mask.shape[0] != features.shape[0]:
            raise ValidationError(f"expected (B, H, W) mask, got {tuple(mask.shape)}")
        if bool((mask < 0).any()) or bool((mask >= self._n_classes).any()):
            raise ValidationError("mask holds class ids outside the 8-class table")
        hp, wp = features.shape[2], features.shape[3]
        small = F.interpolate(mask.unsqueeze(1).float(), size=(hp, wp), mode="nearest")
        small = small.squeeze(1).long()
        onehot = F.one_hot(small, num_classes=self._n_classes)
        onehot = onehot.permute(0, 3, 1, 2).float()
        fused = torch.cat([features, self.mask_embed(onehot)], dim=1)
        pooled_max = fused.amax(dim=(2, 3))
        pooled_mean = fused.mean(dim=(2, 3))
        gates = torch.sigmoid(self.gate_mlp(pooled_max) + self.gate_mlp(pooled_mean))
        return fused * gates.unsqueeze(-1).unsqueeze(-1)

    def gate_values(self, features: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """The per-channel gate vector, exposed for inspection and tests."""
        hp, wp = features.shape[2], features.shape[3]
        small = F.interpolate(mask.unsqueeze(1).float(), size=(hp, wp), mode="nearest")
        onehot = F.one_hot(small.squeeze(1).long(), num_classes=self._n_classes)
        fused = torch.cat([features, self.mask_embed(onehot.permute(0, 3, 1, 2).float())], dim=1)
        pooled_max = fused.amax(dim=(2, 3))
        pooled_mean = fused.mean(dim=(2, 3))
        return torch.sigmoid(self.gate_mlp(pooled_max) + self.gate_mlp(pooled_mean))
