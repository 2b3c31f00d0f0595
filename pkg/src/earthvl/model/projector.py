"""Projects fused feature maps into decoder token space.

The H' x W' grid flattens to H'*W' tokens; each passes through an affine
layer, a GELU, and a second affine layer into the decoder width.
"""

from __future__ import annotations

import torch
from torch import nn


class MultiModalProjector(nn.Module):
    def __init__(self, in_channels: int, decoder_dim: int) -> None:
        super().__init__()
        self.fc1 = nn.Linear(in_channels, decoder_dim)
        self.act = nn.GELU()
        self.fc2 = nn.Linear(decoder_dim, decoder_dim)

    def forward(self, fused: torch.Tensor) -> torch.Tensor:
        b, c, h, w = fused.shape
        tokens = fused.flatten(2).transpose(1, 2)  # (B, H'*W', C)
        return self.fc2(self.act(self.fc1(tokens)))
