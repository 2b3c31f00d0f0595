"""Small convolutional scene encoder with a segmentation head.

Five stride-2 stages take an RGB image down by 32x to the visual feature
grid; a 1x1 head plus bilinear upsampling produces per-pixel class logits,
whose argmax serves as the pseudo mask when no ground truth is injected.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from ..errors import ValidationError
from ..landcover import ALL_CLASSES


def _stage(cin: int, cout: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, kernel_size=3, stride=2, padding=1),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class ToyEncoder(nn.Module):
    def __init__(self, channels: int = 32) -> None:
        super().__init__()
        widths = [16, 16, 32, 32, channels]
        stages = []
        cin = 3
        for cout in widths:
            stages.append(_stage(cin, cout))
            cin = cout
        self.stages = nn.Sequential(*stages)
        self.seg_head = nn.Conv2d(channels, len(ALL_CLASSES), kernel_size=1)
        self.out_channels = channels

    def forward(self, image: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if image.ndim != 4 or image.shape[1] != 3:
            raise ValidationError(f"expected (B, 3, H, W) image, got {tuple(image.shape)}")
        h, w = image.shape[2], image.shape[3]
        if h % 32 != 0 or w % 32 != 0:
            raise ValidationError(f"image sides must be divisible by 32, got {h}x{w}")
        feats = self.stages(image)
        seg_small = self.seg_head(feats)
        seg_logits = F.interpolate(seg_small, size=(h, w), mode="bilinear", align_corners=False)
        return feats, seg_logits
