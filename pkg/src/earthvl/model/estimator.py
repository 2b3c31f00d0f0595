"""Separated numerical estimator: counts live outside the language head.

A mask-summary token (linearly embedded per-class pixel fractions) is
prepended to the decoder hidden states collected at numeric placeholder
positions; stacked bidirectional self-attention blocks refine them, and a
classification head over 0..count_vocab-1 scores each placeholder.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ValidationError
from ..landcover import ALL_CLASSES


class _Block(nn.Module):
    def __init__(self, dim: int, heads: int) -> None:
        super().__init__()
        self.ln1 = nn.LayerNorm(dim)
        self.attn = nn.MultiheadAttention(dim, heads, batch_first=True)
        self.ln2 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(
            nn.Linear(dim, 4 * dim),
            nn.GELU(),
            nn.Linear(4 * dim, dim),
        )

    def forward(self, x: torch.Tensor, key_padding_mask: torch.Tensor | None) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, key_padding_mask=key_padding_mask, need_weights=False)
        x = x + attn_out
        return x + self.ffn(self.ln2(x))


class NumericalEstimator(nn.Module):
    def __init__(
        self,
        decoder_dim: int,
        dim: int = 64,
        blocks: int = 3,
        heads: int = 4,
        count_vocab: int = 101,
    ) -> None:
        super().__init__()
        if count_vocab < 2:
            raise ValidationError(f"count_vocab must be >= 2, got {count_vocab}")
        self.summary_proj = nn.Linear(len(ALL_CLASSES), dim)
        self.state_proj = nn.Linear(decoder_dim, dim)
        self.blocks = nn.ModuleList(_Block(dim, heads) for _ in range(blocks))
        self.ln_f = nn.LayerNorm(dim)
        self.head = nn.Linear(dim, count_vocab)
        self.count_vocab = count_vocab

    def forward(
        self,
        class_fractions: torch.Tensor,
        placeholder_states: torch.Tensor,
        padding_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """Count logits per placeholder.

        class_fractions: (B, 8); placeholder_states: (B, P, decoder_dim);
        padding_mask: (B, P) True where the slot is padding. Returns
        (B, P, count_vocab).
        """
        if placeholder_states.ndim != 3:
            raise ValidationError(
                f"expected (B, P, D) placeholder states, got {tuple(placeholder_states.shape)}"
            )
        summary = self.summary_proj(class_fractions).unsqueeze(1)  # (B, 1, dim)
        states = self.state_proj(placeholder_states)
        x = torch.cat([summary, states], dim=1)
        key_padding = None
        if padding_mask is not None:
            summary_pad = torch.zeros(
                padding_mask.shape[0], 1, dtype=torch.bool, device=padding_mask.device
            )
            key_padding = torch.cat([summary_pad, padding_mask], dim=1)
        for block in self.blocks:
            x = block(x, key_padding)
        return self.head(self.ln_f(x[:, 1:, :]))
