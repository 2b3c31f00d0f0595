"""The toy scene-QA network.

Visual tokens come from the encoder via object-guided channel attention and
the two-layer projector; a small causal transformer with frozen base blocks
(only LoRA adapters, embeddings, and the LM head train) consumes
[visual tokens][question][<a>][answer...]. On the separated route, numeric
answers are emitted as <num> placeholders whose hidden states feed the
count estimator; on the shared route, count words stay in the language head.
"""

from __future__ import annotations

import torch
from torch import nn
from torch.nn import functional as F

from ..config import LossConfig, ModelConfig
from ..errors import DecodeError, ValidationError
from ..landcover import ALL_CLASSES
from ..text import restore_numbers
from .attention import ObjectGuidedAttention
from .encoder import ToyEncoder
from .estimator import NumericalEstimator
from .lora import LoRALinear
from .projector import MultiModalProjector
from .vocab import NUM, Vocab, split_tokens

MAX_POSITIONS = 160


class _LoRASelfAttention(nn.Module):
    """Causal multi-head self-attention; LoRA adapts the q and v projections."""

    def __init__(self, dim: int, heads: int, rank: int, alpha: float) -> None:
        super().__init__()
        if dim % heads != 0:
            raise ValidationError(f"dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = dim // heads
        self.q = LoRALinear(dim, dim, rank, alpha)
        self.k = nn.Linear(dim, dim)
        self.v = LoRALinear(dim, dim, rank, alpha)
        self.o = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor) -> torch.Tensor:
        b, t, d = x.shape

        def heads_view(y: torch.Tensor) -> torch.Tensor:
            return y.view(b, t, self.heads, self.head_dim).transpose(1, 2)

        q = heads_view(self.q(x))
        k = heads_view(self.k(x))
        v = heads_view(self.v(x))
        out = F.scaled_dot_product_attention(q, k, v, attn_mask=attn_mask)
        return self.o(out.transpose(1, 2).reshape(b, t, d))


class _DecoderBlock(nn.Module):
    def __init__(self, dim: int, heads: int, rank: int, alpha: float) -> None:
        super().__init__()
        self.ln1 = nn.LayerNorm(dim)
        self.attn = _LoRASelfAttention(dim, heads, rank, alpha)
        self.ln2 = nn.LayerNorm(dim)
        self.ffn = nn.Sequential(
            nn.Linear(dim, 4 * dim),
            nn.GELU(),
            nn.Linear(4 * dim, dim),
        )

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor) -> torch.Tensor:
        x = x + self.attn(self.ln1(x), attn_mask)
        return x + self.ffn(self.ln2(x))


class EarthVLNet(nn.Module):
    def __init__(self, model_cfg: ModelConfig, loss_cfg: LossConfig, vocab: Vocab) -> None:
        super().__init__()
        self.model_cfg = model_cfg
        self.loss_cfg = loss_cfg
        self.vocab = vocab
        d = model_cfg.decoder_dim

        self.encoder = ToyEncoder(model_cfg.encoder_channels)
        self.oga = ObjectGuidedAttention(
            model_cfg.encoder_channels,
            model_cfg.mask_embed_channels,
            model_cfg.reduction_ratio,
        )
        self.projector = MultiModalProjector(self.oga.out_channels, d)
        self.embed = nn.Embedding(len(vocab), d)
        self.pos = nn.Embedding(MAX_POSITIONS, d)
        self.blocks = nn.ModuleList(
            _DecoderBlock(d, model_cfg.decoder_heads, model_cfg.lora_rank, model_cfg.lora_alpha)
            for _ in range(model_cfg.decoder_blocks)
        )
        self.ln_f = nn.LayerNorm(d)
        self.lm_head = nn.Linear(d, len(vocab))
        if loss_cfg.variant == "separated":
            self.estimator: NumericalEstimator | None = NumericalEstimator(
                decoder_dim=d,
                dim=model_cfg.estimator_dim,
                blocks=model_cfg.estimator_blocks,
                heads=model_cfg.estimator_heads,
                count_vocab=loss_cfg.count_vocab,
            )
        else:
            self.estimator = None
        self._freeze_decoder_base()

    def _freeze_decoder_base(self) -> None:
        # The decoder trunk is the stand-in for a frozen pretrained LM:
        # everything in the blocks and the final norm stays fixed except the
        # LoRA adapter factors.
        for name, param in self.blocks.named_parameters():
            if "lora_a" not in name and "lora_b" not in name:
                param.requires_grad_(False)
        for param in self.ln_f.parameters():
            param.requires_grad_(False)

    def frozen_parameters(self) -> dict[str, torch.Tensor]:
        return {n: p for n, p in self.named_parameters() if not p.requires_grad}

    # ------------------------------------------------------------------
    # Scene encoding

    def encode_scene(
        self, image: torch.Tensor, gt_mask: torch.Tensor | None = None
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Visual tokens, the mask used for fusion, and its class fractions."""
        feats, seg_logits = self.encoder(image)
        if gt_mask is not None:
            if gt_mask.shape[0] != image.shape[0] or gt_mask.shape[1:] != image.shape[2:]:
                raise ValidationError(
                    f"gt mask shape {tuple(gt_mask.shape)} does not match image"
                )
            mask = gt_mask.long()
        else:
            mask = seg_logits.argmax(dim=1)
        fused = self.oga(feats, mask)
        vis = self.projector(fused)
        onehot = F.one_hot(mask, num_classes=len(ALL_CLASSES)).float()
        fractions = onehot.mean(dim=(1, 2))
        return vis, mask, fractions

    # ------------------------------------------------------------------
    # Sequence modeling

    def forward_sequence(
        self, vis: torch.Tensor, token_ids: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Hidden states and LM logits over [vis tokens][token ids].

        Padding must sit at the end of token_ids; causal masking then keeps
        every real position clean without a separate padding mask.
        """
        b, s = vis.shape[0], vis.shape[1]
        t = s + token_ids.shape[1]
        if t > MAX_POSITIONS:
            raise ValidationError(f"sequence length {t} exceeds {MAX_POSITIONS}")
        x = torch.cat([vis, self.embed(token_ids)], dim=1)
        x = x + self.pos(torch.arange(t, device=x.device)).unsqueeze(0)
        causal = torch.zeros(t, t, device=x.device, dtype=x.dtype)
        causal.masked_fill_(torch.triu(torch.ones(t, t, dtype=torch.bool, device=x.device), 1), float("-inf"))
        for block in self.blocks:
            x = block(x, causal)
        hidden = self.ln_f(x)
        return hidden, self.lm_head(hidden)

    # ------------------------------------------------------------------
    # Greedy decoding

    @torch.no_grad()
    def greedy_answer(
        self,
        image: torch.Tensor,
        question: str,
        gt_mask: torch.Tensor | None = None,
        max_len: int | None = None,
    ) -> str:
        """Deterministic answer for one (image, question) pair."""
        self.eval()
        if image.ndim == 3:
            image = image.unsqueeze(0)
        if gt_mask is not None and gt_mask.ndim == 2:
            gt_mask = gt_mask.unsqueeze(0)
        max_len = max_len or self.model_cfg.max_answer_len
        vis, _, fractions = self.encode_scene(image, gt_mask)
        q_ids = self.vocab.encode(split_tokens(question))
        ids = q_ids + [self.vocab.a_start_id]
        generated: list[int] = []
        for _ in range(max_len):
            token_ids = torch.tensor([ids + generated], dtype=torch.long, device=image.device)
            _, logits = self.forward_sequence(vis, token_ids)
            nxt = int(logits[0, -1].argmax())
            if nxt == self.vocab.eos_id:
                break
            generated.append(nxt)
        words = self.vocab.decode(generated)
        answer = " ".join(words)
        if self.estimator is None:
            if NUM in words:
                raise DecodeError("shared-route model emitted a numeric placeholder")
            return answer
        slots = [i for i, w in enumerate(words) if w == NUM]
        if not slots:
            return answer
        token_ids = torch.tensor([ids + generated], dtype=torch.long, device=image.device)
        hidden, _ = self.forward_sequence(vis, token_ids)
        offset = vis.shape[1] + len(ids)
        states = hidden[:, [offset + i for i in slots], :]
        count_logits = self.estimator(fractions, states)
        counts = count_logits[0].argmax(dim=-1).tolist()
        return restore_numbers(answer, counts)
