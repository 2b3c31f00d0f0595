"""Toy training loop: seeded, CPU-sized, with a JSONL step log.

Samples carry the rendered image, the ground-truth mask (injected in place
of the predicted one at this scale), question and answer token ids, and the
embedded counts. The loop optimizes generation cross entropy plus the
variant's count loss, with Adam under a polynomial learning-rate decay.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np
import torch

from ..config import LossConfig, ModelConfig, TrainConfig
from ..errors import EarthVLError, ValidationError
from ..io import render_image
from ..losses import nd_loss_from_logits
from ..qa import QAPair
from ..raster import Mask
from ..text import extract_numbers, mask_numbers
from .net import EarthVLNet
from .vocab import Vocab, build_vocab, split_tokens

IGNORE_TARGET = -100


@dataclass
class Sample:
    qid: str
    image: torch.Tensor      # (3, H, W) float32 in [0, 1]
    mask: torch.Tensor       # (H, W) long
    question_ids: list[int]
    answer_in_ids: list[int]   # decoder input after <a>
    answer_target_ids: list[int]  # shifted targets, ends with <eos>
    counts: list[int]
    answer_text: str


def image_tensor(mask: Mask) -> torch.Tensor:
    rgb = render_image(mask)
    return torch.from_numpy(rgb.transpose(2, 0, 1)).float() / 255.0


def build_sample(
    mask: Mask, pair: QAPair, vocab: Vocab, loss_cfg: LossConfig
) -> Sample:
    # The numbers field marks answers the numerical route owns. Digits in
    # other answers (area-bin labels like "(10%, 20%]") are category surface
    # text and stay untouched on both routes.
    if loss_cfg.variant == "separated" and pair.numbers:
        masked, counts = mask_numbers(pair.answer)
        ans_tokens = split_tokens(masked)
    else:
        ans_tokens = split_tokens(pair.answer)
        counts = list(pair.numbers)
    for c in counts:
        if c >= loss_cfg.count_vocab:
            raise ValidationError(
                f"{pair.qid}: count {c} exceeds count vocabulary {loss_cfg.count_vocab}"
            )
    ans_ids = vocab.encode(ans_tokens)
    return Sample(
        qid=pair.qid,
        image=image_tensor(mask),
        mask=torch.from_numpy(mask.grid.astype(np.int64)),
        question_ids=vocab.encode(split_tokens(pair.question)),
        answer_in_ids=ans_ids,
        answer_target_ids=ans_ids + [vocab.eos_id],
        counts=list(counts),
        answer_text=pair.answer,
    )


def vocab_for_pairs(pairs: Iterable[QAPair], loss_cfg: LossConfig) -> Vocab:
    pairs = list(pairs)
    questions = [p.question for p in pairs]
    answers = [
        mask_numbers(p.answer)[0]
        if loss_cfg.variant == "separated" and p.numbers
        else p.answer
        for p in pairs
    ]
    include = loss_cfg.count_vocab if loss_cfg.variant == "shared" else None
    return build_vocab(questions, answers, include_counts_to=include)


@dataclass
class Batch:
    qids: list[str]
    images: torch.Tensor
    masks: torch.Tensor
    token_ids: torch.Tensor   # (B, L) question + <a> + answer input, right-padded
    targets: torch.Tensor     # (B, L) IGNORE_TARGET off the answer span
    counts: torch.Tensor      # (B, Pmax) count targets, -1 pads
    count_pad: torch.Tensor   # (B, Pmax) True where padding


def collate(samples: list[Sample], vocab: Vocab) -> Batch:
    lengths = [len(s.question_ids) + 1 + len(s.answer_in_ids) for s in samples]
    lmax = max(lengths)
    pmax = max((len(s.counts) for s in samples), default=0)
    b = len(samples)
    token_ids = torch.full((b, lmax), vocab.pad_id, dtype=torch.long)
    targets = torch.full((b, lmax), IGNORE_TARGET, dtype=torch.long)
    counts = torch.full((b, max(pmax, 1)), -1, dtype=torch.long)
    for i, s in enumerate(samples):
        stream = s.question_ids + [vocab.a_start_id] + s.answer_in_ids
        token_ids[i, : len(stream)] = torch.tensor(stream, dtype=torch.long)
        t0 = len(s.question_ids)
        tgt = torch.tensor(s.answer_target_ids, dtype=torch.long)
        targets[i, t0 : t0 + len(tgt)] = tgt
        if s.counts:
            counts[i, : len(s.counts)] = torch.tensor(s.counts, dtype=torch.long)
    return Batch(
        qids=[s.qid for s in samples],
        images=torch.stack([s.image for s in samples]),
        masks=torch.stack([s.mask for s in samples]),
        token_ids=token_ids,
        targets=targets,
        counts=counts,
        count_pad=counts < 0,
    )


def _step_losses(
    model: EarthVLNet, batch: Batch, loss_cfg: LossConfig
) -> tuple[torch.Tensor, torch.Tensor]:
    vis, _, fractions = model.encode_scene(batch.images, batch.masks)
    hidden, logits = model.forward_sequence(vis, batch.token_ids)
    s = vis.shape[1]
    text_logits = logits[:, s:, :]
    flat_logits = text_logits.reshape(-1, text_logits.shape[-1])
    flat_targets = batch.targets.reshape(-1)

    if loss_cfg.variant == "separated":
        gen_mask = flat_targets != IGNORE_TARGET
        gen_loss = torch.nn.functional.cross_entropy(
            flat_logits[gen_mask], flat_targets[gen_mask]
        )
        count_loss = _separated_count_loss(model, batch, hidden, fractions, loss_cfg)
    else:
        number_ids = torch.tensor(
            model.vocab.number_word_ids(loss_cfg.count_vocab), dtype=torch.long
        )
        is_count = torch.isin(flat_targets, number_ids)
        gen_mask = (flat_targets != IGNORE_TARGET) & ~is_count
        gen_loss = torch.nn.functional.cross_entropy(
            flat_logits[gen_mask], flat_targets[gen_mask]
        )
        count_loss = _shared_count_loss(
            flat_logits, flat_targets, is_count, number_ids, loss_cfg
        )
    return gen_loss, count_loss


def _separated_count_loss(
    model: EarthVLNet,
    batch: Batch,
    hidden: torch.Tensor,
    fractions: torch.Tensor,
    loss_cfg: LossConfig,
) -> torch.Tensor:
    assert model.estimator is not None
    if bool((~batch.count_pad).sum() == 0):
        return torch.zeros((), dtype=hidden.dtype)
    s = hidden.shape[1] - batch.token_ids.shape[1]
    num_id = model.vocab.num_id
    b, pmax = batch.counts.shape
    states = torch.zeros(b, pmax, hidden.shape[-1], dtype=hidden.dtype)
    for i in range(b):
        positions = (batch.token_ids[i] == num_id).nonzero(as_tuple=True)[0]
        n = int((~batch.count_pad[i]).sum())
        if len(positions) != n:
            raise EarthVLError(
                f"{batch.qids[i]}: {len(positions)} placeholders vs {n} counts"
            )
        if n:
            states[i, :n] = hidden[i, s + positions]
    count_logits = model.estimator(fractions, states, batch.count_pad)
    real = ~batch.count_pad
    logits_flat = count_logits[real]
    targets_flat = batch.counts[real]
    y_pr = logits_flat.argmax(dim=-1)
    return nd_loss_from_logits(
        logits_flat, targets_flat, y_pr, targets_flat,
        alpha=loss_cfg.alpha, gamma=loss_cfg.gamma,
    )


def _shared_count_loss(
    flat_logits: torch.Tensor,
    flat_targets: torch.Tensor,
    is_count: torch.Tensor,
    number_ids: torch.Tensor,
    loss_cfg: LossConfig,
) -> torch.Tensor:
    if bool(is_count.sum() == 0):
        return torch.zeros((), dtype=flat_logits.dtype)
    logits = flat_logits[is_count]
    targets = flat_targets[is_count]
    # Decoded value: best-scoring count word; target value: the count itself.
    id_to_value = {int(t): v for v, t in enumerate(number_ids.tolist())}
    sub = logits[:, number_ids]
    y_pr = sub.argmax(dim=-1)  # already the count value by construction
    y_gt = torch.tensor([id_to_value[int(t)] for t in targets], dtype=torch.long)
    return nd_loss_from_logits(
        logits, targets, y_pr, y_gt, alpha=loss_cfg.alpha, gamma=loss_cfg.gamma
    )


def train_step(
    model: EarthVLNet,
    optimizer: torch.optim.Optimizer,
    batch: Batch,
    loss_cfg: LossConfig,
) -> tuple[float, float]:
    model.train()
    optimizer.zero_grad()
    gen_loss, count_loss = _step_losses(model, batch, loss_cfg)
    total = gen_loss + count_loss
    if not torch.isfinite(total):
        raise EarthVLError(
            f"non-finite loss on batch [{', '.join(batch.qids[:4])}...]: "
            f"gen={float(gen_loss)} count={float(count_loss)}"
        )
    total.backward()
    optimizer.step()
    return float(gen_loss.detach()), float(count_loss.detach())


def poly_lr(base_lr: float, step: int, total_steps: int, power: float) -> float:
    frac = min(step / max(total_steps, 1), 1.0)
    return base_lr * (1.0 - frac) ** power


def train_toy(
    model: EarthVLNet,
    samples: list[Sample],
    train_cfg: TrainConfig,
    loss_cfg: LossConfig,
    seed: int,
    log_path: str | Path | None = None,
) -> list[dict]:
    """Run the loop; returns (and optionally writes) the per-step history."""
    if not samples:
        raise ValidationError("no training samples")
    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(trainable, lr=train_cfg.lr, betas=(0.9, 0.999))
    order_rng = np.random.default_rng(seed)
    steps_per_epoch = math.ceil(len(samples) / train_cfg.batch_size)
    total_steps = steps_per_epoch * train_cfg.epochs
    history: list[dict] = []
    step = 0
    for epoch in range(train_cfg.epochs):
        order = order_rng.permutation(len(samples))
        for start in range(0, len(samples), train_cfg.batch_size):
            chunk = [samples[i] for i in order[start : start + train_cfg.batch_size]]
            batch = collate(chunk, model.vocab)
            lr = poly_lr(train_cfg.lr, step, total_steps, train_cfg.poly_power)
            for group in optimizer.param_groups:
                group["lr"] = lr
            gen_loss, count_loss = train_step(model, optimizer, batch, loss_cfg)
            history.append(
                {
                    "step": step,
                    "epoch": epoch,
                    "gen_loss": gen_loss,
                    "count_loss": count_loss,
                    "lr": lr,
                }
            )
            step += 1
    if log_path is not None:
        from ..io import atomic_write_text

        lines = [json.dumps(rec, sort_keys=True) for rec in history]
        atomic_write_text(log_path, "\n".join(lines) + "\n")
    return history


@torch.no_grad()
def evaluate_counting(model: EarthVLNet, samples: list[Sample]) -> dict:
    """Greedy-decode counting answers; RMSE over the first embedded number."""
    model.eval()
    errors = []
    n_missing = 0
    for s in samples:
        answer = model.greedy_answer(s.image, _detok_question(s, model.vocab), gt_mask=s.mask)
        pred_numbers = extract_numbers(answer)
        if not s.counts:
            continue
        if not pred_numbers:
            n_missing += 1
            continue
        errors.append((pred_numbers[0] - s.counts[0]) ** 2)
    rmse = math.sqrt(sum(errors) / len(errors)) if errors else float("nan")
    return {"rmse": rmse, "n_eval": len(errors), "n_missing": n_missing}


def _detok_question(sample: Sample, vocab: Vocab) -> str:
    return " ".join(vocab.decode(sample.question_ids))


def save_checkpoint(
    path: str | Path,
    model: EarthVLNet,
    seed: int,
    extra: dict | None = None,
) -> None:
    from dataclasses import asdict
    import os

    payload = {
        "state_dict": model.state_dict(),
        "model_config": asdict(model.model_cfg),
        "loss_config": asdict(model.loss_cfg),
        "vocab_words": model.vocab.words,
        "seed": seed,
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def load_checkpoint(path: str | Path) -> tuple[EarthVLNet, int, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = EarthVLNet(
        ModelConfig(**payload["model_config"]),
        LossConfig(**payload["loss_config"]),
        Vocab(words=list(payload["vocab_words"])),
    )
    model.load_state_dict(payload["state_dict"])
    return model, int(payload["seed"]), dict(payload["extra"])
