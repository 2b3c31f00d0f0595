"""Run configuration: JSON file, schema validation, env seed override.

The EARTHVL_SEED environment variable, when set, overrides the config seed;
every stochastic component receives its generator from here.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
import os
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ValidationError
from .io import read_json
from .qa import RuleThresholds

SEED_ENV_VAR = "EARTHVL_SEED"


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 1.0
    gamma: float = 1.0
    variant: str = "separated"  # or "shared"
    count_vocab: int = 101      # counts 0..100


@dataclass(frozen=True)
class ModelConfig:
    # Toy sizes; full-scale values (decoder width 768+, estimator width 384,
    # LoRA rank 64) are reachable through the same knobs.
    encoder_channels: int = 32
    mask_embed_channels: int = 8
    reduction_ratio: int = 16
    decoder_dim: int = 128
    decoder_blocks: int = 2
    decoder_heads: int = 4
    estimator_dim: int = 64
    estimator_blocks: int = 3
    estimator_heads: int = 4
    lora_rank: int = 4
    lora_alpha: float = 16.0
    max_answer_len: int = 24


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 2e-4
    poly_power: float = 0.9
    batch_size: int = 16
    epochs: int = 10


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    resolution_m: float = 0.3
    thresholds: RuleThresholds = field(default_factory=RuleThresholds)
    loss: LossConfig = field(default_factory=LossConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _number() -> dict:
    return {"type": "number"}


def _props(cls) -> dict:
    out = {}
    for f in fields(cls):
        if f.type in ("int", int):
            out[f.name] = {"type": "integer"}
        elif f.type in ("float", float):
            out[f.name] = _number()
        elif f.type in ("str", str):
            out[f.name] = {"type": "string"}
        else:
            out[f.name] = {}
    return out


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer"},
        "resolution_m": {"type": "number", "exclusiveMinimum": 0},
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": _props(RuleThresholds),
        },
        "loss": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                **_props(LossConfig),
                "alpha": {"type": "number", "minimum": 0},
                "variant": {"type": "string", "enum": ["separated", "shared"]},
                "count_vocab": {"type": "integer", "minimum": 2},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": _props(ModelConfig),
        },
        "train": {
            "type": "object",
            "additionalProperties": False,
            "properties": _props(TrainConfig),
        },
    },
}


def config_from_dict(payload: dict[str, Any]) -> RunConfig:
    try:
        jsonschema.validate(payload, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config invalid: {exc.message}") from exc
    kwargs: dict[str, Any] = {}
    if "seed" in payload:
        kwargs["seed"] = payload["seed"]
    if "resolution_m" in payload:
        kwargs["resolution_m"] = payload["resolution_m"]
    for key, cls in (
        ("thresholds", RuleThresholds),
        ("loss", LossConfig),
        ("model", ModelConfig),
        ("train", TrainConfig),
    ):
        if key in payload:
            kwargs[key] = cls(**payload[key])
    config = RunConfig(**kwargs)
    return _apply_seed_env(config)


def _apply_seed_env(config: RunConfig) -> RunConfig:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return config
    try:
        seed = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc
    return RunConfig(
        seed=seed,
        resolution_m=config.resolution_m,
        thresholds=config.thresholds,
        loss=config.loss,
        model=config.model,
        train=config.train,
    )


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return _apply_seed_env(RunConfig())
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise ValidationError(f"config root must be an object, got {type(payload).__name__}")
    return config_from_dict(payload)
