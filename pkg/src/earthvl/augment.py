"""Geometric augmentation that keeps QA answers consistent.

The group is generated by horizontal flip, vertical flip, and one clockwise
quarter turn. Only direction-bearing answers change under these maps; every
other generated answer (existence, counts, areas, compositions) is invariant,
so augmentation rewrites direction tokens and leaves the rest alone.

Token maps: both flips swap NW--SE with NE--SW; the quarter turn swaps E--W
with N--S and NW--SE with NE--SW. Answers that are nothing but a direction
list are re-rendered in canonical bin order after mapping, so a rewritten
answer is byte-identical to the answer regenerated from the transformed mask.
"""

from __future__ import annotations

from dataclasses import dataclass
import re

import numpy as np

from .centerline import DIRECTION_ORDER, EW, NESW, NS, NWSE, sort_directions
from .errors import ValidationError
from .qa import QAPair
from .raster import Mask
from . import templates as T

_FLIP_MAP = {EW: EW, NS: NS, NWSE: NESW, NESW: NWSE}
_ROT90_MAP = {EW: NS, NS: EW, NWSE: NESW, NESW: NWSE}

_KIND_MAPS = {"hflip": _FLIP_MAP, "vflip": _FLIP_MAP, "rot90cw": _ROT90_MAP}

_DIRECTION_TOKEN_RE = re.compile(r"NW--SE|NE--SW|E--W|N--S")

_LIST_BODY_RE = re.compile(
    r"^(?P<body>(?:NW--SE|NE--SW|E--W|N--S)(?:(?:, | and )(?:NW--SE|NE--SW|E--W|N--S))*)$"
)


@dataclass(frozen=True)
class GeoTransform:
    """A composable sequence of primitive grid transforms."""

    ops: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for op in self.ops:
            if op not in _KIND_MAPS:
                raise ValidationError(f"unknown transform kind: {op!r}")

    def then(self, other: "GeoTransform") -> "GeoTransform":
        return GeoTransform(self.ops + other.ops)

    @property
    def name(self) -> str:
        return "+".join(self.ops) if self.ops else "identity"


IDENTITY = GeoTransform()
HFLIP = GeoTransform(("hflip",))
VFLIP = GeoTransform(("vflip",))
ROT90CW = GeoTransform(("rot90cw",))


def transform_mask(mask: Mask, t: GeoTransform) -> Mask:
    grid = mask.grid
    for op in t.ops:
        if op == "hflip":
            grid = grid[:, ::-1]
        elif op == "vflip":
            grid = grid[::-1, :]
        else:
            # Clockwise quarter turn: (r, c) -> (c, H - 1 - r).
            grid = np.rot90(grid, k=-1)
    return Mask(grid=np.ascontiguousarray(grid), resolution_m=mask.resolution_m)


def transform_point(
    point: tuple[float, float], shape: tuple[int, int], t: GeoTransform
) -> tuple[float, float]:
    """Map a (row, col) pixel coordinate through the transform sequence."""
    r, c = point
    h, w = shape
    for op in t.ops:
        if op == "hflip":
            c = w - 1 - c
        elif op == "vflip":
            r = h - 1 - r
        else:
            r, c = c, h - 1 - r
            h, w = w, h
    return (r, c)


def transform_direction(direction: str, t: GeoTransform) -> str:
    """Map one direction bin token through the transform sequence."""
    if direction not in DIRECTION_ORDER:
        raise ValidationError(f"unknown direction token: {direction!r}")
    for op in t.ops:
        direction = _KIND_MAPS[op][direction]
    return direction


def transform_answer(answer: str, t: GeoTransform) -> str:
    """Rewrite direction tokens so the answer matches the transformed scene.

    All occurrences map simultaneously through each primitive's token map.
    A pure direction-list answer is re-rendered in canonical order; embedded
    tokens keep their sentence position.
    """
    mapped = answer
    for op in t.ops:
        table = _KIND_MAPS[op]
        mapped = _DIRECTION_TOKEN_RE.sub(lambda m: table[m.group(0)], mapped)
    if _LIST_BODY_RE.match(mapped) is not None:
        tokens = set(_DIRECTION_TOKEN_RE.findall(mapped))
        return T.a_direction_list(sort_directions(tokens))
    return mapped


def augment_sample(
    mask: Mask, qa_pairs: list[QAPair], t: GeoTransform
) -> tuple[Mask, list[QAPair]]:
    """Transform a mask and rewrite its QA pairs to stay answer-consistent."""
    new_mask = transform_mask(mask, t)
    new_pairs = []
    for pair in qa_pairs:
        answer = pair.answer
        if pair.qtype in ("DirA", "DisA"):
            answer = transform_answer(answer, t)
        new_pairs.append(replace_pair(pair, answer=answer, transform=t.name))
    return new_mask, new_pairs


def replace_pair(pair: QAPair, answer: str, transform: str) -> QAPair:
    meta = dict(pair.meta)
    if transform != "identity":
        meta["transform"] = transform
    return QAPair(
        qid=pair.qid,
        image_id=pair.image_id,
        qtype=pair.qtype,
        question=pair.question,
        answer=answer,
        numbers=list(pair.numbers),
        meta=meta,
    )
