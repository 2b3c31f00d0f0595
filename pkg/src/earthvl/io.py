"""File formats: mask PNGs, JSONL corpora, atomic writes, manifests.

All writers go through a temp-file-then-rename step so a crashed run never
leaves a half-written artifact behind. JSON is serialized with sorted keys,
making repeated runs byte-identical.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import json
import os
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np
from PIL import Image

from .errors import ValidationError
from .landcover import CLASS_COLORS, IGNORE
from .qa import QAPair
from .raster import Mask


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: str | Path, payload: Any) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    lines = [json.dumps(rec, sort_keys=True) for rec in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc


def save_mask(path: str | Path, mask: Mask) -> None:
    """Write the class grid as a single-channel 8-bit PNG."""
    img = Image.fromarray(mask.grid, mode="L")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def load_mask(path: str | Path, resolution_m: float) -> Mask:
    img = Image.open(path)
    if img.mode != "L":
        img = img.convert("L")
    return Mask(grid=np.asarray(img, dtype=np.uint8), resolution_m=resolution_m)


def render_image(mask: Mask) -> np.ndarray:
    """Deterministic RGB rendering of a mask, uint8 (H, W, 3)."""
    h, w = mask.shape
    out = np.zeros((h, w, 3), dtype=np.uint8)
    for cid, color in CLASS_COLORS.items():
        out[mask.grid == cid] = color
    return out


def save_image(path: str | Path, rgb: np.ndarray) -> None:
    img = Image.fromarray(rgb, mode="RGB")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def qa_to_jsonl(path: str | Path, pairs: Iterable[QAPair]) -> None:
    write_jsonl(path, (p.to_dict() for p in pairs))


_QA_REQUIRED = ("qid", "image_id", "qtype", "question", "answer", "numbers", "meta")


def qa_from_jsonl(path: str | Path) -> list[QAPair]:
    pairs = []
    for rec in read_jsonl(path):
        missing = [k for k in _QA_REQUIRED if k not in rec]
        if missing:
            raise ValidationError(f"{path}: QA record missing fields {missing}: {rec}")
        pairs.append(
            QAPair(
                qid=rec["qid"],
                image_id=rec["image_id"],
                qtype=rec["qtype"],
                question=rec["question"],
                answer=rec["answer"],
                numbers=list(rec["numbers"]),
                meta=dict(rec["meta"] or {}),
            )
        )
    return pairs


@dataclass
class ManifestEntry:
    image_id: str
    mask_path: str
    split: str = "train"
    image_path: str | None = None
    meta_path: str | None = None


@dataclass
class Manifest:
    """Dataset index: one entry per image, paths relative to the manifest."""

    entries: list[ManifestEntry] = field(default_factory=list)
    resolution_m: float = 0.3

    def to_dict(self) -> dict:
        return {
            "resolution_m": self.resolution_m,
            "entries": [asdict(e) for e in self.entries],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Manifest":
        if "entries" not in payload:
            raise ValidationError("manifest missing 'entries'")
        entries = []
        seen = set()
        for rec in payload["entries"]:
            if "image_id" not in rec or "mask_path" not in rec:
                raise ValidationError(f"manifest entry missing image_id/mask_path: {rec}")
            if rec["image_id"] in seen:
                raise ValidationError(f"duplicate image_id in manifest: {rec['image_id']}")
            seen.add(rec["image_id"])
            entries.append(
                ManifestEntry(
                    image_id=rec["image_id"],
                    mask_path=rec["mask_path"],
                    split=rec.get("split", "train"),
                    image_path=rec.get("image_path"),
                    meta_path=rec.get("meta_path"),
                )
            )
        return cls(entries=entries, resolution_m=float(payload.get("resolution_m", 0.3)))


def save_manifest(path: str | Path, manifest: Manifest) -> None:
    write_json(path, manifest.to_dict())


def load_manifest(path: str | Path, check_files: bool = True) -> Manifest:
    manifest = Manifest.from_dict(read_json(path))
    if check_files:
        base = Path(path).parent
        for entry in manifest.entries:
            if not (base / entry.mask_path).exists():
                raise ValidationError(f"manifest references missing mask: {entry.mask_path}")
    return manifest
