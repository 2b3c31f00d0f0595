"""Closed-answer evaluation: exact-match accuracy and counting RMSE."""

from __future__ import annotations

from dataclasses import dataclass
import math

from ..errors import ValidationError
from ..qa import QTYPES

# Question types whose records must carry a numeric pair.
COUNTING_QTYPES = ("BC", "CC")


@dataclass(frozen=True)
class McRecord:
    qid: str
    qtype: str
    predicted: str
    reference: str
    y_pr: float | None = None
    y_gt: float | None = None


def _check_qtypes(records: list[McRecord]) -> None:
    for rec in records:
        if rec.qtype not in QTYPES:
            raise ValidationError(f"{rec.qid}: unknown question type {rec.qtype!r}")


def overall_accuracy(records: list[McRecord]) -> dict:
    """Exact-string-match accuracy in percent, overall and per question type."""
    if not records:
        raise ValidationError("no records to score")
    _check_qtypes(records)
    per: dict[str, list[int]] = {}
    hits = 0
    for rec in records:
        hit = int(rec.predicted.strip() == rec.reference.strip())
        hits += hit
        per.setdefault(rec.qtype, []).append(hit)
    return {
        "overall": 100.0 * hits / len(records),
        "per_qtype": {qt: 100.0 * sum(v) / len(v) for qt, v in sorted(per.items())},
        "n": len(records),
    }


def rmse_counting(records: list[McRecord]) -> dict:
    """RMSE over numeric pairs, overall and per question type.

    Records of counting types must carry their pair; other records join the
    pool whenever both sides are present (comprehensive answers with embedded
    counts do).
    """
    _check_qtypes(records)
    per: dict[str, list[float]] = {}
    pooled: list[float] = []
    for rec in records:
        has_pair = rec.y_pr is not None and rec.y_gt is not None
        if rec.qtype in COUNTING_QTYPES and not has_pair:
            raise ValidationError(f"{rec.qid}: counting record lacks its numeric pair")
        if not has_pair:
            continue
        err = (float(rec.y_pr) - float(rec.y_gt)) ** 2
        pooled.append(err)
        per.setdefault(rec.qtype, []).append(err)
    if not pooled:
        raise ValidationError("no numeric pairs to score")
    return {
        "overall": math.sqrt(sum(pooled) / len(pooled)),
        "per_qtype": {qt: math.sqrt(sum(v) / len(v)) for qt, v in sorted(per.items())},
        "n_pairs": len(pooled),
    }
