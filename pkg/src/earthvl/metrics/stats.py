"""Descriptive statistics over a generated QA corpus."""

from __future__ import annotations

from collections import Counter

from ..errors import ValidationError
from ..qa import QAPair, QTYPES
from ..text import TOKENIZER_VERSION, tokenize


def answer_distribution_stats(pairs: list[QAPair]) -> dict:
    """Counts of answers per question type, answer lengths, numeric values."""
    if not pairs:
        raise ValidationError("no QA pairs to summarize")
    per_qtype: dict[str, Counter] = {}
    qtype_counts: Counter = Counter()
    length_hist: Counter = Counter()
    numeric_hist: Counter = Counter()
    images = set()
    for pair in pairs:
        if pair.qtype not in QTYPES:
            raise ValidationError(f"{pair.qid}: unknown question type {pair.qtype!r}")
        images.add(pair.image_id)
        qtype_counts[pair.qtype] += 1
        per_qtype.setdefault(pair.qtype, Counter())[pair.answer] += 1
        length_hist[len(tokenize(pair.answer))] += 1
        for value in pair.numbers:
            numeric_hist[value] += 1
    return {
        "n_pairs": len(pairs),
        "n_images": len(images),
        "qtype_counts": dict(sorted(qtype_counts.items())),
        "answers_per_qtype": {
            qt: dict(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])))
            for qt, counter in sorted(per_qtype.items())
        },
        "answer_length_hist": {str(k): v for k, v in sorted(length_hist.items())},
        "numeric_value_hist": {str(k): v for k, v in sorted(numeric_hist.items())},
        "tokenizer": TOKENIZER_VERSION,
    }
