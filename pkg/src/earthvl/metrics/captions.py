"""Open-ended caption metrics: corpus BLEU, ROUGE-L, and plain CIDEr.

All three run on this package's versioned tokenizer. BLEU uses modified
n-gram precision with corpus totals and a brevity penalty against the
closest-length reference. ROUGE-L takes the max precision and recall over
references with beta = 1.2. CIDEr is the plain variant: tf-idf n-gram
cosine per n = 1..4 with uniform weights, averaged over references and
scaled by 10, with corpus-level idf = log(N) - log(max(1, df)). No count
clipping and no length penalty are applied.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import math

from ..errors import ValidationError
from ..text import TOKENIZER_VERSION, tokenize

MAX_N = 4
ROUGE_BETA = 1.2


@dataclass(frozen=True)
class OeRecord:
    qid: str
    predicted: str
    references: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.references:
            raise ValidationError(f"{self.qid}: open-ended record needs references")


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(records: list[OeRecord]) -> dict:
    """BLEU-1..4 over the corpus, plus the count of empty predictions."""
    if not records:
        raise ValidationError("no records to score")
    correct = [0] * MAX_N
    guess = [0] * MAX_N
    hyp_len = 0
    ref_len = 0
    n_empty = 0
    for rec in records:
        hyp = tokenize(rec.predicted)
        refs = [tokenize(r) for r in rec.references]
        if not hyp:
            n_empty += 1
        hyp_len += len(hyp)
        # Closest reference length; ties break toward the shorter reference.
        ref_len += min((abs(len(r) - len(hyp)), len(r)) for r in refs)[1]
        for n in range(1, MAX_N + 1):
            hyp_counts = _ngrams(hyp, n)
            max_ref = Counter()
            for r in refs:
                for gram, count in _ngrams(r, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            correct[n - 1] += sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
            guess[n - 1] += max(0, len(hyp) - n + 1)
    brevity = 1.0 if hyp_len >= ref_len or hyp_len == 0 else math.exp(1.0 - ref_len / hyp_len)
    scores = {}
    log_sum = 0.0
    degenerate = False
    for n in range(1, MAX_N + 1):
        if guess[n - 1] == 0 or correct[n - 1] == 0:
            degenerate = True
        if degenerate:
            scores[f"bleu{n}"] = 0.0
            continue
        log_sum += math.log(correct[n - 1] / guess[n - 1])
        scores[f"bleu{n}"] = brevity * math.exp(log_sum / n)
    scores["n_empty_predictions"] = n_empty
    return scores


def _lcs_len(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(records: list[OeRecord]) -> float:
    """Mean ROUGE-L F over records; empty predictions contribute 0."""
    if not records:
        raise ValidationError("no records to score")
    total = 0.0
    for rec in records:
        hyp = tokenize(rec.predicted)
        if not hyp:
            continue
        best_p = 0.0
        best_r = 0.0
        for ref in rec.references:
            r_tokens = tokenize(ref)
            if not r_tokens:
                continue
            lcs = _lcs_len(hyp, r_tokens)
            best_p = max(best_p, lcs / len(hyp))
            best_r = max(best_r, lcs / len(r_tokens))
        if best_p > 0 and best_r > 0:
            b2 = ROUGE_BETA * ROUGE_BETA
            total += (1 + b2) * best_p * best_r / (best_r + b2 * best_p)
    return total / len(records)


def cider(records: list[OeRecord]) -> float:
    """Plain corpus CIDEr (see module docstring for the exact recipe)."""
    if not records:
        raise ValidationError("no records to score")
    n_docs = len(records)
    df: Counter = Counter()
    tokenized = []
    for rec in records:
        refs = [tokenize(r) for r in rec.references]
        tokenized.append((tokenize(rec.predicted), refs))
        seen = set()
        for r in refs:
            for n in range(1, MAX_N + 1):
                seen.update(_ngrams(r, n).keys())
        df.update(seen)
    log_n = math.log(n_docs)

    def tfidf(tokens: list[str]) -> tuple[list[dict], list[float]]:
        vecs = []
        norms = []
        for n in range(1, MAX_N + 1):
            vec = {
                gram: count * (log_n - math.log(max(1.0, df[gram])))
                for gram, count in _ngrams(tokens, n).items()
            }
            vecs.append(vec)
            norms.append(math.sqrt(sum(w * w for w in vec.values())))
        return vecs, norms

    total = 0.0
    for hyp, refs in tokenized:
        hyp_vecs, hyp_norms = tfidf(hyp)
        record_score = 0.0
        for ref in refs:
            ref_vecs, ref_norms = tfidf(ref)
            sims = []
            for n in range(MAX_N):
                dot = sum(
                    w * ref_vecs[n].get(gram, 0.0) for gram, w in hyp_vecs[n].items()
                )
                denom = hyp_norms[n] * ref_norms[n]
                sims.append(dot / denom if denom > 0 else 0.0)
            record_score += sum(sims) / MAX_N
        total += 10.0 * record_score / len(refs)
    return total / n_docs


def caption_report(records: list[OeRecord]) -> dict:
    """All open-ended metrics plus the tokenizer tag they were computed with."""
    bleu = corpus_bleu(records)
    return {
        "bleu1": bleu["bleu1"],
        "bleu2": bleu["bleu2"],
        "bleu3": bleu["bleu3"],
        "bleu4": bleu["bleu4"],
        "n_empty_predictions": bleu["n_empty_predictions"],
        "rouge_l": rouge_l(records),
        "cider": cider(records),
        "tokenizer": TOKENIZER_VERSION,
        "n_records": len(records),
    }
