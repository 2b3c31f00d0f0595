"""Tokenization and number extraction shared by QA generation and metrics.

The tokenizer is deliberately dumb and versioned: lowercase, punctuation
split off as separate tokens, no stemming. Metric scores are only comparable
when produced with the same tokenizer version, so reports record it.
"""

from __future__ import annotations

import re

from .errors import DecodeError

TOKENIZER_VERSION = "earthvl-tok-1"

# A token is a run of alphanumerics (underscores included) or one punctuation
# character. "--" in direction words like E--W is kept intact by the first
# alternative below.
_TOKEN_RE = re.compile(r"[a-z0-9_]+(?:--[a-z0-9_]+)*|[^\sa-z0-9_]")

_NUMBER_RE = re.compile(r"\d+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word and punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


def extract_numbers(text: str) -> list[int]:
    """All base-10 integer literals in order of appearance."""
    return [int(m) for m in _NUMBER_RE.findall(text)]


def count_phrase(n: int, singular: str, plural: str) -> str:
    """Render a count with the right noun form, e.g. '1 building'."""
    return f"{n} {singular if n == 1 else plural}"


NUM_TOKEN = "<num>"

_NUM_TOKEN_RE = re.compile(re.escape(NUM_TOKEN))


def mask_numbers(text: str) -> tuple[str, list[int]]:
    """Replace integer literals with the placeholder; return (masked, numbers)."""
    numbers = extract_numbers(text)
    return _NUMBER_RE.sub(NUM_TOKEN, text), numbers


def restore_numbers(masked: str, numbers: list[int]) -> str:
    """Inverse of mask_numbers. The counts must match the placeholders exactly."""
    slots = len(_NUM_TOKEN_RE.findall(masked))
    if slots != len(numbers):
        raise DecodeError(f"answer has {slots} placeholders but {len(numbers)} counts")
    it = iter(numbers)
    return _NUM_TOKEN_RE.sub(lambda _m: str(next(it)), masked)
