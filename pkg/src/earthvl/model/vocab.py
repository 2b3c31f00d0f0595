"""Whitespace-level vocabulary for the toy decoder.

Model tokens are raw whitespace splits of questions and answers, so decoding
is an exact join and generated strings can be compared byte-for-byte against
references. The numeric placeholder <num> substitutes integer literals on
the separated route; the shared route keeps count words in the vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ValidationError
from ..text import NUM_TOKEN

PAD = "<pad>"
A_START = "<a>"
EOS = "<eos>"
UNK = "<unk>"
NUM = NUM_TOKEN

SPECIALS = (PAD, A_START, EOS, UNK, NUM)


def split_tokens(text: str) -> list[str]:
    return text.split()


@dataclass
class Vocab:
    words: list[str]
    index: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        if tuple(self.words[: len(SPECIALS)]) != SPECIALS:
            raise ValidationError("vocabulary must start with the special tokens")
        if len(set(self.words)) != len(self.words):
            raise ValidationError("vocabulary contains duplicate words")
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    @property
    def pad_id(self) -> int:
        return self.index[PAD]

    @property
    def a_start_id(self) -> int:
        return self.index[A_START]

    @property
    def eos_id(self) -> int:
        return self.index[EOS]

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    @property
    def num_id(self) -> int:
        return self.index[NUM]

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.unk_id
        return [self.index.get(t, unk) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.words[i] for i in ids]

    def number_word_ids(self, count_vocab: int) -> list[int]:
        """Vocabulary ids of the count words '0'..'count_vocab-1', in order."""
        missing = [str(v) for v in range(count_vocab) if str(v) not in self.index]
        if missing:
            raise ValidationError(f"vocabulary lacks count words: {missing[:5]}...")
        return [self.index[str(v)] for v in range(count_vocab)]


def build_vocab(
    questions: list[str],
    answers: list[str],
    include_counts_to: int | None = None,
) -> Vocab:
    """Vocabulary over question and answer tokens, taken as given.

    Callers mask counting answers before building (see vocab_for_pairs), so
    the placeholder arrives as a literal token here and collapses onto the
    special. include_counts_to adds count words 0..N-1 (the shared route
    emits them as ordinary tokens; unseen counts must still be in-vocab).
    """
    seen: dict[str, None] = {}
    for text in (*questions, *answers):
        for tok in split_tokens(text):
            seen.setdefault(tok, None)
    words = list(SPECIALS) + sorted(w for w in seen if w not in SPECIALS)
    if include_counts_to is not None:
        existing = set(words)
        words.extend(str(v) for v in range(include_counts_to) if str(v) not in existing)
    return Vocab(words=words)
