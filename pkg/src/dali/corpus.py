"""Tokenized corpora, vocabularies and descriptive statistics.

Input is pre-tokenized text: one sentence per line, tokens separated by
whitespace. No case folding or re-segmentation is applied.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from dali.errors import AlignmentError, EmptyCorpusError, EmptyVocabularyError

Sentence = tuple[str, ...]


class Side(str, enum.Enum):
    SOURCE = "source"
    TARGET = "target"


def _check_sentence(sent: Sequence[str]) -> Sentence:
    sent = tuple(sent)
    if not sent:
        raise ValueError("sentences must contain at least one token")
    for tok in sent:
        if not tok or tok != tok.strip() or len(tok.split()) != 1:
            raise ValueError(f"invalid token {tok!r}")
    return sent


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    side: Side = Side.TARGET
    domain: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "sentences", tuple(_check_sentence(s) for s in self.sentences)
        )
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def from_lines(cls, lines: Iterable[str], side=Side.TARGET, domain="") -> "Corpus":
        sents = [line.split() for line in lines]
        return cls(tuple(tuple(s) for s in sents if s), side, domain)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def tokens(self):
        for sent in self.sentences:
            yield from sent


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[tuple[Sentence, Sentence], ...]

    def __post_init__(self):
        pairs = tuple(
            (_check_sentence(s), _check_sentence(t)) for s, t in self.pairs
        )
        if not pairs:
            raise EmptyCorpusError("parallel corpus has no sentence pairs")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def source(self) -> Corpus:
        return Corpus(tuple(s for s, _ in self.pairs), Side.SOURCE)

    @property
    def target(self) -> Corpus:
        return Corpus(tuple(t for _, t in self.pairs), Side.TARGET)

    def swapped(self) -> "ParallelCorpus":
        return ParallelCorpus(tuple((t, s) for s, t in self.pairs))


@dataclass(frozen=True)
class Vocabulary:
    """Token counts. ``most_common`` orders by count, then token."""

    entries: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for tok, c in self.entries.items():
            if c < 1:
                raise ValueError(f"token {tok!r} has non-positive count {c}")

    @property
    def total_tokens(self) -> int:
        return sum(self.entries.values())

    def __len__(self):
        return len(self.entries)

    def __contains__(self, token):
        return token in self.entries

    def __iter__(self):
        return iter(self.entries)

    def count(self, token: str) -> int:
        return self.entries.get(token, 0)

    def most_common(self, n: int | None = None) -> list[tuple[str, int]]:
        ranked = sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if n is None else ranked[:n]

    def merged(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary(dict(Counter(self.entries) + Counter(other.entries)))


@dataclass(frozen=True)
class CorpusStats:
    words: int
    sentences: int

    @property
    def words_per_sentence(self) -> float:
        return self.words / self.sentences

    def to_tsv(self) -> str:
        return (
            f"words\t{self.words}\n"
            f"sentences\t{self.sentences}\n"
            f"words_per_sentence\t{round_half_up(self.words_per_sentence)}\n"
        )


def round_half_up(value: float, places: int = 2) -> str:
    """Format ``value`` with ``places`` decimals, rounding ties away from zero."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8", newline=None) as fh:
        return [line.rstrip("\n") for line in fh]


def load_monolingual(path, side=Side.TARGET, domain: str = "") -> Corpus:
    """Read a one-sentence-per-line file. Blank lines are skipped."""
    corpus = Corpus.from_lines(_read_lines(path), side, domain)
    if not corpus.sentences:
        raise EmptyCorpusError(f"{path}: no non-blank lines")
    return corpus


def load_parallel(src_path, tgt_path) -> ParallelCorpus:
    """Read two line-aligned files; blank lines are rejected."""
    src = _read_lines(src_path)
    tgt = _read_lines(tgt_path)
    if len(src) != len(tgt):
        raise AlignmentError(
            f"line count mismatch: {src_path} has {len(src)} lines, "
            f"{tgt_path} has {len(tgt)}"
        )
    pairs = []
    for i, (s, t) in enumerate(zip(src, tgt), start=1):
        s, t = s.split(), t.split()
        if not s or not t:
            raise AlignmentError(f"blank line {i} in parallel input")
        pairs.append((tuple(s), tuple(t)))
    if not pairs:
        raise EmptyCorpusError(f"{src_path}: no sentence pairs")
    return ParallelCorpus(tuple(pairs))


def build_vocab(corpus: Corpus | Iterable[Sentence], min_count: int = 1) -> Vocabulary:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter()
    for sent in corpus:
        counts.update(sent)
    if not counts:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    kept = {tok: c for tok, c in counts.items() if c >= min_count}
    if not kept:
        raise EmptyVocabularyError(f"no token occurs at least {min_count} times")
    return Vocabulary(kept)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    if not corpus.sentences:
        raise EmptyCorpusError("corpus is empty")
    return CorpusStats(sum(len(s) for s in corpus.sentences), len(corpus.sentences))


def oov_stats(out_vocab: Vocabulary, in_vocab: Vocabulary) -> tuple[int, float]:
    """Count in-domain types missing from the out-of-domain vocabulary.

    Returns ``(new_types, ratio)`` where ``ratio`` is ``new_types`` divided by
    the out-of-domain vocabulary size, rounded half-up to two decimals.
    """
    if not out_vocab or not in_vocab:
        raise EmptyVocabularyError("oov_stats needs two non-empty vocabularies")
    new_types = sum(1 for w in in_vocab if w not in out_vocab)
    return new_types, float(round_half_up(new_types / len(out_vocab)))
