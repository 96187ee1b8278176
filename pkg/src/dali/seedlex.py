"""Seed lexicon extraction from out-of-domain parallel data.

The pipeline is: union the two directional lexicons, drop pairs whose
punctuation does not match, count sentence-level co-occurrences in the
parallel corpus, then greedily keep the most frequent pairs so that every
source and every target word is used at most once.
"""

from __future__ import annotations

import enum
import unicodedata
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from dali._io import atomic_write
from dali.align import TranslationTable, directional_lexicon
from dali.corpus import ParallelCorpus
from dali.errors import EmptyLexiconError, ParseError

Pair = tuple[str, str]


class Provenance(str, enum.Enum):
    SEED = "seed"
    INDUCED = "induced"
    REFERENCE = "reference"
    IMPORTED = "imported"


@dataclass(frozen=True)
class Lexicon:
    """One-to-one list of (source, target) word pairs."""

    pairs: tuple[Pair, ...]
    provenance: Provenance = Provenance.IMPORTED

    def __post_init__(self):
        pairs = tuple((s, t) for s, t in self.pairs)
        sources = {s for s, _ in pairs}
        targets = {t for _, t in pairs}
        if len(sources) != len(pairs) or len(targets) != len(pairs):
            raise ValueError("lexicon is not one-to-one")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair):
        return pair in set(self.pairs)

    def source_to_target(self) -> dict[str, str]:
        return dict(self.pairs)

    def target_to_source(self) -> dict[str, str]:
        return {t: s for s, t in self.pairs}

    def to_tsv(self, header: bool = False) -> str:
        lines = [f"# provenance={self.provenance.value}\n"] if header else []
        lines.extend(f"{s}\t{t}\n" for s, t in self.pairs)
        return "".join(lines)


def save_lexicon(lexicon: Lexicon, path, header: bool = False):
    atomic_write(path, lexicon.to_tsv(header=header))


def load_lexicon(path, provenance=Provenance.IMPORTED) -> Lexicon:
    """Read ``source<TAB>target`` rows; ``#`` lines are comments."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key == "provenance":
                    provenance = value
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not all(fields):
                raise ParseError("expected source<TAB>target", lineno, path)
            pairs.append((fields[0], fields[1]))
    return Lexicon(tuple(pairs), provenance)


def is_punctuation(token: str) -> bool:
    """True if every character is Unicode punctuation (P*) or symbol (S*)."""
    return bool(token) and all(unicodedata.category(ch)[0] in "PS" for ch in token)


def union_lexicons(fw: Iterable[Pair], bw: Iterable[Pair]) -> list[Pair]:
    return sorted(set(fw) | set(bw))


def prune_punct(pairs: Iterable[Pair]) -> list[Pair]:
    return [
        (s, t)
        for s, t in pairs
        if s == t or not (is_punctuation(s) or is_punctuation(t))
    ]


def count_pairs_literal(pairs, parallel: ParallelCorpus) -> dict[Pair, int]:
    """Direct double loop over sentence pairs and lexicon entries."""
    pairs = list(dict.fromkeys(pairs))
    counts = {p: 0 for p in pairs}
    for src, tgt in parallel:
        for s, t in pairs:
            if s in src and t in tgt:
                counts[(s, t)] += 1
    return counts


def count_pairs(pairs, parallel: ParallelCorpus) -> dict[Pair, int]:
    """Number of sentence pairs containing s on the source side and t on the
    target side, counted at most once per sentence pair.

    Uses an index from source word to candidate targets, so the cost scales
    with sentence length rather than lexicon size.
    """
    pairs = list(dict.fromkeys(pairs))
    counts = {p: 0 for p in pairs}
    by_source = defaultdict(list)
    for s, t in pairs:
        by_source[s].append(t)
    for src, tgt in parallel:
        tgt_set = set(tgt)
        for s in set(src):
            for t in by_source.get(s, ()):
                if t in tgt_set:
                    counts[(s, t)] += 1
    return counts


def select_one_to_one(counts: dict[Pair, int]) -> Lexicon:
    ranked = sorted(
        ((p, c) for p, c in counts.items() if c > 0), key=lambda pc: (-pc[1], pc[0])
    )
    used_s, used_t, kept = set(), set(), []
    for (s, t), _ in ranked:
        if s not in used_s and t not in used_t:
            kept.append((s, t))
            used_s.add(s)
            used_t.add(t)
    return Lexicon(tuple(kept), Provenance.SEED)


def extract_seed_lexicon(
    parallel: ParallelCorpus, fw_table: TranslationTable, bw_table: TranslationTable
) -> Lexicon:
    candidates = union_lexicons(
        directional_lexicon(fw_table), directional_lexicon(bw_table)
    )
    lexicon = select_one_to_one(count_pairs(prune_punct(candidates), parallel))
    if not lexicon.pairs:
        raise EmptyLexiconError("seed lexicon extraction produced no pairs")
    return lexicon
