"""Pseudo-parallel corpus construction and data mixing."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from dali._io import atomic_write, write_lines
from dali.corpus import Corpus, ParallelCorpus, Sentence
from dali.errors import ParameterError
from dali.seedlex import Lexicon

logger = logging.getLogger(__name__)


class Origin(str, enum.Enum):
    TRANSLATED = "translated"
    COPIED = "copied"


class Method(str, enum.Enum):
    DALI = "dali"
    COPY = "copy"


@dataclass(frozen=True)
class PseudoParallelCorpus:
    """Synthetic source sentences paired with the untouched target sentences."""

    pairs: tuple[tuple[Sentence, Sentence], ...]
    origins: tuple[tuple[Origin, ...], ...]
    method: Method

    def __len__(self):
        return len(self.pairs)

    @property
    def sources(self) -> list[Sentence]:
        return [s for s, _ in self.pairs]

    @property
    def targets(self) -> list[Sentence]:
        return [t for _, t in self.pairs]

    def to_parallel(self) -> ParallelCorpus:
        return ParallelCorpus(self.pairs)

    def origins_tsv(self) -> str:
        return "".join(
            f"{line}\t{pos}\t{origin.value}\n"
            for line, tags in enumerate(self.origins, start=1)
            for pos, origin in enumerate(tags, start=1)
        )

    def write(self, src_path, tgt_path, origins_path=None):
        write_lines(src_path, (" ".join(s) for s, _ in self.pairs))
        write_lines(tgt_path, (" ".join(t) for _, t in self.pairs))
        if origins_path is not None:
            atomic_write(origins_path, self.origins_tsv())


def word_backtranslate(tgt_corpus: Corpus, lexicon: Lexicon) -> PseudoParallelCorpus:
    """Replace each target token by its lexicon source word, else copy it."""
    t2s = lexicon.target_to_source()
    pairs, origins = [], []
    for sent in tgt_corpus:
        src = tuple(t2s.get(tok, tok) for tok in sent)
        tags = tuple(
            Origin.TRANSLATED if tok in t2s else Origin.COPIED for tok in sent
        )
        pairs.append((src, sent))
        origins.append(tags)
    return PseudoParallelCorpus(tuple(pairs), tuple(origins), Method.DALI)


def copy_corpus(tgt_corpus: Corpus) -> PseudoParallelCorpus:
    if not len(tgt_corpus):
        raise ParameterError("cannot copy an empty corpus")
    return PseudoParallelCorpus(
        tuple((sent, sent) for sent in tgt_corpus),
        tuple(tuple(Origin.COPIED for _ in sent) for sent in tgt_corpus),
        Method.COPY,
    )


def coverage(tgt_corpus, lexicon: Lexicon) -> float:
    """Fraction of target tokens (with repetition) that the lexicon translates."""
    targets = set(lexicon.target_to_source())
    total = hit = 0
    for sent in tgt_corpus:
        total += len(sent)
        hit += sum(1 for tok in sent if tok in targets)
    return hit / total if total else 0.0


def mix(
    out_parallel: ParallelCorpus,
    pseudo: PseudoParallelCorpus,
    rng_seed: int,
    n_out: int | None = None,
) -> ParallelCorpus:
    """Sample out-of-domain pairs and append the pseudo pairs after them.

    By default as many out-of-domain pairs are drawn as there are pseudo
    pairs. Sampling is uniform without replacement; the sampled pairs keep
    their original corpus order.
    """
    if not len(pseudo):
        raise ParameterError("pseudo corpus is empty")
    want = len(pseudo) if n_out is None else n_out
    if want < 0:
        raise ParameterError("n_out must be >= 0")
    if want > len(out_parallel):
        logger.warning(
            "requested %d out-of-domain pairs but only %d exist; using all",
            want,
            len(out_parallel),
        )
        want = len(out_parallel)
    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(len(out_parallel), size=want, replace=False))
    sampled = tuple(out_parallel.pairs[i] for i in chosen)
    return ParallelCorpus(sampled + pseudo.pairs)
