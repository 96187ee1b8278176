"""Analysis metrics for adapted translation output and induced lexicons."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from dali.corpus import Corpus, Vocabulary
from dali.errors import AlignmentError, ParameterError
from dali.pseudo import PseudoParallelCorpus
from dali.seedlex import Lexicon


@dataclass(frozen=True)
class HitEvent:
    line: int
    source: str
    target: str
    hit: bool


@dataclass(frozen=True)
class HitReport:
    c_total: int
    c_hyp: int
    events: tuple[HitEvent, ...] = field(default=(), repr=False)

    @property
    def percentage(self) -> float | None:
        """``c_hyp / c_total`` as a fraction, or None when no event exists."""
        return self.c_hyp / self.c_total if self.c_total else None

    def summary(self) -> str:
        pct = self.percentage
        shown = "n/a" if pct is None else f"{100 * pct:.2f}%"
        return f"hits\t{self.c_hyp}\nevents\t{self.c_total}\nhit_percentage\t{shown}\n"


@dataclass(frozen=True)
class Bucket:
    lo: float
    hi: float
    n_pairs: int
    accuracy: float | None


@dataclass(frozen=True)
class BucketReport:
    buckets: tuple[Bucket, ...]

    def to_tsv(self) -> str:
        rows = ["lo\thi\tpairs\taccuracy\n"]
        for b in self.buckets:
            acc = "n/a" if b.accuracy is None else f"{b.accuracy:.4f}"
            rows.append(f"{b.lo:g}\t{b.hi:g}\t{b.n_pairs}\t{acc}\n")
        return "".join(rows)


def unseen_words(out_vocab: Vocabulary, test_src) -> set[str]:
    return {tok for sent in test_src for tok in sent if tok not in out_vocab}


def hit_percentage(
    test_src: Corpus,
    test_ref: Corpus,
    hypothesis: Corpus,
    ref_lex: Lexicon,
    unseen: set[str],
) -> HitReport:
    """Count unseen-word translation events and how many the hypothesis hits.

    An event is a (sentence, lexicon pair) where the source word is unseen
    and occurs in the source sentence while its lexicon partner occurs in
    the reference sentence. It is a hit if the partner also occurs in the
    hypothesis sentence. Each event counts at most once.
    """
    n = len(test_src)
    if len(test_ref) != n or len(hypothesis) != n:
        raise AlignmentError(
            f"test source, reference and hypothesis have {n}, {len(test_ref)} "
            f"and {len(hypothesis)} lines"
        )
    s2t = {s: t for s, t in ref_lex if s in unseen}
    events = []
    for i, (src, ref, hyp) in enumerate(zip(test_src, test_ref, hypothesis), start=1):
        ref_set, hyp_set = set(ref), set(hyp)
        for s in sorted(set(src)):
            t = s2t.get(s)
            if t is not None and t in ref_set:
                events.append(HitEvent(i, s, t, t in hyp_set))
    return HitReport(len(events), sum(e.hit for e in events), tuple(events))


def bucket_accuracy(
    events, pseudo_corpus: PseudoParallelCorpus, n_buckets: int = 10
) -> BucketReport:
    """Average per-pair hit rate, bucketed by source-word frequency percentile.

    A pair's frequency is the count of its source word on the synthetic
    source side of ``pseudo_corpus``. Its percentile is the share of pairs
    with strictly lower frequency, so tied pairs share a bucket.
    """
    if n_buckets < 1:
        raise ParameterError("n_buckets must be >= 1")
    if isinstance(events, HitReport):
        events = events.events
    freq = Counter(tok for sent in pseudo_corpus.sources for tok in sent)
    per_pair = defaultdict(list)
    for e in events:
        per_pair[(e.source, e.target)].append(e.hit)

    pairs = sorted(per_pair)
    width = 100.0 / n_buckets
    which = np.zeros(0, dtype=int)
    acc = np.zeros(0)
    if pairs:
        f = np.array([freq[s] for s, _ in pairs])
        acc = np.array([np.mean(per_pair[p]) for p in pairs])
        below = np.searchsorted(np.sort(f), f, side="left")
        # bucket = floor(percentile / width), in exact integer arithmetic
        which = np.minimum(below * n_buckets // len(pairs), n_buckets - 1)

    buckets = []
    for b in range(n_buckets):
        members = acc[which == b]
        buckets.append(
            Bucket(
                b * width,
                (b + 1) * width,
                int(members.size),
                float(members.mean()) if members.size else None,
            )
        )
    return BucketReport(tuple(buckets))


def lexicon_folds(lexicon: Lexicon, n_folds: int = 5, rng_seed: int = 0) -> list[Lexicon]:
    """Nested lexicon portions built from a random partition into folds.

    Portion ``i`` holds folds ``1..i``; pairs keep their original order.
    """
    if n_folds < 2:
        raise ParameterError("n_folds must be >= 2")
    if len(lexicon) < n_folds:
        raise ParameterError(f"lexicon of {len(lexicon)} pairs is smaller than {n_folds} folds")
    rng = np.random.default_rng(rng_seed)
    folds = np.array_split(rng.permutation(len(lexicon)), n_folds)
    portions, chosen = [], set()
    for fold in folds:
        chosen.update(int(i) for i in fold)
        pairs = tuple(p for i, p in enumerate(lexicon.pairs) if i in chosen)
        portions.append(Lexicon(pairs, lexicon.provenance))
    return portions


def lexicon_overlap(a: Lexicon, b: Lexicon, reference: Lexicon) -> tuple[float, float, float]:
    """Percentages of pairs only in ``a``, only in ``b``, and in both.

    All three are relative to the union of ``a``, ``b`` and ``reference``.
    """
    sa, sb, sr = set(a), set(b), set(reference)
    union = sa | sb | sr
    if not union:
        raise ParameterError("all lexicons are empty")
    n = len(union)
    return (
        100.0 * len(sa - sb) / n,
        100.0 * len(sb - sa) / n,
        100.0 * len(sa & sb) / n,
    )
