"""N-gram language model with interpolated Kneser-Ney smoothing.

Used to measure domain shift: train on the target side of one domain and
compute the average sentence perplexity on another.

Each sentence is padded with ``order - 1`` begin markers and one end
marker. The predicted events are the training vocabulary, the end marker
and an unknown-word symbol; the lowest level interpolates with the uniform
distribution over those events, so every conditional distribution sums to
one.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from dali._io import atomic_write
from dali.corpus import Vocabulary
from dali.errors import EmptyCorpusError, ParameterError, ParseError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
DEFAULT_DISCOUNT = 0.75


def _padded(sent, order):
    return (BOS,) * (order - 1) + tuple(sent) + (EOS,)


def count_ngrams(corpus, order: int) -> dict[int, Counter]:
    """Counts of every k-gram (k = 1..order) ending at a predicted position."""
    counts = {k: Counter() for k in range(1, order + 1)}
    for sent in corpus:
        toks = _padded(sent, order)
        for i in range(order - 1, len(toks)):
            for k in range(1, order + 1):
                counts[k][toks[i - k + 1 : i + 1]] += 1
    return counts


@dataclass(eq=False)
class NGramLM:
    order: int
    counts: dict[int, Counter]
    discount: float = DEFAULT_DISCOUNT
    vocab: Vocabulary = field(init=False)

    def __post_init__(self):
        if self.order < 1:
            raise ParameterError("order must be >= 1")
        if not 0.0 < self.discount <= 1.0:
            raise ParameterError("discount must lie in (0, 1]")
        unigrams = {g[0]: c for g, c in self.counts[1].items() if g[0] != EOS}
        self.vocab = Vocabulary(unigrams)
        self._uniform = 1.0 / (len(self.vocab) + 2)
        self._build_levels()

    def _build_levels(self):
        # Level k scores k-grams. The top level uses raw counts; lower levels
        # use continuation counts (number of distinct left extensions).
        self._numer, self._denom, self._types = {}, {}, {}
        for k in range(1, self.order + 1):
            if k == self.order:
                numer = dict(self.counts[k])
            else:
                numer = Counter(g[1:] for g in self.counts[k + 1])
            denom, types = defaultdict(int), defaultdict(int)
            for g, v in numer.items():
                denom[g[:-1]] += v
                types[g[:-1]] += 1
            self._numer[k], self._denom[k], self._types[k] = numer, dict(denom), dict(types)

    @property
    def events(self) -> list[str]:
        """Every symbol the model can predict."""
        return sorted(self.vocab) + [EOS, UNK]

    def _map(self, tok):
        return tok if tok in self.vocab or tok in (BOS, EOS) else UNK

    def prob(self, word: str, context=()) -> float:
        """P(word | context), using the last ``order - 1`` context tokens."""
        word = self._map(word)
        ctx = tuple(self._map(t) for t in context)[-(self.order - 1) :] if self.order > 1 else ()
        if len(ctx) < self.order - 1:
            ctx = (BOS,) * (self.order - 1 - len(ctx)) + ctx
        p = self._uniform
        d = self.discount
        for k in range(1, self.order + 1):
            h = ctx[len(ctx) - (k - 1) :] if k > 1 else ()
            denom = self._denom[k].get(h, 0)
            if denom == 0:
                continue
            c = self._numer[k].get(h + (word,), 0)
            p = max(c - d, 0.0) / denom + d * self._types[k][h] / denom * p
        return p

    def sentence_logprob(self, sent) -> tuple[float, int]:
        toks = _padded(sent, self.order)
        n = self.order - 1
        lp = 0.0
        for i in range(n, len(toks)):
            lp += math.log(self.prob(toks[i], toks[i - n : i]))
        return lp, len(toks) - n

    def to_text(self) -> str:
        lines = [f"# order={self.order} discount={self.discount!r}\n"]
        for k in range(1, self.order + 1):
            for g, c in sorted(self.counts[k].items()):
                lines.append(f"{' '.join(g)}\t{c}\n")
        return "".join(lines)


def train_lm(corpus, order: int = 5, discount: float = DEFAULT_DISCOUNT) -> NGramLM:
    if order < 1:
        raise ParameterError("order must be >= 1")
    sents = list(corpus)
    if not sents:
        raise EmptyCorpusError("cannot train a language model on an empty corpus")
    return NGramLM(order, count_ngrams(sents, order), discount)


def perplexity(lm: NGramLM, corpus) -> float:
    """Mean over sentences of the per-token perplexity (end marker included)."""
    vals = []
    for sent in corpus:
        lp, n = lm.sentence_logprob(sent)
        vals.append(math.exp(-lp / n))
    if not vals:
        raise EmptyCorpusError("cannot score an empty corpus")
    return math.fsum(vals) / len(vals)


def perplexity_matrix(corpora: dict, order: int = 5, discount: float = DEFAULT_DISCOUNT):
    """``{(train, test): perplexity}`` for every ordered pair of named corpora."""
    models = {name: train_lm(c, order, discount) for name, c in corpora.items()}
    return {
        (a, b): perplexity(models[a], corpora[b]) for a in corpora for b in corpora
    }


def save_lm(lm: NGramLM, path):
    atomic_write(path, lm.to_text())


def load_lm(path) -> NGramLM:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        try:
            meta = dict(kv.split("=") for kv in header.lstrip("# ").split())
            order, discount = int(meta["order"]), float(meta["discount"])
        except (ValueError, KeyError):
            raise ParseError("bad header", 1, path) from None
        counts = {k: Counter() for k in range(1, order + 1)}
        for lineno, line in enumerate(fh, start=2):
            gram, sep, c = line.rstrip("\n").partition("\t")
            toks = tuple(gram.split(" "))
            if not sep or not 1 <= len(toks) <= order:
                raise ParseError("expected n-gram<TAB>count", lineno, path)
            counts[len(toks)][toks] = int(c)
    return NGramLM(order, counts, discount)
