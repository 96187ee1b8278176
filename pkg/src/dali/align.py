"""Lexical translation tables.

Tables are either trained here with IBM Model 1 (EM with a NULL source word,
uniform initialization) or imported from TSV rows written by an external
aligner such as GIZA++.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass

from dali._io import atomic_write
from dali.corpus import ParallelCorpus
from dali.errors import ParameterError, ParseError, RangeError

NULL = "<NULL>"


class Direction(str, enum.Enum):
    FORWARD = "forward"  # P(target | source), conditioned on source words
    BACKWARD = "backward"  # P(source | target), conditioned on target words


@dataclass(frozen=True)
class TranslationTable:
    """``probs[conditioning][candidate]`` for one direction.

    Conditioning words are source words for a forward table and target words
    for a backward table.
    """

    direction: Direction
    probs: dict[str, dict[str, float]]

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))

    def prob(self, conditioning: str, candidate: str) -> float:
        return self.probs.get(conditioning, {}).get(candidate, 0.0)

    def best(self, conditioning: str) -> str | None:
        row = self.probs.get(conditioning)
        if not row:
            return None
        return min(row, key=lambda c: (-row[c], c))

    def to_tsv(self) -> str:
        lines = []
        for cond in sorted(self.probs):
            row = self.probs[cond]
            for cand in sorted(row):
                lines.append(f"{cond}\t{cand}\t{row[cand]!r}\n")
        return "".join(lines)


def _prune(probs, prob_floor):
    pruned = {}
    for cond in sorted(probs):
        row = {c: p for c, p in probs[cond].items() if p >= prob_floor and p > 0.0}
        if not row:
            continue
        total = math.fsum(row.values())
        pruned[cond] = {c: p / total for c, p in sorted(row.items())}
    return pruned


def model1_log_likelihood(parallel: ParallelCorpus, probs, null=True) -> float:
    """Corpus log-likelihood of the generated side under Model 1.

    Conditioning words are the first element of each pair; the constant
    length term is omitted.
    """
    ll = 0.0
    for cond_sent, gen_sent in parallel:
        conds = ((NULL,) if null else ()) + cond_sent
        norm = len(conds)
        for g in gen_sent:
            total = sum(probs.get(c, {}).get(g, 0.0) for c in conds)
            ll += math.log(total / norm) if total > 0 else -math.inf
    return ll


def _em_step(parallel, t):
    counts = defaultdict(lambda: defaultdict(float))
    for cond_sent, gen_sent in parallel:
        conds = (NULL,) + cond_sent
        for g in gen_sent:
            weights = [t[c][g] for c in conds]
            z = sum(weights)
            if z == 0.0:
                continue
            for c, w in zip(conds, weights):
                counts[c][g] += w / z
    new_t = {}
    for c, row in counts.items():
        total = sum(row.values())
        new_t[c] = {g: v / total for g, v in row.items()}
    return new_t


def train_model1(
    parallel: ParallelCorpus,
    iterations: int = 5,
    prob_floor: float = 1e-4,
    direction=Direction.FORWARD,
    history: list | None = None,
) -> TranslationTable:
    """Train an IBM Model 1 table with EM.

    A forward table conditions on source words and generates target words;
    a backward table is trained on the swapped corpus. Entries below
    ``prob_floor`` are pruned after the last iteration and each row is
    renormalized.

    If ``history`` is a list, the corpus log-likelihood before the first
    iteration and after every iteration is appended to it.
    """
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    if not 0.0 <= prob_floor < 1.0:
        raise ParameterError("prob_floor must lie in [0, 1)")
    direction = Direction(direction)
    data = parallel if direction is Direction.FORWARD else parallel.swapped()

    gen_vocab = sorted({g for _, gen in data for g in gen})
    uniform = 1.0 / len(gen_vocab)
    # Only co-occurring (conditioning, generated) entries are ever non-zero.
    t = defaultdict(dict)
    for cond_sent, gen_sent in data:
        for c in (NULL,) + cond_sent:
            row = t[c]
            for g in gen_sent:
                row[g] = uniform
    t = dict(t)

    if history is not None:
        history.append(model1_log_likelihood(data, t))
    for _ in range(iterations):
        t = _em_step(data, t)
        if history is not None:
            history.append(model1_log_likelihood(data, t))
    return TranslationTable(direction, _prune(t, prob_floor))


def import_table(path, direction) -> TranslationTable:
    """Read ``conditioning<TAB>candidate<TAB>prob`` rows and renormalize."""
    probs = defaultdict(dict)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3 or not fields[0] or not fields[1]:
                raise ParseError(
                    "expected conditioning<TAB>candidate<TAB>prob", lineno, path
                )
            try:
                p = float(fields[2])
            except ValueError:
                raise ParseError(f"bad probability {fields[2]!r}", lineno, path) from None
            if not 0.0 < p <= 1.0:
                raise RangeError(f"{path}:{lineno}: probability {p} outside (0, 1]")
            probs[fields[0]][fields[1]] = p
    return TranslationTable(direction, _prune(probs, 0.0))


def export_table(table: TranslationTable, path):
    atomic_write(path, table.to_tsv())


def directional_lexicon(table: TranslationTable) -> list[tuple[str, str]]:
    """All (source, target) pairs with non-zero probability, NULL excluded."""
    pairs = []
    for cond in sorted(table.probs):
        if cond == NULL:
            continue
        for cand, p in sorted(table.probs[cond].items()):
            if p <= 0.0 or cand == NULL:
                continue
            if table.direction is Direction.FORWARD:
                pairs.append((cond, cand))
            else:
                pairs.append((cand, cond))
    return pairs
