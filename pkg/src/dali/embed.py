"""Word embeddings in the plain text vector format.

The file starts with a ``N d`` header, followed by one line per word: the
token and ``d`` numbers. Vectors are stored row-wise, one row per word.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from dali.errors import DataError, DegenerateVectorError, EmptyOverlapError, ParseError
from dali.seedlex import Lexicon

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    words: tuple[str, ...]
    vectors: np.ndarray
    n_duplicates: int = 0
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        words = tuple(self.words)
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("vectors must be an (N, d) array with one row per word")
        if not np.all(np.isfinite(vectors)):
            raise DataError("embedding contains non-finite values")
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise ValueError("duplicate words in embedding matrix")
        vectors.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def head(self, n: int) -> "EmbeddingMatrix":
        """The first ``n`` rows; text vector files list frequent words first."""
        return EmbeddingMatrix(self.words[:n], self.vectors[:n])

    def subset(self, words) -> "EmbeddingMatrix":
        rows = [self.index[w] for w in words]
        return EmbeddingMatrix(tuple(words), self.vectors[rows])

    def to_text(self, precision: int = 17) -> str:
        lines = [f"{len(self)} {self.dim}\n"]
        for w, row in zip(self.words, self.vectors):
            nums = " ".join(format(x, f".{precision}g") for x in row)
            lines.append(f"{w} {nums}\n")
        return "".join(lines)


def load_embeddings(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be 'N d'", 1, path)
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError("header must be 'N d'", 1, path) from None
        words, rows, seen, dups = [], [], set(), 0
        n_rows = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            n_rows += 1
            if len(parts) != d + 1:
                raise ParseError(
                    f"expected a token and {d} values, got {len(parts) - 1} values",
                    lineno,
                    path,
                )
            try:
                vec = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise ParseError("non-numeric vector value", lineno, path) from None
            if not np.all(np.isfinite(vec)):
                raise DataError(f"{path}:{lineno}: non-finite value for {parts[0]!r}")
            if parts[0] in seen:
                dups += 1
                continue
            seen.add(parts[0])
            words.append(parts[0])
            rows.append(vec)
    if n_rows != n:
        raise ParseError(f"header declares {n} rows but file has {n_rows}", 1, path)
    if dups:
        logger.warning("%s: skipped %d duplicate word(s)", path, dups)
    vectors = np.vstack(rows) if rows else np.zeros((0, d))
    return EmbeddingMatrix(tuple(words), vectors, n_duplicates=dups)


def normalize(emb: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit L2 norm."""
    norms = np.linalg.norm(emb.vectors, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateVectorError(f"zero vector for word {emb.words[zero[0]]!r}")
    return EmbeddingMatrix(emb.words, emb.vectors / norms[:, None], emb.n_duplicates)


def paired_submatrices(
    src: EmbeddingMatrix, tgt: EmbeddingMatrix, lexicon: Lexicon
) -> tuple[np.ndarray, np.ndarray, Lexicon]:
    """Row-aligned (n, d) matrices for the lexicon pairs present in both spaces."""
    kept = [(s, t) for s, t in lexicon if s in src and t in tgt]
    if not kept:
        raise EmptyOverlapError("no lexicon pair has embeddings on both sides")
    x = src.vectors[[src.index[s] for s, _ in kept]]
    y = tgt.vectors[[tgt.index[t] for _, t in kept]]
    return x, y, Lexicon(tuple(kept), lexicon.provenance)
