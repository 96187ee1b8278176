"""Orthogonal mapping between two embedding spaces.

Vectors are rows here, so the mapped source matrix is ``X @ W.T``. The
Procrustes solution maximizes ``sum_i y_i . (W x_i)`` over orthogonal ``W``:
with ``U S V^T = svd(Y^T X)`` it is ``W = U V^T``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from dali._io import atomic_write
from dali.corpus import Vocabulary
from dali.embed import EmbeddingMatrix, paired_submatrices
from dali.errors import (
    DataError,
    EmptyLexiconError,
    ParameterError,
    ParseError,
    RefinementFailedError,
)
from dali.induce import induce_lexicon
from dali.seedlex import Lexicon, Provenance

logger = logging.getLogger(__name__)

ORTHO_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MappingMatrix:
    w: np.ndarray
    trained_on: int = 0

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def orthogonality_error(self) -> float:
        return float(np.linalg.norm(self.w.T @ self.w - np.eye(self.d)))

    def apply(self, vectors) -> np.ndarray:
        return np.asarray(vectors) @ self.w.T

    def to_text(self) -> str:
        lines = [f"{self.d} {self.d}\n"]
        lines += [" ".join(repr(float(x)) for x in row) + "\n" for row in self.w]
        return "".join(lines)


def save_mapping(m: MappingMatrix, path):
    atomic_write(path, m.to_text())


def load_mapping(path) -> MappingMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = [line.split() for line in fh if line.strip()]
    if not lines or len(lines[0]) != 2:
        raise ParseError("header must be 'd d'", 1, path)
    rows, cols = int(lines[0][0]), int(lines[0][1])
    if rows != cols or len(lines) != rows + 1:
        raise ParseError(f"expected {rows} rows of a square matrix", 1, path)
    for i, row in enumerate(lines[1:], start=2):
        if len(row) != cols:
            raise ParseError(f"expected {cols} values", i, path)
    return MappingMatrix(np.array(lines[1:], dtype=np.float64))


def procrustes(x_n, y_n) -> MappingMatrix:
    """Orthogonal ``W`` minimizing ``||Y - X W^T||_F`` for row-aligned pairs."""
    x_n = np.asarray(x_n, dtype=np.float64)
    y_n = np.asarray(y_n, dtype=np.float64)
    if x_n.ndim != 2 or x_n.shape != y_n.shape or x_n.shape[0] < 1:
        raise ParameterError(
            f"X and Y must have the same (n, d) shape with n >= 1, "
            f"got {x_n.shape} and {y_n.shape}"
        )
    if not (np.all(np.isfinite(x_n)) and np.all(np.isfinite(y_n))):
        raise DataError("non-finite values in Procrustes input")
    m = y_n.T @ x_n
    try:
        u, s, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise DataError(f"SVD failed: {exc}") from exc
    d = m.shape[0]
    if s[-1] <= s[0] * d * np.finfo(float).eps:
        warnings.warn(
            "cross-covariance is rank deficient; the orthogonal solution is "
            "not unique",
            RuntimeWarning,
            stacklevel=2,
        )
    return MappingMatrix(u @ vt, trained_on=x_n.shape[0])


def fit_from_lexicon(src_emb, tgt_emb, lexicon: Lexicon) -> MappingMatrix:
    x, y, _ = paired_submatrices(src_emb, tgt_emb, lexicon)
    return procrustes(x, y)


def refine(
    w0: MappingMatrix,
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    rounds: int = 5,
    k: int = 10,
    vocab_cap: int = 20000,
) -> MappingMatrix:
    """Alternate mutual-NN induction and re-solving Procrustes.

    Each round induces a lexicon among the ``vocab_cap`` first (most
    frequent) words of each space and fits a new map on it. A round that
    yields fewer than ``d`` pairs ends refinement and the previous map is
    returned.
    """
    if rounds < 1:
        raise ParameterError("rounds must be >= 1")
    if w0.orthogonality_error() >= ORTHO_TOL:
        raise ParameterError("initial map is not orthogonal")
    src = src_emb.head(vocab_cap)
    tgt = tgt_emb.head(vocab_cap)
    w = w0
    for r in range(rounds):
        lexicon = induce_lexicon(w, src, tgt, k)
        logger.info("refinement round %d: %d pairs", r + 1, len(lexicon))
        if not lexicon.pairs and r == 0:
            raise RefinementFailedError("first refinement round induced no pairs")
        if len(lexicon) < w.d:
            break
        w = fit_from_lexicon(src, tgt, lexicon)
    return w


def identical_string_seed(
    src_vocab: Vocabulary, tgt_vocab: Vocabulary, cap: int | None = None
) -> Lexicon:
    """Pair every token spelled identically in both vocabularies.

    Tokens are ordered by combined frequency (then alphabetically) and the
    list is cut at ``cap``.
    """
    shared = [w for w in src_vocab if w in tgt_vocab]
    if not shared:
        raise EmptyLexiconError("the vocabularies share no token")
    shared.sort(key=lambda w: (-(src_vocab.count(w) + tgt_vocab.count(w)), w))
    if cap is not None:
        shared = shared[:cap]
    return Lexicon(tuple((w, w) for w in shared), Provenance.SEED)
