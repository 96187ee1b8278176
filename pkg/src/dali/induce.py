"""CSLS retrieval and mutual-nearest-neighbour lexicon induction.

For a mapped source vector ``Wx`` and a target vector ``y``::

    CSLS(Wx, y) = 2 cos(Wx, y) - r_T(Wx) - r_S(y)

where ``r_T(Wx)`` is the mean cosine between ``Wx`` and its ``k`` nearest
target vectors, and ``r_S(y)`` the mean cosine between ``y`` and its ``k``
nearest mapped source vectors. All rows are assumed unit-normalized, so
cosines are dot products. Search is exact and runs over blocks of queries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from dali.embed import EmbeddingMatrix
from dali.errors import ParameterError
from dali.seedlex import Lexicon, Provenance

logger = logging.getLogger(__name__)

BLOCK_SIZE = 1024


def _blocks(n, block_size):
    for start in range(0, n, block_size):
        yield start, min(start + block_size, n)


def knn_cosine(queries, keys, k: int, block_size: int = BLOCK_SIZE):
    """Exact top-``k`` keys by cosine for every query row.

    Returns ``(indices, sims)``, both shaped ``(n_queries, k)`` and sorted by
    descending similarity; equal similarities keep ascending key order.
    """
    queries = np.asarray(queries, dtype=np.float64)
    keys = np.asarray(keys, dtype=np.float64)
    n_keys = keys.shape[0]
    if not 1 <= k <= n_keys:
        raise ParameterError(f"k={k} must lie in [1, {n_keys}]")
    indices = np.empty((queries.shape[0], k), dtype=np.int64)
    sims = np.empty((queries.shape[0], k))
    for lo, hi in _blocks(queries.shape[0], block_size):
        block = queries[lo:hi] @ keys.T
        kth = np.partition(block, n_keys - k, axis=1)[:, n_keys - k]
        for row, (scores, thr) in enumerate(zip(block, kth)):
            cand = np.flatnonzero(scores >= thr)
            order = cand[np.lexsort((cand, -scores[cand]))][:k]
            indices[lo + row] = order
            sims[lo + row] = scores[order]
    return indices, sims


def mean_topk(queries, keys, k: int, block_size: int = BLOCK_SIZE) -> np.ndarray:
    """Mean of the ``k`` largest cosines of each query against ``keys``."""
    n_keys = keys.shape[0]
    if not 1 <= k <= n_keys:
        raise ParameterError(f"k={k} must lie in [1, {n_keys}]")
    out = np.empty(queries.shape[0])
    for lo, hi in _blocks(queries.shape[0], block_size):
        block = queries[lo:hi] @ keys.T
        top = np.partition(block, n_keys - k, axis=1)[:, n_keys - k :]
        out[lo:hi] = top.mean(axis=1)
    return out


def map_vectors(w, vectors) -> np.ndarray:
    """Apply ``x -> Wx`` to every row."""
    return np.asarray(vectors) @ np.asarray(w).T


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """Neighbourhood densities for CSLS, plus the vectors they were built from."""

    k: int
    r_src: np.ndarray
    r_tgt: np.ndarray
    mapped_src: np.ndarray
    tgt: np.ndarray

    def csls_row(self, x_index: int) -> np.ndarray:
        cos = self.tgt @ self.mapped_src[x_index]
        return 2.0 * cos - self.r_src[x_index] - self.r_tgt


def _as_matrix(w):
    return getattr(w, "w", w)


def build_neighbor_index(
    w, src_emb: EmbeddingMatrix, tgt_emb: EmbeddingMatrix, k: int = 10,
    block_size: int = BLOCK_SIZE,
) -> NeighborIndex:
    if k < 1:
        raise ParameterError("k must be >= 1")
    mapped = map_vectors(_as_matrix(w), src_emb.vectors)
    tgt = tgt_emb.vectors
    r_src = mean_topk(mapped, tgt, k, block_size)
    r_tgt = mean_topk(tgt, mapped, k, block_size)
    return NeighborIndex(k, r_src, r_tgt, mapped, tgt)


def csls_score(idx: NeighborIndex, x_index: int, y_index: int) -> float:
    if not (0 <= x_index < len(idx.r_src) and 0 <= y_index < len(idx.r_tgt)):
        raise IndexError(f"word index ({x_index}, {y_index}) out of range")
    cos = float(idx.mapped_src[x_index] @ idx.tgt[y_index])
    return 2.0 * cos - idx.r_src[x_index] - idx.r_tgt[y_index]


def csls_argmax(idx: NeighborIndex, block_size: int = BLOCK_SIZE):
    """Best target per source and best source per target under CSLS.

    Ties go to the lowest index.
    """
    n_src, n_tgt = len(idx.r_src), len(idx.r_tgt)
    fwd = np.empty(n_src, dtype=np.int64)
    for lo, hi in _blocks(n_src, block_size):
        scores = 2.0 * (idx.mapped_src[lo:hi] @ idx.tgt.T)
        scores -= idx.r_src[lo:hi, None]
        scores -= idx.r_tgt[None, :]
        fwd[lo:hi] = scores.argmax(axis=1)
    bwd = np.empty(n_tgt, dtype=np.int64)
    for lo, hi in _blocks(n_tgt, block_size):
        scores = 2.0 * (idx.tgt[lo:hi] @ idx.mapped_src.T)
        scores -= idx.r_tgt[lo:hi, None]
        scores -= idx.r_src[None, :]
        bwd[lo:hi] = scores.argmax(axis=1)
    return fwd, bwd


def mutual_pairs(fwd, bwd) -> list[tuple[int, int]]:
    return [(int(s), int(t)) for s, t in enumerate(fwd) if bwd[t] == s]


def induce_lexicon(
    w,
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    k: int = 10,
    candidates=None,
    block_size: int = BLOCK_SIZE,
) -> Lexicon:
    """Pairs that are each other's CSLS nearest neighbour.

    Neighbourhoods and mutuality are computed over the full spaces; when
    ``candidates`` is given, only pairs whose source word is a candidate are
    returned.
    """
    if len(src_emb) == 0 or len(tgt_emb) == 0:
        raise ParameterError("embedding spaces must be non-empty")
    k_eff = min(k, len(src_emb), len(tgt_emb))
    idx = build_neighbor_index(w, src_emb, tgt_emb, k_eff, block_size)
    fwd, bwd = csls_argmax(idx, block_size)
    keep = None if candidates is None else set(candidates)
    pairs = tuple(
        (src_emb.words[s], tgt_emb.words[t])
        for s, t in mutual_pairs(fwd, bwd)
        if keep is None or src_emb.words[s] in keep
    )
    if not pairs:
        logger.warning("induction produced an empty lexicon")
    return Lexicon(pairs, Provenance.INDUCED)
