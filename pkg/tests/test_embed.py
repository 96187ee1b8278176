import numpy as np
import pytest

from dali.embed import EmbeddingMatrix, load_embeddings, normalize, paired_submatrices
from dali.errors import DataError, DegenerateVectorError, EmptyOverlapError, ParseError
from dali.seedlex import Lexicon


def emb(words, rows):
    return EmbeddingMatrix(tuple(words), np.array(rows, dtype=float))


class TestLoad:
    def test_basic(self, write):
        e = load_embeddings(write("e.vec", "2 3\na 1 0 0\nb 0 1 0\n"))
        assert (len(e), e.dim) == (2, 3)
        assert e.words == ("a", "b")

    def test_short_file(self, write):
        with pytest.raises(ParseError):
            load_embeddings(write("e.vec", "3 3\na 1 0 0\nb 0 1 0\n"))

    def test_row_arity(self, write):
        with pytest.raises(ParseError, match=":3:"):
            load_embeddings(write("e.vec", "2 3\na 1 0 0\nb 0 1\n"))

    def test_duplicates(self, write):
        e = load_embeddings(write("e.vec", "3 2\na 1 0\nb 0 1\na 5 5\n"))
        assert len(e) == 2
        assert e.n_duplicates == 1
        np.testing.assert_array_equal(e.vector("a"), [1, 0])

    def test_non_finite(self, write):
        with pytest.raises(DataError):
            load_embeddings(write("e.vec", "1 2\na nan 0\n"))

    def test_bad_header(self, write):
        with pytest.raises(ParseError):
            load_embeddings(write("e.vec", "two 3\n"))


class TestNormalize:
    def test_345(self):
        np.testing.assert_allclose(normalize(emb("a", [[3, 4]])).vectors, [[0.6, 0.8]])

    def test_unit_unchanged(self):
        e = emb("ab", [[1, 0], [0, 1]])
        np.testing.assert_array_equal(normalize(e).vectors, e.vectors)

    def test_diagonal(self):
        v = normalize(emb("a", [[1, 1]])).vectors
        np.testing.assert_allclose(v, [[0.70710678, 0.70710678]], atol=1e-8)

    def test_zero_vector_named(self):
        with pytest.raises(DegenerateVectorError, match="'b'"):
            normalize(emb("ab", [[1, 0], [0, 0]]))

    def test_idempotent_and_neighbours(self, rng):
        e = emb([f"w{i}" for i in range(30)], rng.standard_normal((30, 5)) * 3)
        once = normalize(e)
        np.testing.assert_allclose(np.linalg.norm(once.vectors, axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(normalize(once).vectors, once.vectors, atol=1e-15)
        raw = e.vectors @ e.vectors.T
        cos = once.vectors @ once.vectors.T
        np.fill_diagonal(raw, -np.inf)
        np.fill_diagonal(cos, -np.inf)
        assert np.array_equal(np.sign(raw[np.isfinite(raw)]), np.sign(cos[np.isfinite(cos)]))
        # nearest neighbour by cosine is scale free
        norms = np.linalg.norm(e.vectors, axis=1)
        assert np.array_equal((raw / norms[:, None] / norms[None, :]).argmax(1), cos.argmax(1))


class TestPaired:
    def test_both_present(self):
        x, y, kept = paired_submatrices(emb("a", [[1, 0]]), emb("x", [[0, 1]]), Lexicon((("a", "x"),)))
        assert x.shape == y.shape == (1, 2)
        assert kept.pairs == (("a", "x"),)

    def test_drop_missing(self):
        src = emb("ac", [[1, 0], [0, 1]])
        tgt = emb("xyz", [[1, 0], [0, 1], [1, 1]])
        lex = Lexicon((("a", "x"), ("b", "y"), ("c", "z")))
        x, y, kept = paired_submatrices(src, tgt, lex)
        assert kept.pairs == (("a", "x"), ("c", "z"))
        np.testing.assert_array_equal(x, [[1, 0], [0, 1]])
        np.testing.assert_array_equal(y, [[1, 0], [1, 1]])

    def test_order_preserved(self, rng):
        words = [f"w{i}" for i in range(20)]
        src = emb(words, rng.standard_normal((20, 3)))
        tgt = emb([w.upper() for w in words[::2]], rng.standard_normal((10, 3)))
        lex = Lexicon(tuple((w, w.upper()) for w in reversed(words)))
        _, _, kept = paired_submatrices(src, tgt, lex)
        assert kept.pairs == tuple(p for p in lex.pairs if p[1] in tgt)

    def test_no_overlap(self):
        with pytest.raises(EmptyOverlapError):
            paired_submatrices(emb("a", [[1.0]]), emb("x", [[1.0]]), Lexicon((("b", "y"),)))
