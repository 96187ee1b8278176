import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import corpus_of
from dali.corpus import Vocabulary
from dali.errors import AlignmentError, ParameterError
from dali.evaluate import (
    HitEvent,
    bucket_accuracy,
    hit_percentage,
    lexicon_folds,
    lexicon_overlap,
    unseen_words,
)
from dali.pseudo import word_backtranslate
from dali.seedlex import Lexicon

LEX = Lexicon((("c", "t_c"), ("d", "t_d")))


class TestUnseen:
    def test_basic(self):
        assert unseen_words(Vocabulary({"a": 1, "b": 1}), corpus_of("a c")) == {"c"}

    def test_subset(self):
        assert unseen_words(Vocabulary({"a": 1, "b": 1}), corpus_of("a b a")) == set()

    @given(st.sets(st.sampled_from("abcdef"), min_size=2))
    def test_grows_when_vocab_shrinks(self, vocab):
        test = corpus_of("a b c d e f")
        big = Vocabulary({w: 1 for w in vocab})
        small = Vocabulary({w: 1 for w in sorted(vocab)[1:]})
        assert unseen_words(big, test) <= unseen_words(small, test)


class TestHits:
    def test_hand_count(self):
        r = hit_percentage(
            corpus_of("c d"), corpus_of("t_c t_d"), corpus_of("t_c x"), LEX, {"c", "d"}
        )
        assert (r.c_total, r.c_hyp) == (2, 1)
        assert r.percentage == 0.5

    def test_perfect_hypothesis(self):
        ref = corpus_of("t_c t_d", "t_c")
        r = hit_percentage(corpus_of("c d", "c c"), ref, ref, LEX, {"c", "d"})
        assert r.c_total == 3
        assert r.percentage == 1.0

    def test_no_unseen(self):
        r = hit_percentage(corpus_of("c d"), corpus_of("t_c t_d"), corpus_of("t_c"), LEX, set())
        assert r.c_total == 0
        assert r.percentage is None
        assert "n/a" in r.summary()

    def test_no_target_words(self):
        r = hit_percentage(corpus_of("c d"), corpus_of("t_c t_d"), corpus_of("z"), LEX, {"c", "d"})
        assert r.percentage == 0.0

    def test_multiplicity_capped(self):
        r = hit_percentage(
            corpus_of("c c"), corpus_of("t_c t_c"), corpus_of("t_c t_c t_c"), LEX, {"c"}
        )
        assert (r.c_total, r.c_hyp) == (1, 1)

    def test_misaligned(self):
        with pytest.raises(AlignmentError):
            hit_percentage(corpus_of("c"), corpus_of("t_c", "x"), corpus_of("t_c"), LEX, {"c"})


def pseudo_with(freqs):
    sents = [f"t_{w}" for w, n in freqs.items() for _ in range(n)]
    lex = Lexicon(tuple((w, f"t_{w}") for w in freqs))
    return word_backtranslate(corpus_of(*sents) if sents else corpus_of("z"), lex)


class TestBuckets:
    def test_all_zero_frequency(self):
        events = [HitEvent(1, "a", "x", True), HitEvent(1, "b", "y", False)]
        rep = bucket_accuracy(events, pseudo_with({}), 4)
        assert [b.n_pairs for b in rep.buckets] == [2, 0, 0, 0]
        assert rep.buckets[0].accuracy == 0.5
        assert rep.buckets[1].accuracy is None

    def test_two_pairs_two_buckets(self):
        events = [HitEvent(1, "a", "t_a", False), HitEvent(2, "b", "t_b", True)]
        rep = bucket_accuracy(events, pseudo_with({"a": 1, "b": 100}), 2)
        assert [b.n_pairs for b in rep.buckets] == [1, 1]
        assert [b.accuracy for b in rep.buckets] == [0.0, 1.0]
        assert (rep.buckets[0].lo, rep.buckets[-1].hi) == (0.0, 100.0)

    def test_duplication_invariance(self):
        rng = np.random.default_rng(0)
        words = [f"w{i}" for i in range(12)]
        pseudo = pseudo_with({w: int(rng.integers(0, 9)) for w in words})
        events = [HitEvent(i, w, f"t_{w}", bool(rng.random() < 0.5)) for i, w in enumerate(words * 3)]
        a = bucket_accuracy(events, pseudo, 3)
        b = bucket_accuracy(events + events, pseudo, 3)
        assert [x.accuracy for x in a.buckets] == [x.accuracy for x in b.buckets]

    def test_bad_bucket_count(self):
        with pytest.raises(ParameterError):
            bucket_accuracy([], pseudo_with({}), 0)


def lexicon(n):
    return Lexicon(tuple((f"s{i}", f"t{i}") for i in range(n)))


class TestFolds:
    def test_sizes(self):
        assert [len(p) for p in lexicon_folds(lexicon(10), 5, 0)] == [2, 4, 6, 8, 10]

    def test_last_is_full(self):
        lex = lexicon(13)
        assert lexicon_folds(lex, 5, 3)[-1].pairs == lex.pairs

    @given(st.integers(2, 40), st.integers(2, 6), st.integers(0, 100))
    def test_nested_and_balanced(self, n, k, seed):
        if n < k:
            with pytest.raises(ParameterError):
                lexicon_folds(lexicon(n), k, seed)
            return
        portions = lexicon_folds(lexicon(n), k, seed)
        sizes = [len(portions[0])] + [len(b) - len(a) for a, b in zip(portions, portions[1:])]
        assert max(sizes) - min(sizes) <= 1
        for a, b in zip(portions, portions[1:]):
            assert set(a) < set(b)

    def test_deterministic(self):
        assert lexicon_folds(lexicon(20), 5, 9) == lexicon_folds(lexicon(20), 5, 9)


class TestOverlap:
    def test_same(self):
        a = lexicon(4)
        only_a, only_b, both = lexicon_overlap(a, a, Lexicon(()))
        assert (only_a, only_b, both) == (0.0, 0.0, 100.0)

    def test_disjoint(self):
        a = lexicon(2)
        b = Lexicon((("u", "v"),))
        assert lexicon_overlap(a, b, Lexicon(()))[2] == 0.0

    def test_swap(self):
        a, b, r = lexicon(5), Lexicon(lexicon(8).pairs[3:]), Lexicon((("q", "r"),))
        x = lexicon_overlap(a, b, r)
        y = lexicon_overlap(b, a, r)
        assert (x[0], x[1], x[2]) == (y[1], y[0], y[2])
        # union is s0..s7 plus (q, r): 9 pairs
        assert x == pytest.approx((300 / 9, 300 / 9, 200 / 9))

    def test_all_empty(self):
        with pytest.raises(ParameterError):
            lexicon_overlap(Lexicon(()), Lexicon(()), Lexicon(()))
