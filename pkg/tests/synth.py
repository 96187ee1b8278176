"""Synthetic bilingual data for end-to-end tests."""

import numpy as np

from oracles import random_orthogonal


def unit_rows(a):
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def rotated_space(n_words, d, sigma, rng):
    """Source rows X, target rows Y = normalize(X Q^T + noise), and Q."""
    x = unit_rows(rng.standard_normal((n_words, d)))
    q = random_orthogonal(d, rng)
    y = x @ q.T
    if sigma:
        y = unit_rows(y + sigma * rng.standard_normal(y.shape))
    return x, y, q


def write_embeddings(path, words, vectors):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {vectors.shape[1]}\n")
        for w, v in zip(words, vectors):
            fh.write(w + " " + " ".join(repr(float(x)) for x in v) + "\n")


def write_lines(path, sents):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sents:
            fh.write(" ".join(s) + "\n")


N_CONCEPTS = 60
N_SHARED = 15
OUT_CONCEPTS = range(0, 40)
IN_CONCEPTS = range(20, 60)


def src_word(i):
    return f"n{i}" if i < N_SHARED else f"s{i}"


def tgt_word(i):
    return f"n{i}" if i < N_SHARED else f"t{i}"


def make_pipeline_fixture(root, d=8, seed=3):
    """Write a small two-language world whose true lexicon is concept i ->
    concept i, with word vectors related by one random rotation.

    Returns a dict of config keys pointing at the written files.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)

    def sentences(concepts, n):
        out = []
        for _ in range(n):
            ids = rng.choice(list(concepts), size=rng.integers(3, 7), replace=False)
            out.append([int(i) for i in ids])
        return out

    out_ids = sentences(OUT_CONCEPTS, 300)
    in_ids = sentences(IN_CONCEPTS, 80)
    in_src_ids = sentences(IN_CONCEPTS, 80)
    ref_ids = sentences(IN_CONCEPTS, 200)
    test_ids = sentences(IN_CONCEPTS, 12)

    def side(ids, fn):
        return [[fn(i) for i in s] + ["."] for s in ids]

    paths = {
        "out_src": root / "out.src", "out_tgt": root / "out.tgt",
        "in_tgt": root / "in.tgt", "in_src": root / "in.src",
        "ref_src": root / "ref.src", "ref_tgt": root / "ref.tgt",
        "test_src": root / "test.src", "test_ref": root / "test.ref",
        "hypothesis": root / "test.hyp",
        "src_emb": root / "src.vec", "tgt_emb": root / "tgt.vec",
    }
    write_lines(paths["out_src"], side(out_ids, src_word))
    write_lines(paths["out_tgt"], side(out_ids, tgt_word))
    write_lines(paths["in_tgt"], side(in_ids, tgt_word))
    write_lines(paths["in_src"], side(in_src_ids, src_word))
    write_lines(paths["ref_src"], side(ref_ids, src_word))
    write_lines(paths["ref_tgt"], side(ref_ids, tgt_word))
    write_lines(paths["test_src"], side(test_ids, src_word))
    ref = side(test_ids, tgt_word)
    write_lines(paths["test_ref"], ref)
    # hypothesis drops every other sentence's first word
    hyp = [s[1:] if i % 2 else s for i, s in enumerate(ref)]
    write_lines(paths["hypothesis"], hyp)

    x, y, _ = rotated_space(N_CONCEPTS + 1, d, 0.0, rng)
    src_words = [src_word(i) for i in range(N_CONCEPTS)] + ["."]
    tgt_words = [tgt_word(i) for i in range(N_CONCEPTS)] + ["."]
    perm = rng.permutation(N_CONCEPTS + 1)
    write_embeddings(paths["src_emb"], src_words, x)
    write_embeddings(paths["tgt_emb"], [tgt_words[i] for i in perm], y[perm])
    return {k: str(v) for k, v in paths.items()}
