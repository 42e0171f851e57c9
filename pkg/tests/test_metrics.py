import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stridecap.backends.base import PairScore
from stridecap.backends.mock import MockEmbedder, MockPairScorer, token_bucket
from stridecap.core import ConfigError
from stridecap.metrics import (bertscore, bleu4, cider, dtw_align, meteor_lite, nli_contradiction,
                               nsp_coherence, sbert_similarity, tokenize)
from stridecap.metrics.bleu import brevity_penalty, closest_ref_length
from stridecap.metrics.meteor import count_chunks
from stridecap.metrics.semantic import shuffled_order
from stridecap.metrics.text import split_sentences

from oracles import (bertscore_oracle, bleu_oracle, cider_oracle, dtw_oracle, meteor_oracle,
                     monotone_paths)

VOCAB = [f"w{i}" for i in range(8)]


def _sentence(rng, max_len=10, vocab=VOCAB, min_len=0):
    n = int(rng.integers(min_len, max_len + 1))
    k = int(rng.integers(2, len(vocab) + 1))
    return [vocab[int(i)] for i in rng.integers(0, k, size=n)]


def _unit_vectors(rng, n, dim):
    v = rng.normal(size=(n, dim))
    return list(v / np.linalg.norm(v, axis=1, keepdims=True))


@pytest.mark.parametrize("text, tokens", [
    ("Chop the onions.", ["chop", "the", "onions"]),
    ("", []),
    ("mix  WELL!", ["mix", "well"]),
    ("  ...  ", []),
    ("don't stop", ["don't", "stop"]),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_split_sentences():
    assert split_sentences("Chop it. Then stir!  Serve?") == ["Chop it.", "Then stir!", "Serve?"]
    assert split_sentences("  ") == []


# BLEU

def test_brevity_penalty_closed_form():
    assert brevity_penalty(4, 8) == pytest.approx(math.exp(-1), abs=1e-12)
    assert brevity_penalty(5, 4) == 1.0
    assert brevity_penalty(4, 4) == 1.0


def test_closest_ref_length_tie_goes_to_shorter():
    assert closest_ref_length(5, [7, 3]) == 3
    assert closest_ref_length(5, [6, 9]) == 6


def test_bleu_identity():
    toks = tokenize("chop the onions and stir the pot")
    score, bd = bleu4(toks, [toks])
    assert score == pytest.approx(1.0, abs=1e-12)
    assert bd.precisions == (1.0, 1.0, 1.0, 1.0)
    assert bd.brevity_penalty == 1.0


def test_bleu_empty_candidate():
    score, bd = bleu4([], [["a", "b"]])
    assert score == 0.0


def test_bleu_unigram_overlap_without_four_grams():
    cand = "stir pot then chop onions".split()
    ref = "chop onions then stir the pot".split()
    score, bd = bleu4(cand, [ref])
    assert bd.raw_precisions[3] == 0.0
    assert score == pytest.approx(bleu_oracle(cand, [ref]), abs=1e-9)


def test_bleu_matches_oracle_on_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(500):
        cand = _sentence(rng)
        refs = [_sentence(rng, min_len=1) for _ in range(int(rng.integers(1, 4)))]
        assert bleu4(cand, refs)[0] == pytest.approx(bleu_oracle(cand, refs), abs=1e-9)


# METEOR

def test_meteor_identity_four_tokens():
    toks = ["a", "b", "c", "d"]
    score, bd = meteor_lite(toks, toks)
    assert (bd.matches, bd.chunks) == (4, 1)
    assert bd.penalty == pytest.approx(0.0078125, abs=1e-15)
    assert score == pytest.approx(0.9921875, abs=1e-12)


def test_meteor_disjoint_is_zero():
    assert meteor_lite(["a", "b"], ["c", "d"])[0] == 0.0
    assert meteor_lite([], ["c"])[0] == 0.0


def test_meteor_prefers_fewer_chunks_among_maximum_alignments():
    # "a" can match either position; the alignment keeping "a b" contiguous wins
    _, bd = meteor_lite(["a", "b"], ["a", "x", "a", "b"])
    assert bd.alignment == ((0, 2), (1, 3))
    assert bd.chunks == 1


def test_count_chunks():
    assert count_chunks([(0, 0), (1, 1), (2, 3)]) == 2
    assert count_chunks([(0, 2), (1, 0)]) == 2
    assert count_chunks([]) == 0


def test_meteor_matches_oracle_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(500):
        cand = _sentence(rng, min_len=1)
        ref = _sentence(rng, min_len=1)
        assert meteor_lite(cand, ref)[0] == pytest.approx(meteor_oracle(cand, ref), abs=1e-9)


def test_meteor_greedy_path_above_exact_limit_stays_in_range():
    cand = [f"t{i % 7}" for i in range(20)]
    ref = [f"t{(i * 3) % 7}" for i in range(20)]
    score, bd = meteor_lite(cand, ref)
    assert bd.matches == sum((Counter(cand) & Counter(ref)).values()) == 19
    assert 0.0 <= score <= 1.0


# CIDEr

def test_cider_zero_overlap():
    res = cider([["a", "b"], ["c", "d"]], [[["x", "y"]], [["c", "d"]]])
    assert res[0][0] == 0.0


def test_cider_single_scene_corpus_is_zero():
    res = cider([["a", "b"]], [[["a", "b"]]])
    assert res[0][0] == 0.0


def test_cider_two_scene_identity_matches_oracle():
    cands = [["chop", "the", "onions"], ["stir", "a", "pot"]]
    refs = [[["chop", "the", "onions"]], [["boil", "some", "water"]]]
    got = [s for s, _ in cider(cands, refs)]
    assert got == pytest.approx(cider_oracle(cands, refs), abs=1e-9)
    # 1- to 3-grams of the identical pair give cosine 1; there are no 4-grams
    assert got[0] == pytest.approx(0.75, abs=1e-12)


def test_cider_rejects_bad_input():
    with pytest.raises(ConfigError):
        cider([], [])
    with pytest.raises(ConfigError):
        cider([["a"]], [[["a"]], [["b"]]])


def test_cider_matches_oracle_on_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(500):
        n_docs = int(rng.integers(1, 5))
        cands = [_sentence(rng) for _ in range(n_docs)]
        refs = [[_sentence(rng, min_len=1) for _ in range(int(rng.integers(1, 3)))]
                for _ in range(n_docs)]
        got = [s for s, _ in cider(cands, refs)]
        assert got == pytest.approx(cider_oracle(cands, refs), abs=1e-9)


# BERTScore

def test_bertscore_identity_and_orthogonal():
    e = list(np.eye(3))
    t = bertscore(e, e)
    assert (t.precision, t.recall, t.f1) == pytest.approx((1.0, 1.0, 1.0))
    t = bertscore(e[:1], e[1:])
    assert (t.precision, t.recall, t.f1) == (0.0, 0.0, 0.0)


def test_bertscore_empty_is_flagged():
    t = bertscore([], [np.ones(2)])
    assert (t.precision, t.recall, t.f1, t.degenerate) == (0.0, 0.0, 0.0, True)


def test_bertscore_dimension_mismatch():
    with pytest.raises(ConfigError):
        bertscore([np.ones(2)], [np.ones(3)])


def test_bertscore_matches_oracle_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(500):
        dim = int(rng.integers(2, 6))
        C = _unit_vectors(rng, int(rng.integers(1, 11)), dim)
        R = _unit_vectors(rng, int(rng.integers(1, 11)), dim)
        t = bertscore(C, R)
        p, r, f = bertscore_oracle([list(c) for c in C], [list(x) for x in R])
        assert (t.precision, t.recall, t.f1) == pytest.approx((p, r, f), abs=1e-9)


# SBERT

def test_sbert_under_mock():
    emb = MockEmbedder(dim=128)
    assert sbert_similarity("chop the onions", "chop the onions", emb) == pytest.approx(1.0)
    assert sbert_similarity("", "chop the onions", emb) == 0.0


def test_sbert_token_disjoint_strings_after_bucket_check():
    a, b = "chop onions", "stir sauce"
    buckets_a = {token_bucket(t, 128) for t in tokenize(a)}
    buckets_b = {token_bucket(t, 128) for t in tokenize(b)}
    assert not buckets_a & buckets_b
    assert sbert_similarity(a, b, MockEmbedder(dim=128)) == 0.0


def test_sbert_unavailable_on_failure():
    class Broken:
        def embed(self, text):
            raise OSError("down")
    assert sbert_similarity("a", "b", Broken()) is None


# DTW

def test_dtw_single_cell():
    x, y = np.array([1.0, 0.0]), np.array([0.6, 0.8])
    align, trace = dtw_align([x], [y])
    assert align == pytest.approx(0.6)
    assert trace.path == ((1, 1),)


def test_dtw_identity_diagonal():
    X = list(np.eye(3))
    align, trace = dtw_align(X, X)
    assert align == pytest.approx(1.0)
    assert trace.path == ((1, 1), (2, 2), (3, 3))


def test_dtw_two_by_one():
    align, trace = dtw_align([np.array([1.0, 0.0]), np.array([0.0, 1.0])], [np.array([1.0, 0.0])])
    assert trace.path == ((1, 1), (2, 1))
    assert align == pytest.approx(0.5)
    assert dtw_oracle([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0]])[1] == pytest.approx(0.5)


def test_dtw_tie_prefers_diagonal():
    # every cell costs the same, so the path should be the diagonal-first one
    X = [np.array([1.0, 0.0])] * 3
    _, trace = dtw_align(X, X[:2])
    assert trace.path == ((1, 1), (2, 1), (3, 2))


def test_dtw_dimension_mismatch():
    with pytest.raises(ConfigError):
        dtw_align([np.ones(2)], [np.ones(3)])
    with pytest.raises(ConfigError):
        dtw_align([], [np.ones(3)])


def _valid_path(path, T, S):
    assert path[0] == (1, 1) and path[-1] == (T, S)
    for (a, b), (c, d) in zip(path, path[1:]):
        assert (c - a, d - b) in ((1, 0), (0, 1), (1, 1))


def test_dtw_cost_equals_exhaustive_minimum_for_all_small_shapes():
    rng = np.random.default_rng(4)
    for T in range(1, 5):
        for S in range(1, 5):
            for _ in range(5):
                X = _unit_vectors(rng, T, 3)
                Y = _unit_vectors(rng, S, 3)
                _, trace = dtw_align(X, Y)
                best, _ = dtw_oracle([list(x) for x in X], [list(y) for y in Y])
                assert trace.total_cost == pytest.approx(best, abs=1e-9)
                _valid_path(trace.path, T, S)
                cos = [[float(x @ y) for y in Y] for x in X]
                assert sum(1 - cos[i - 1][j - 1] for i, j in trace.path) == pytest.approx(best, abs=1e-9)


def test_monotone_path_counts_are_delannoy_numbers():
    assert [len(monotone_paths(n, n)) for n in range(1, 5)] == [1, 3, 13, 63]


def test_dtw_matches_oracle_on_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(500):
        X = _unit_vectors(rng, int(rng.integers(1, 5)), 3)
        Y = _unit_vectors(rng, int(rng.integers(1, 5)), 3)
        align, _ = dtw_align(X, Y)
        _, expected = dtw_oracle([list(x) for x in X], [list(y) for y in Y])
        assert align == pytest.approx(expected, abs=1e-9)


# NLI and NSP

class ConstScorer:
    def __init__(self, con=0.0, fail_on=()):
        self.con = con
        self.fail_on = set(fail_on)

    def nli(self, cand, ref):
        if cand in self.fail_on:
            raise ValueError("bad pair")
        con = self.con(cand) if callable(self.con) else self.con
        return PairScore(entail=1 - con, neutral=0.0, contradict=con)


class AdjacencyScorer:
    """NSP probability 1 exactly for originally adjacent ordered pairs."""

    def __init__(self, sentences):
        self.adjacent = set(zip(sentences, sentences[1:]))

    def nsp(self, a, b):
        return PairScore(nsp_prob=1.0 if (a, b) in self.adjacent else 0.0)


def test_nli_contradiction_examples():
    pairs = [("a", "x"), ("b", "y")]
    assert nli_contradiction(pairs, ConstScorer(0.0)).score == 0.0
    assert nli_contradiction(pairs, ConstScorer(0.5)).score == 0.5
    assert nli_contradiction(pairs, ConstScorer(lambda c: 1.0 if c == "b" else 0.0)).score == 0.5


def test_nli_excludes_failed_pairs():
    res = nli_contradiction([("a", "x"), ("b", "y")], ConstScorer(0.25, fail_on={"a"}))
    assert (res.score, res.n_pairs, res.n_excluded) == (0.25, 2, 1)
    res = nli_contradiction([("a", "x")], ConstScorer(0.25, fail_on={"a"}))
    assert res.score is None


def test_shuffled_order_seed_zero():
    assert shuffled_order(3, 0) == (2, 0, 1)


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_shuffled_order_is_non_identity_permutation(n, seed):
    order = shuffled_order(n, seed)
    assert sorted(order) == list(range(n))
    assert order != tuple(range(n))
    assert shuffled_order(n, seed) == order


def test_nsp_scenario():
    s = ["s1", "s2", "s3"]
    res = nsp_coherence(s, AdjacencyScorer(s), seed=0)
    assert [s[i] for i in res.order] == ["s3", "s1", "s2"]
    assert (res.true, res.shuffled, res.delta) == (1.0, 0.5, 0.5)


def test_nsp_undefined_for_one_sentence():
    assert nsp_coherence(["only"], AdjacencyScorer(["only"]), seed=0) is None


def test_nsp_deterministic_under_mock():
    s = ["Chop the onions.", "Stir the pot.", "Serve hot.", "Add salt."]
    a = nsp_coherence(s, MockPairScorer(), seed=3)
    b = nsp_coherence(s, MockPairScorer(), seed=3)
    assert repr(a) == repr(b)


# properties

words = st.lists(st.sampled_from(VOCAB), min_size=1, max_size=10)


@settings(max_examples=60, deadline=None)
@given(words, st.lists(words, min_size=1, max_size=3), st.permutations(VOCAB))
def test_renaming_invariance(cand, refs, perm):
    mapping = dict(zip(VOCAB, perm))
    rename = lambda toks: [mapping[t] for t in toks]  # noqa: E731
    assert bleu4(rename(cand), [rename(r) for r in refs])[0] == pytest.approx(bleu4(cand, refs)[0], abs=1e-12)
    assert meteor_lite(rename(cand), rename(refs[0]))[0] == pytest.approx(
        meteor_lite(cand, refs[0])[0], abs=1e-12)
    other = ["zz", "yy"]
    c1 = cider([cand, other], [refs, [other]])
    c2 = cider([rename(cand), other], [[rename(r) for r in refs], [other]])
    assert c2[0][0] == pytest.approx(c1[0][0], abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(words, st.lists(words, min_size=1, max_size=3))
def test_metric_ranges(cand, refs):
    assert 0.0 <= bleu4(cand, refs)[0] <= 1.0
    assert 0.0 <= meteor_lite(cand, refs[0])[0] <= 1.0
    assert cider([cand, ["q"]], [refs, [["q"]]])[0][0] >= 0.0


@settings(max_examples=50, deadline=None)
@given(words, words)
def test_semantic_ranges_under_mock(a, b):
    emb = MockEmbedder(dim=64)
    ta, tb = emb.embed_tokens(a), emb.embed_tokens(b)
    t = bertscore(ta, tb)
    assert all(0.0 <= x <= 1.0 + 1e-12 for x in (t.precision, t.recall, t.f1))
    assert -1.0 <= dtw_align(ta, tb)[0] <= 1.0 + 1e-12
    assert -1.0 <= sbert_similarity(" ".join(a), " ".join(b), emb) <= 1.0
