"""Metrics that delegate to an embedder or a sentence-pair scorer."""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..core import StrideCapError, cosine_similarity

logger = logging.getLogger(__name__)


def sbert_similarity(candidate: str, reference: str, embedder) -> Optional[float]:
    """Cosine of the two sentence embeddings, or None if the embedder fails."""
    try:
        u = embedder.embed(candidate)
        v = embedder.embed(reference)
    except (StrideCapError, OSError) as exc:
        logger.warning("sbert similarity unavailable: %s", exc)
        return None
    return cosine_similarity(u, v)


class NliContradiction(NamedTuple):
    score: Optional[float]  # None when every pair failed
    n_pairs: int
    n_excluded: int


def nli_contradiction(pairs: Sequence[tuple], scorer) -> NliContradiction:
    """Mean contradiction probability over ``(candidate, reference)`` pairs."""
    if not pairs:
        raise ValueError("nli_contradiction needs at least one pair")
    probs = []
    for cand, ref in pairs:
        try:
            probs.append(scorer.nli(cand, ref).contradict)
        except (StrideCapError, OSError, ValueError) as exc:
            logger.warning("NLI scoring failed for a pair, excluding it: %s", exc)
    excluded = len(pairs) - len(probs)
    score = sum(probs) / len(probs) if probs else None
    return NliContradiction(score, len(pairs), excluded)


class NspCoherence(NamedTuple):
    true: float
    shuffled: float
    delta: float
    order: tuple  # permutation used for the shuffled pass


def shuffled_order(n: int, seed: int) -> tuple:
    """Seeded uniform permutation of range(n), redrawn until it differs from the identity."""
    rng = np.random.default_rng(seed)
    identity = tuple(range(n))
    while True:
        perm = tuple(int(i) for i in rng.permutation(n))
        if perm != identity:
            return perm


def _mean_nsp(sentences, scorer) -> float:
    probs = [scorer.nsp(a, b).nsp_prob for a, b in zip(sentences, sentences[1:])]
    return sum(probs) / len(probs)


def nsp_coherence(sentences: Sequence[str], scorer, seed: int) -> Optional[NspCoherence]:
    """NSP over consecutive pairs in original and shuffled order; None for < 2 sentences."""
    sentences = list(sentences)
    if len(sentences) < 2:
        return None
    order = shuffled_order(len(sentences), seed)
    true = _mean_nsp(sentences, scorer)
    shuffled = _mean_nsp([sentences[i] for i in order], scorer)
    return NspCoherence(true, shuffled, true - shuffled, order)
