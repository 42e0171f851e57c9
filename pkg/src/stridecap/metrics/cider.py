"""Corpus-level CIDEr: TF-IDF n-gram cosine consensus, no length penalty."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..core import ConfigError
from .text import ngrams

MAX_N = 4


@dataclass(frozen=True)
class CiderBreakdown:
    per_n: tuple  # mean cosine against the references, for n = 1..4


def document_frequency(reference_sets, n: int) -> Counter:
    """Number of reference sets containing each n-gram at least once."""
    df = Counter()
    for refs in reference_sets:
        seen = set()
        for r in refs:
            seen.update(ngrams(r, n))
        df.update(seen)
    return df


def tfidf(tokens, n: int, df: Counter, n_docs: int) -> dict:
    counts = Counter(ngrams(tokens, n))
    return {g: tf * math.log(n_docs / max(df.get(g, 0), 1)) for g, tf in counts.items()}


def sparse_cosine(a: dict, b: dict) -> float:
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    return sum(v * b.get(g, 0.0) for g, v in a.items()) / (na * nb)


def cider(candidates: Sequence[Sequence[str]],
          reference_sets: Sequence[Sequence[Sequence[str]]],
          max_n: int = MAX_N, weights=None) -> list:
    """Per-candidate ``(score, CiderBreakdown)``.

    IDF is ``log(|D| / df)`` where ``|D|`` is the number of reference sets and df is
    clamped to at least 1. A one-scene corpus therefore has all-zero vectors and scores 0.
    """
    if not candidates or len(candidates) != len(reference_sets):
        raise ConfigError(
            f"cider needs matching non-empty inputs, got {len(candidates)} candidates "
            f"and {len(reference_sets)} reference sets")
    weights = weights or [1.0] * max_n
    n_docs = len(reference_sets)
    dfs = [document_frequency(reference_sets, n) for n in range(1, max_n + 1)]

    results = []
    for cand, refs in zip(candidates, reference_sets):
        if not refs:
            raise ConfigError("every candidate needs at least one reference")
        per_n = []
        for n, df in enumerate(dfs, start=1):
            g_c = tfidf(cand, n, df, n_docs)
            cos = [sparse_cosine(g_c, tfidf(r, n, df, n_docs)) for r in refs]
            per_n.append(sum(cos) / len(refs))
        score = sum(w * p for w, p in zip(weights, per_n)) / max_n
        results.append((score, CiderBreakdown(tuple(per_n))))
    return results
