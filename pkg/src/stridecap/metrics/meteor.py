"""METEOR with exact unigram matching only (no stemming, synonyms or paraphrases)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

ALPHA = 0.9
BETA = 3.0
GAMMA = 0.5
EXACT_SEARCH_LIMIT = 12


@dataclass(frozen=True)
class MeteorBreakdown:
    matches: int
    chunks: int
    precision: float
    recall: float
    fmean: float
    penalty: float
    alignment: tuple  # (candidate index, reference index) pairs, candidate order


def count_chunks(alignment) -> int:
    """Runs of pairs contiguous in both sequences, with pairs sorted by candidate index."""
    chunks = 0
    prev = None
    for i, j in sorted(alignment):
        if prev is None or not (i == prev[0] + 1 and j == prev[1] + 1):
            chunks += 1
        prev = (i, j)
    return chunks


def _exact_alignment(candidate, reference) -> tuple:
    """Alignment with the most matches, then the fewest chunks (memoized search)."""
    positions = {}
    for j, tok in enumerate(reference):
        positions.setdefault(tok, []).append(j)
    n = len(candidate)
    # a candidate token may stay unmatched only if its type is over-represented
    surplus = {t: max(0, c - len(positions.get(t, ()))) for t, c in Counter(candidate).items()}

    @lru_cache(maxsize=None)
    def best(i: int, used: int, prev_j: int, skipped: tuple):
        # returns (chunks, pairs) for candidate[i:], or None if the max-match count is unreachable
        if i == n:
            return 0, ()
        tok = candidate[i]
        options = []
        for j in positions.get(tok, ()):
            if used >> j & 1:
                continue
            sub = best(i + 1, used | (1 << j), j, skipped)
            if sub is not None:
                new_chunk = 0 if prev_j >= 0 and j == prev_j + 1 else 1
                options.append((sub[0] + new_chunk, ((i, j),) + sub[1]))
        k = _skip_index(skipped, tok)
        if k is not None and skipped[k][1] < surplus[tok]:
            nxt = skipped[:k] + ((tok, skipped[k][1] + 1),) + skipped[k + 1:]
            sub = best(i + 1, used, -1, nxt)
            if sub is not None:
                options.append(sub)
        if not options:
            return None
        return min(options)

    skip0 = tuple(sorted((t, 0) for t in surplus))
    result = best(0, 0, -1, skip0)
    best.cache_clear()
    return result[1]


def _skip_index(skipped: tuple, tok):
    for k, (t, _) in enumerate(skipped):
        if t == tok:
            return k
    return None


def _greedy_alignment(candidate, reference) -> tuple:
    """Left-to-right: extend the current chunk when possible, else take the leftmost free match."""
    positions = {}
    for j, tok in enumerate(reference):
        positions.setdefault(tok, []).append(j)
    used = set()
    pairs = []
    prev_j = -2
    for i, tok in enumerate(candidate):
        free = [j for j in positions.get(tok, ()) if j not in used]
        if not free:
            prev_j = -2
            continue
        j = prev_j + 1 if prev_j + 1 in free else free[0]
        used.add(j)
        pairs.append((i, j))
        prev_j = j
    return tuple(pairs)


def align(candidate: Sequence[str], reference: Sequence[str]) -> tuple:
    total = sum((Counter(candidate) & Counter(reference)).values())
    if total == 0:
        return ()
    if total <= EXACT_SEARCH_LIMIT:
        return _exact_alignment(tuple(candidate), tuple(reference))
    return _greedy_alignment(candidate, reference)


def meteor_lite(candidate: Sequence[str], reference: Sequence[str], alpha: float = ALPHA,
                beta: float = BETA, gamma: float = GAMMA) -> tuple:
    """Returns ``(score, MeteorBreakdown)``; score = F_mean * (1 - penalty)."""
    alignment = align(candidate, reference)
    m = len(alignment)
    if m == 0:
        return 0.0, MeteorBreakdown(0, 0, 0.0, 0.0, 0.0, 0.0, ())
    chunks = count_chunks(alignment)
    p = m / len(candidate)
    r = m / len(reference)
    fmean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (chunks / m) ** beta
    score = fmean * (1 - penalty)
    return score, MeteorBreakdown(m, chunks, p, r, fmean, penalty, alignment)


def meteor_multi(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> tuple:
    """Best score over several references."""
    if not references:
        raise ValueError("meteor needs at least one reference")
    return max((meteor_lite(candidate, r) for r in references), key=lambda x: x[0])
