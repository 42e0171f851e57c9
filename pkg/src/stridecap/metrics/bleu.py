"""Sentence-level BLEU-4."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .text import ngrams

MAX_N = 4


@dataclass(frozen=True)
class BleuBreakdown:
    precisions: tuple        # p_1..p_4 after smoothing
    raw_precisions: tuple    # clipped matches / candidate n-grams, unsmoothed
    brevity_penalty: float
    candidate_length: int
    reference_length: int


def closest_ref_length(cand_len: int, ref_lens: Sequence[int]) -> int:
    """Reference length closest to the candidate's; ties go to the shorter one."""
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def brevity_penalty(cand_len: int, ref_len: int) -> float:
    if cand_len == 0:
        return 0.0
    if cand_len > ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / cand_len)


def modified_precision(candidate, references, n: int) -> tuple:
    """``(clipped matches, candidate n-gram count)`` with per-reference max clipping."""
    cand = Counter(ngrams(candidate, n))
    max_ref = Counter()
    for ref in references:
        for g, c in Counter(ngrams(ref, n)).items():
            if c > max_ref[g]:
                max_ref[g] = c
    clipped = sum(min(c, max_ref[g]) for g, c in cand.items())
    return clipped, sum(cand.values())


def bleu4(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> tuple:
    """BLEU-4 with uniform weights. Returns ``(score, BleuBreakdown)``.

    A zero precision p_n is replaced by 1 / (2 * count), count being the
    number of candidate n-grams of that order (at least 1).
    """
    if not references:
        raise ValueError("bleu4 needs at least one reference")
    candidate = list(candidate)
    c_len = len(candidate)
    r_len = closest_ref_length(c_len, [len(r) for r in references])
    bp = brevity_penalty(c_len, r_len)
    if c_len == 0:
        zeros = (0.0,) * MAX_N
        return 0.0, BleuBreakdown(zeros, zeros, 0.0, 0, r_len)

    raw, smoothed = [], []
    for n in range(1, MAX_N + 1):
        matches, total = modified_precision(candidate, references, n)
        p = matches / total if total else 0.0
        raw.append(p)
        smoothed.append(p if p > 0 else 1.0 / (2 * max(total, 1)))
    score = bp * math.exp(sum(math.log(p) for p in smoothed) / MAX_N)
    return score, BleuBreakdown(tuple(smoothed), tuple(raw), bp, c_len, r_len)
