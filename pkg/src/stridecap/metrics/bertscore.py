"""Greedy token-matching precision/recall/F1 over token embeddings."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import ConfigError, EmbeddingVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False  # an input list was empty

    @classmethod
    def from_pr(cls, p: float, r: float) -> "ScoreTriple":
        return cls(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)


def _stack(vectors: Sequence) -> np.ndarray:
    return np.stack([v.values if isinstance(v, EmbeddingVector) else np.asarray(v, dtype=np.float64)
                     for v in vectors])


def bertscore(candidate_token_embeddings: Sequence, reference_token_embeddings: Sequence) -> ScoreTriple:
    """Precision/recall from best dot-product matches; inputs must already be unit-normalized."""
    if not candidate_token_embeddings or not reference_token_embeddings:
        logger.warning("bertscore on an empty token list; returning zeros")
        return ScoreTriple(0.0, 0.0, 0.0, degenerate=True)
    c = _stack(candidate_token_embeddings)
    r = _stack(reference_token_embeddings)
    if c.shape[1] != r.shape[1]:
        raise ConfigError(f"dimension mismatch: {c.shape[1]} vs {r.shape[1]}")
    sim = c @ r.T
    return ScoreTriple.from_pr(float(sim.max(axis=1).mean()), float(sim.max(axis=0).mean()))
