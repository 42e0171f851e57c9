"""Dynamic time warping over cosine distance, reported as mean path similarity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import ConfigError, EmbeddingVector, cosine_similarity


@dataclass(frozen=True, eq=False)
class DtwTrace:
    cost: np.ndarray  # accumulated cost D, shape (T, S)
    path: tuple       # 1-based (i, j) pairs from (1, 1) to (T, S)

    @property
    def length(self) -> int:
        return len(self.path)

    @property
    def total_cost(self) -> float:
        return float(self.cost[-1, -1])


def cosine_matrix(X: Sequence, Y: Sequence) -> np.ndarray:
    dims = {v.dim if isinstance(v, EmbeddingVector) else len(v) for v in list(X) + list(Y)}
    if len(dims) != 1:
        raise ConfigError(f"dimension mismatch among DTW inputs: {sorted(dims)}")
    return np.array([[cosine_similarity(x, y) for y in Y] for x in X], dtype=np.float64)


def dtw_align(X: Sequence, Y: Sequence) -> tuple:
    """Returns ``(mean cosine along the optimal path, DtwTrace)``.

    Backtracking from (T, S) prefers the diagonal predecessor on ties, then the
    vertical one (i - 1, j).
    """
    if not X or not Y:
        raise ConfigError("dtw_align needs two non-empty sequences")
    cos = cosine_matrix(X, Y)
    dist = 1.0 - cos
    T, S = dist.shape
    D = np.full((T + 1, S + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, T + 1):
        for j in range(1, S + 1):
            D[i, j] = dist[i - 1, j - 1] + min(D[i - 1, j], D[i, j - 1], D[i - 1, j - 1])

    path = [(T, S)]
    i, j = T, S
    while (i, j) != (1, 1):
        candidates = [(i - 1, j - 1), (i - 1, j), (i, j - 1)]
        i, j = min((c for c in candidates if c[0] >= 1 and c[1] >= 1), key=lambda c: D[c])
        path.append((i, j))
    path.reverse()
    align = sum(cos[a - 1, b - 1] for a, b in path) / len(path)
    return float(align), DtwTrace(cost=D[1:, 1:].copy(), path=tuple(path))
