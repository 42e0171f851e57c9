"""Deterministic stand-ins for every model role.

All mocks are pure functions of their inputs and the run seed, so two runs
with the same configuration produce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..core import EmbeddingVector, cosine_similarity
from ..metrics.text import tokenize
from .base import PairScore
from .prompts import extract_prompt_captions

# (RGB, action variants, objects) per colour bucket; synthetic scenes paint steps in these colours
PALETTE = (
    ((200, 40, 40), ("chop the tomatoes", "dice the tomatoes", "slice the tomatoes"),
     ("knife", "tomato", "cutting board")),
    ((230, 140, 30), ("peel the carrots", "grate the carrots", "peel and grate the carrots"),
     ("peeler", "carrot", "grater")),
    ((230, 210, 50), ("crack the eggs into a bowl", "whisk the eggs in a bowl", "beat the eggs"),
     ("egg", "bowl", "whisk")),
    ((60, 170, 70), ("wash the lettuce", "rinse the lettuce leaves", "tear the lettuce"),
     ("lettuce", "colander")),
    ((50, 180, 190), ("pour water into the pot", "fill the pot with water", "boil water in the pot"),
     ("pot", "water", "stove")),
    ((40, 70, 200), ("stir the sauce in the pan", "simmer the sauce", "stir the pan"),
     ("pan", "spoon", "sauce")),
    ((140, 60, 170), ("season with salt and pepper", "sprinkle salt and pepper", "add seasoning"),
     ("salt", "pepper", "shaker")),
    ((120, 80, 40), ("toast the bread slices", "place the bread in the toaster", "toast the bread"),
     ("bread", "toaster", "plate")),
)

_PALETTE_RGB = np.array([p[0] for p in PALETTE], dtype=np.float64)


def stable_hash(*parts) -> int:
    h = hashlib.blake2b(":".join(str(p) for p in parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def token_bucket(token: str, dim: int) -> int:
    return stable_hash("tok", token) % dim


def mock_embed(text: str, dim: int = 32) -> EmbeddingVector:
    """Hashed bag-of-words embedding, L2-normalized; the empty text maps to the zero vector."""
    if dim < 2:
        raise ValueError(f"mock embedding dim must be >= 2, got {dim}")
    v = np.zeros(dim, dtype=np.float64)
    for tok in tokenize(text):
        v[token_bucket(tok, dim)] += 1.0
    n = np.linalg.norm(v)
    return EmbeddingVector(v / n if n > 0 else v)


class MockEmbedder:
    def __init__(self, dim: int = 128):
        self.dim = dim

    def embed(self, text: str) -> EmbeddingVector:
        return mock_embed(text, self.dim)

    def embed_tokens(self, tokens: Sequence[str]) -> list:
        return [mock_embed(t, self.dim) for t in tokens]


def palette_bucket(pixels: np.ndarray) -> int:
    rgb = pixels.reshape(-1, pixels.shape[2]).astype(np.float64).mean(axis=0)
    if rgb.shape[0] == 1:
        rgb = np.repeat(rgb, 3)
    return int(np.argmin(((_PALETTE_RGB - rgb) ** 2).sum(axis=1)))


def palette_caption(bucket: int, seed: int) -> tuple:
    _, actions, objects = PALETTE[bucket]
    action = actions[stable_hash("variant", seed, bucket) % len(actions)]
    return action[0].upper() + action[1:], objects


class MockCaptioner:
    """Captions a window by its dominant palette colour.

    Each frame votes for the nearest palette colour; the most common bucket
    wins (earliest frame breaks ties). The seed picks a phrasing variant.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def caption(self, image, prompt: str) -> str:
        votes = [palette_bucket(f.pixels) for f in image.split()]
        counts = {}
        for b in votes:
            counts[b] = counts.get(b, 0) + 1
        best = max(counts.values())
        bucket = next(b for b in votes if counts[b] == best)
        action, objects = palette_caption(bucket, self.seed)
        return f"<CONCLUSION>{action} | {', '.join(objects)}</CONCLUSION>"


class ScriptedCaptioner:
    """Returns ``replies`` in call order; a callable entry is invoked with the image."""

    def __init__(self, replies: Iterable):
        self.replies = list(replies)
        self.calls = 0

    def caption(self, image, prompt: str) -> str:
        if self.calls >= len(self.replies):
            raise IndexError(f"scripted captioner exhausted after {self.calls} calls")
        reply = self.replies[self.calls]
        self.calls += 1
        return reply(image) if callable(reply) else reply


class MockAggregator:
    """Joins the actions of the prompt's numbered captions into one imperative sentence.

    ``fail_when`` makes the mock reply without tags for matching prompts, which
    exercises the aggregation retry/failure path.
    """

    def __init__(self, fail_when: Optional[Callable[[str], bool]] = None):
        self.fail_when = fail_when

    def complete(self, prompt: str) -> str:
        if self.fail_when is not None and self.fail_when(prompt):
            return "I am unable to summarise these captions."
        actions = []
        for item in extract_prompt_captions(prompt):
            action = item.partition("|")[0].strip().rstrip(".")
            if action and (not actions or actions[-1].lower() != action.lower()):
                actions.append(action)
        if not actions:
            return "<ANSWER></ANSWER>"
        text = ", then ".join([actions[0]] + [a[0].lower() + a[1:] for a in actions[1:]])
        return f"<ANSWER>{text[0].upper() + text[1:]}.</ANSWER>"


_NEGATIONS = frozenset({"not", "no", "never", "don't", "dont", "without"})


class MockPairScorer:
    """Similarity-driven NSP and NLI scores from the hashed bag-of-words embedding."""

    def __init__(self, dim: int = 128):
        self.dim = dim

    def _sim(self, a: str, b: str) -> float:
        return max(0.0, cosine_similarity(mock_embed(a, self.dim), mock_embed(b, self.dim)))

    def nsp(self, first: str, second: str) -> PairScore:
        return PairScore(nsp_prob=0.5 + 0.5 * self._sim(first, second))

    def nli(self, candidate: str, reference: str) -> PairScore:
        s = self._sim(candidate, reference)
        con = 0.5 * (1.0 - s)
        neg_c = bool(_NEGATIONS & set(tokenize(candidate)))
        neg_r = bool(_NEGATIONS & set(tokenize(reference)))
        if neg_c != neg_r:
            con = min(0.95, con + 0.4)
        ent = s * (1.0 - con)
        return PairScore(entail=ent, neutral=max(0.0, 1.0 - con - ent), contradict=con)
