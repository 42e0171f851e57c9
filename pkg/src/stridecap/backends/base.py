"""Role interfaces for the four model backends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, runtime_checkable

from ..core import EmbeddingVector, StrideCapError, ValidationError


class BackendError(StrideCapError):
    """A backend call failed. Carries the endpoint and model id for diagnostics."""

    def __init__(self, message: str, endpoint: str = "", model: str = ""):
        super().__init__(f"{message} [endpoint={endpoint or '-'} model={model or '-'}]")
        self.endpoint = endpoint
        self.model = model


class TransientBackendError(BackendError):
    pass


class NonRetryableBackendError(BackendError):
    pass


@dataclass(frozen=True)
class PairScore:
    nsp_prob: Optional[float] = None
    entail: Optional[float] = None
    neutral: Optional[float] = None
    contradict: Optional[float] = None

    def __post_init__(self):
        if self.nsp_prob is not None and not 0.0 <= self.nsp_prob <= 1.0:
            raise ValidationError(f"nsp_prob must be in [0, 1], got {self.nsp_prob}")
        triple = (self.entail, self.neutral, self.contradict)
        present = [p is not None for p in triple]
        if any(present):
            if not all(present):
                raise ValidationError("NLI scores need all of entail, neutral, contradict")
            for p in triple:
                if not 0.0 <= p <= 1.0:
                    raise ValidationError(f"NLI probability out of [0, 1]: {p}")
            if abs(sum(triple) - 1.0) > 1e-6:
                raise ValidationError(f"NLI probabilities must sum to 1, got {sum(triple)}")


@runtime_checkable
class Captioner(Protocol):
    def caption(self, image, prompt: str) -> str:
        """Reply text for one wide image (a :class:`~stridecap.windowing.WideImage`)."""


@runtime_checkable
class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> EmbeddingVector: ...

    def embed_tokens(self, tokens: Sequence[str]) -> list: ...


@runtime_checkable
class Aggregator(Protocol):
    def complete(self, prompt: str) -> str: ...


@runtime_checkable
class PairScorer(Protocol):
    def nsp(self, first: str, second: str) -> PairScore: ...

    def nli(self, candidate: str, reference: str) -> PairScore: ...
