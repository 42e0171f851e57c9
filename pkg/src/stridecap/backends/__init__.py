"""Model backends: prompts, reply parsing, HTTP clients and deterministic mocks."""

from .base import (Aggregator, BackendError, Captioner, Embedder, NonRetryableBackendError,
                   PairScore, PairScorer, TransientBackendError)
from .mock import (MockAggregator, MockCaptioner, MockEmbedder, MockPairScorer, ScriptedCaptioner,
                   mock_embed)
from .prompts import (build_aggregator_prompt, build_mmcot_prompt, parse_answer,
                      parse_conclusion)

__all__ = [
    "Aggregator", "BackendError", "Captioner", "Embedder", "NonRetryableBackendError",
    "PairScore", "PairScorer", "TransientBackendError", "MockAggregator", "MockCaptioner",
    "MockEmbedder", "MockPairScorer", "ScriptedCaptioner", "mock_embed",
    "build_aggregator_prompt", "build_mmcot_prompt", "parse_answer", "parse_conclusion",
]
