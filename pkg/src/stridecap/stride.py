"""Dynamic-stride window selection.

Walk the subsampled sequence from t = 0. Each visited window is captioned and
embedded; a window whose caption is at least ``tau``-similar to the last
retained one is skipped and the stride grows by ``alpha`` (capped at
``s_max``), otherwise it is retained and the stride resets to ``s_base``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from .backends.prompts import build_mmcot_prompt, parse_conclusion
from .core import ParseError, PipelineConfig, StrideCapError, cosine_similarity
from .windowing import SubsampledSequence, hconcat, window_at

logger = logging.getLogger(__name__)

FIRST, RETAIN, SKIP, ERROR = "first", "retain", "skip", "error"


class EmbeddingFailed(StrideCapError):
    """The embedder could not embed a subcaption; this aborts the whole run."""


@dataclass(frozen=True)
class Visit:
    t: int
    decision: str
    sim: Optional[float]
    s_after: float
    error: Optional[str] = None

    @property
    def retained(self) -> bool:
        return self.decision in (FIRST, RETAIN)

    def to_dict(self) -> dict:
        d = {"t": self.t, "decision": self.decision, "sim": self.sim, "s_after": self.s_after}
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class StrideTrace:
    visits: list = field(default_factory=list)
    sequence_length: int = 0

    def retained_starts(self) -> list:
        return [v.t for v in self.visits if v.retained]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(v.to_dict()) + "\n" for v in self.visits)


def stride_update(s: float, skipped: bool, cfg: PipelineConfig) -> float:
    if skipped:
        return min(cfg.alpha * s, cfg.s_max)
    return cfg.s_base


def advance(t: int, s: float) -> int:
    return t + max(1, math.floor(s))


def select_windows(seq: SubsampledSequence, cfg: PipelineConfig, captioner, embedder) -> tuple:
    """Returns ``(retained subcaptions in visit order, StrideTrace)``.

    The first successfully parsed window is always retained. A reply that cannot
    be parsed is logged as an ``error`` visit: it is skipped and the stride is left
    unchanged. Embedder failures raise :class:`EmbeddingFailed`.
    """
    if len(seq) == 0:
        raise ValueError("cannot select windows from an empty sequence")
    prompt = build_mmcot_prompt()
    retained = []
    trace = StrideTrace(sequence_length=len(seq))
    last_emb = None
    s = cfg.s_base
    t = 0
    while t < len(seq):
        image = hconcat(window_at(seq, t, cfg.K))
        reply = captioner.caption(image, prompt)
        try:
            sub = parse_conclusion(reply, window_start=t)
        except ParseError as exc:
            logger.warning("%s window %d: unparseable caption, skipping: %s", seq.scene_key, t, exc)
            trace.visits.append(Visit(t, ERROR, None, s, error=str(exc)))
            t = advance(t, s)
            continue
        try:
            emb = embedder.embed(sub.render())
        except Exception as exc:
            raise EmbeddingFailed(f"{seq.scene_key} window {t}: embedder failed: {exc}") from exc
        if last_emb is None:
            retained.append(sub)
            last_emb = emb
            s = cfg.s_base
            trace.visits.append(Visit(t, FIRST, None, s))
        else:
            sim = cosine_similarity(emb, last_emb)
            if sim >= cfg.tau:
                s = stride_update(s, True, cfg)
                trace.visits.append(Visit(t, SKIP, sim, s))
            else:
                retained.append(sub)
                last_emb = emb
                s = stride_update(s, False, cfg)
                trace.visits.append(Visit(t, RETAIN, sim, s))
        t = advance(t, s)
    return retained, trace
