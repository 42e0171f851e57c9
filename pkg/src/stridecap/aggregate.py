"""Fuse a scene's retained subcaptions into one instructional caption."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .backends.prompts import FORMAT_REMINDER, build_aggregator_prompt, parse_answer
from .core import LogicError, ParseError, SceneCaption, StrideCapError

logger = logging.getLogger(__name__)


class AggregationFailed(StrideCapError):
    """The aggregator never produced a usable ``<ANSWER>`` span."""

    def __init__(self, message: str, replies: Sequence[str]):
        super().__init__(message)
        self.replies = list(replies)


@dataclass(frozen=True)
class AggregationRecord:
    input_subcaptions: tuple
    prompt: str
    raw_reply: str
    caption: SceneCaption
    attempts: int = 1


def aggregate_scene(subcaptions: Sequence, backend, video_id: str = "", segment_index: int = 0,
                    config_fingerprint: str = "") -> AggregationRecord:
    """One aggregator call, plus one retry with a format reminder if the reply has no answer tags."""
    if not subcaptions:
        raise LogicError("aggregate_scene needs at least one subcaption")
    prompt = build_aggregator_prompt(subcaptions)
    replies = []
    for attempt, text in enumerate((prompt, f"{prompt}\n{FORMAT_REMINDER}"), start=1):
        reply = backend.complete(text)
        replies.append(reply)
        try:
            caption = parse_answer(reply)
        except ParseError as exc:
            logger.warning("%s_%s: aggregator reply unusable (attempt %d): %s",
                           video_id, segment_index, attempt, exc)
            continue
        return AggregationRecord(
            input_subcaptions=tuple(subcaptions),
            prompt=prompt,
            raw_reply=reply,
            caption=SceneCaption(
                video_id=video_id,
                segment_index=segment_index,
                caption=caption,
                retained_window_starts=tuple(sc.window_start for sc in subcaptions),
                config_fingerprint=config_fingerprint,
            ),
            attempts=attempt,
        )
    raise AggregationFailed(f"{video_id}_{segment_index}: no <ANSWER> span after 2 attempts", replies)
