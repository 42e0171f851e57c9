"""Prompt text for the window captioner and the aggregator, and reply parsing."""

from __future__ import annotations

import re
from typing import Sequence

from ..core import LogicError, ParseError, Subcaption, ValidationError

MMCOT_PROMPT = """\
These images show a sequence of events from left to right.
Task:
1. Carefully reason about the sequence of actions in the images (internally).
2. Produce exactly two outputs separated by a "|":
   - Output 1: Description of the exact action being performed throughout the sequence.
   - Output 2: List of objects involved in the sequence.
3. Do not show internal reasoning or extra captions — only the final outputs.
4. Keep it short, clear, and concise.

Output format: <CONCLUSION>Action | Objects</CONCLUSION>
Focus on the full temporal progression of the sequence."""

AGGREGATOR_HEADER = """\
You are given multiple captions from a short instructional clip, in chronological order.
Write ONE concise sentence that is short and instructional.
Use an imperative tone, as if giving instructions for performing a task.
Your response MUST be enclosed between <ANSWER> and </ANSWER>, containing ONLY the final instruction sentence.
Captions:"""

AGGREGATOR_FOOTER = "Output:"

FORMAT_REMINDER = "Respond only with <ANSWER>…</ANSWER>."

_CONCLUSION_RE = re.compile(r"<CONCLUSION>(.*?)</CONCLUSION>", re.DOTALL | re.IGNORECASE)
_ANSWER_RE = re.compile(r"<ANSWER>(.*?)</ANSWER>", re.DOTALL | re.IGNORECASE)
_ANSWER_TAG_RE = re.compile(r"</?ANSWER>", re.IGNORECASE)


def build_mmcot_prompt() -> str:
    return MMCOT_PROMPT


def build_aggregator_prompt(subcaptions: Sequence[Subcaption]) -> str:
    """Number the subcaptions in the given (chronological) order, one per line."""
    if not subcaptions:
        raise LogicError("aggregator prompt needs at least one subcaption")
    items = [f"{i}. {sc.render()}" for i, sc in enumerate(subcaptions, start=1)]
    return "\n".join([AGGREGATOR_HEADER, *items, AGGREGATOR_FOOTER])


def parse_conclusion(reply: str, window_start: int = 0) -> Subcaption:
    """Extract the first ``<CONCLUSION>`` span and split it on the first ``|``."""
    m = _CONCLUSION_RE.search(reply)
    if m is None:
        raise ParseError("reply has no <CONCLUSION>...</CONCLUSION> span", raw=reply)
    body = m.group(1)
    action, _, rest = body.partition("|")
    action = action.strip()
    objects = tuple(o.strip() for o in rest.split(",") if o.strip())
    try:
        return Subcaption(action=action, objects=objects, window_start=window_start, raw=reply)
    except ValidationError as exc:
        raise ParseError(f"unusable conclusion: {exc}", raw=reply) from exc


def parse_answer(reply: str) -> str:
    m = _ANSWER_RE.search(reply)
    if m is None:
        raise ParseError("reply has no <ANSWER>...</ANSWER> span", raw=reply)
    text = " ".join(_ANSWER_TAG_RE.sub(" ", m.group(1)).split())
    if not text:
        raise ParseError("empty <ANSWER> span", raw=reply)
    return text


def extract_prompt_captions(prompt: str) -> list:
    """Inverse of :func:`build_aggregator_prompt`: the numbered caption lines, in order."""
    _, _, body = prompt.partition(AGGREGATOR_HEADER)
    body, _, _ = body.partition("\n" + AGGREGATOR_FOOTER)
    out = []
    for line in body.splitlines():
        m = re.match(r"^\s*(\d+)\.\s(.*)$", line)
        if m:
            out.append(m.group(2))
    return out
