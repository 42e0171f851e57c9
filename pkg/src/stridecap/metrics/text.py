"""Tokenization shared by every n-gram metric and the mock embedder."""

from __future__ import annotations

import re
import string

_PUNCT = string.punctuation
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list:
    """Lowercase, split on whitespace, strip ASCII punctuation from token ends."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_PUNCT)
        if tok:
            out.append(tok)
    return out


def ngrams(tokens, n: int) -> list:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def split_sentences(text: str) -> list:
    """Split on terminal punctuation followed by whitespace; blank pieces are dropped."""
    return [s.strip() for s in _SENTENCE_END.split(text.strip()) if s.strip()]
