"""Caption metrics: n-gram overlap, embedding similarity and temporal coherence."""

from .bertscore import ScoreTriple, bertscore
from .bleu import BleuBreakdown, bleu4
from .cider import CiderBreakdown, cider
from .dtw import DtwTrace, dtw_align
from .meteor import MeteorBreakdown, meteor_lite
from .semantic import NliContradiction, NspCoherence, nli_contradiction, nsp_coherence, sbert_similarity
from .text import split_sentences, tokenize

__all__ = [
    "ScoreTriple", "bertscore", "BleuBreakdown", "bleu4", "CiderBreakdown", "cider",
    "DtwTrace", "dtw_align", "MeteorBreakdown", "meteor_lite", "NliContradiction",
    "NspCoherence", "nli_contradiction", "nsp_coherence", "sbert_similarity",
    "split_sentences", "tokenize",
]
