"""Score a captions file against manifest references and build the metric report."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import logging
from collections import defaultdict
from typing import Optional, Sequence

from ..core import StrideCapError
from .bertscore import bertscore
from .bleu import bleu4
from .cider import cider
from .dtw import dtw_align
from .meteor import meteor_lite
from .semantic import nli_contradiction, nsp_coherence, sbert_similarity
from .text import split_sentences, tokenize

logger = logging.getLogger(__name__)

# flat column key, table label, metric toggle that produces it
COLUMNS = (
    ("bleu4", "B@4", "bleu"),
    ("meteor", "METEOR", "meteor"),
    ("cider", "CIDEr", "cider"),
    ("bert_p", "BERT P", "bert"),
    ("bert_r", "BERT R", "bert"),
    ("bert_f1", "BERT F1", "bert"),
    ("sbert", "SBERT", "sbert"),
    ("dtw_align", "Align_DTW", "dtw"),
    ("nli_contradict", "Contradict_NLI", "nli"),
    ("nsp_true", "NSP True", "nsp"),
    ("nsp_shuffled", "NSP Shuffled", "nsp"),
    ("nsp_delta", "NSP Delta", "nsp"),
)

_NESTED = {"bert": ("bert_p", "bert_r", "bert_f1"), "nsp": ("nsp_true", "nsp_shuffled", "nsp_delta")}
_NESTED_KEYS = {"bert": ("p", "r", "f1"), "nsp": ("true", "shuffled", "delta")}


def flatten_scores(scores: dict) -> dict:
    """``{bert: {p, r, f1}, nsp: {...}}`` -> ``bert_p``, ..., ``nsp_delta`` columns."""
    flat = {}
    for key, _, _ in COLUMNS:
        if key in scores:
            flat[key] = scores[key]
    for group, cols in _NESTED.items():
        sub = scores.get(group)
        if group in scores:
            for col, k in zip(cols, _NESTED_KEYS[group]):
                flat[col] = None if sub is None else sub.get(k)
    return flat


def nest_scores(flat: dict) -> dict:
    out = {}
    for key, _, toggle in COLUMNS:
        if key not in flat:
            continue
        if toggle in _NESTED:
            group = out.setdefault(toggle, {})
            group[_NESTED_KEYS[toggle][_NESTED[toggle].index(key)]] = flat[key]
        else:
            out[key] = flat[key]
    return out


def _unit_token_embeddings(embedder, text: str) -> list:
    return [v.normalized() for v in embedder.embed_tokens(tokenize(text))]


def _mean(values) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def _nsp_dict(res) -> Optional[dict]:
    if res is None:
        return None
    return {"true": res.true, "shuffled": res.shuffled, "delta": res.delta}


def score_scenes(pairs: Sequence[tuple], metrics: Sequence[str], embedder=None, pair_scorer=None,
                 seed: int = 0) -> tuple:
    """Score ``(key, candidate, reference)`` triples.

    Returns ``(per-scene score dicts, corpus dict)``. Per-scene NSP uses the sentences of
    each caption; the corpus NSP treats each video's scene captions, in segment order,
    as one document.
    """
    metrics = set(metrics)
    if embedder is None and metrics & {"bert", "sbert", "dtw"}:
        logger.warning("no embedder configured; bert/sbert/dtw reported as unavailable")
    if pair_scorer is None and metrics & {"nli", "nsp"}:
        logger.warning("no pair scorer configured; skipping nli/nsp")
        metrics -= {"nli", "nsp"}

    cand_tokens = [tokenize(c) for _, c, _ in pairs]
    ref_tokens = [tokenize(r) for _, _, r in pairs]
    cider_scores = cider(cand_tokens, [[r] for r in ref_tokens]) if "cider" in metrics else None

    scenes = []
    for idx, ((vid, seg), cand, ref) in enumerate(pairs):
        row = {"video_id": vid, "segment_index": seg}
        if "bleu" in metrics:
            row["bleu4"] = bleu4(cand_tokens[idx], [ref_tokens[idx]])[0]
        if "meteor" in metrics:
            row["meteor"] = meteor_lite(cand_tokens[idx], ref_tokens[idx])[0]
        if cider_scores is not None:
            row["cider"] = cider_scores[idx][0]
        if "bert" in metrics:
            row["bert"] = _bert(embedder, cand, ref)
        if "sbert" in metrics:
            row["sbert"] = sbert_similarity(cand, ref, embedder) if embedder is not None else None
        if "dtw" in metrics:
            row["dtw_align"] = _dtw(embedder, cand, ref)
        if "nli" in metrics:
            row["nli_contradict"] = nli_contradiction([(cand, ref)], pair_scorer).score
        if "nsp" in metrics:
            row["nsp"] = _nsp_dict(_safe_nsp(split_sentences(cand), pair_scorer, seed + idx))
        scenes.append(row)

    corpus = {}
    flat_rows = [flatten_scores(r) for r in scenes]
    for key, _, toggle in COLUMNS:
        if toggle in metrics and toggle != "nsp":
            corpus[key] = _mean(r.get(key) for r in flat_rows)
    if "nsp" in metrics:
        corpus.update(_corpus_nsp(pairs, pair_scorer, seed, flat_rows))
    return scenes, nest_scores(corpus)


def _bert(embedder, cand: str, ref: str) -> Optional[dict]:
    if embedder is None:
        return None
    try:
        t = bertscore(_unit_token_embeddings(embedder, cand), _unit_token_embeddings(embedder, ref))
    except (StrideCapError, OSError) as exc:
        logger.warning("bertscore unavailable: %s", exc)
        return None
    return {"p": t.precision, "r": t.recall, "f1": t.f1}


def _dtw(embedder, cand: str, ref: str) -> Optional[float]:
    if embedder is None:
        return None
    cs, rs = split_sentences(cand), split_sentences(ref)
    if not cs or not rs:
        return None
    try:
        return dtw_align([embedder.embed(s) for s in cs], [embedder.embed(s) for s in rs])[0]
    except (StrideCapError, OSError) as exc:
        logger.warning("dtw alignment unavailable: %s", exc)
        return None


def _safe_nsp(sentences, scorer, seed):
    try:
        return nsp_coherence(sentences, scorer, seed)
    except (StrideCapError, OSError, ValueError) as exc:
        logger.warning("nsp unavailable: %s", exc)
        return None


def _corpus_nsp(pairs, scorer, seed, flat_rows) -> dict:
    by_video = defaultdict(list)
    for (vid, seg), cand, _ in pairs:
        by_video[vid].append((seg, cand))
    results = []
    for k, vid in enumerate(sorted(by_video)):
        sentences = [s for _, cand in sorted(by_video[vid]) for s in split_sentences(cand)]
        res = _safe_nsp(sentences, scorer, seed + k)
        if res is not None:
            results.append(res)
    if results:
        return {"nsp_true": _mean(r.true for r in results),
                "nsp_shuffled": _mean(r.shuffled for r in results),
                "nsp_delta": _mean(r.delta for r in results)}
    return {k: _mean(r.get(k) for r in flat_rows) for k in ("nsp_true", "nsp_shuffled", "nsp_delta")}


def match_captions(captions: Sequence, manifest) -> tuple:
    """Pair captions with manifest references by (video_id, segment_index).

    Returns ``(pairs, unmatched)``; pairs follow manifest order.
    """
    refs = {e.key: e.reference_caption for e in manifest.entries}
    caps = {(c.video_id, c.segment_index): c.caption for c in captions}
    pairs = [(key, caps[key], refs[key]) for key in refs if key in caps]
    unmatched = ([{"video_id": k[0], "segment_index": k[1], "missing": "caption"}
                  for k in refs if k not in caps]
                 + [{"video_id": k[0], "segment_index": k[1], "missing": "reference"}
                    for k in caps if k not in refs])
    return pairs, unmatched


def build_report(pairs, metrics, embedder=None, pair_scorer=None, seed: int = 0,
                 config_fingerprint: str = "", excluded=()) -> dict:
    scenes, corpus = score_scenes(pairs, metrics, embedder, pair_scorer, seed)
    return {
        "scene_scores": scenes,
        "corpus": corpus,
        "config_fingerprint": config_fingerprint,
        "seed": seed,
        "metrics": [m for m in ("bleu", "meteor", "cider", "bert", "sbert", "dtw", "nli", "nsp")
                    if m in metrics],
        "n_scenes": len(scenes),
        "excluded": list(excluded),
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def report_columns(report: dict) -> list:
    present = set()
    for row in report["scene_scores"] + [report["corpus"]]:
        present.update(flatten_scores(row))
    return [key for key, _, _ in COLUMNS if key in present]


def report_to_csv(report: dict) -> str:
    """One row per scene plus a final ``corpus`` row, same columns as the JSON report."""
    cols = report_columns(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scope", "video_id", "segment_index", *cols])
    for row in report["scene_scores"]:
        flat = flatten_scores(row)
        w.writerow(["scene", row["video_id"], row["segment_index"], *[_cell(flat.get(c)) for c in cols]])
    flat = flatten_scores(report["corpus"])
    w.writerow(["corpus", "", "", *[_cell(flat.get(c)) for c in cols]])
    return buf.getvalue()


def _cell(v) -> str:
    return "" if v is None else repr(float(v))
