"""Scene-level captioning runs: load, subsample, select windows, aggregate, write JSONL."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

from .aggregate import AggregationFailed, AggregationRecord, aggregate_scene
from .backends.base import BackendError
from .backends.http import HttpChat, HttpEmbedder, HttpPairScorer
from .backends.mock import MockAggregator, MockCaptioner, MockEmbedder, MockPairScorer
from .config import CliConfig
from .core import ConfigError, EmptySceneError, SceneCaption, StrideCapError
from .ingest import SceneManifest, SceneManifestEntry, load_scene_frames, split_root
from .stride import EmbeddingFailed, StrideTrace, select_windows
from .windowing import subsample

logger = logging.getLogger(__name__)

CAPTIONS_FILE = "captions.jsonl"
SUBCAPTIONS_FILE = "subcaptions.jsonl"
TRACES_FILE = "traces.jsonl"
SUMMARY_FILE = "run_summary.json"


class Backends(NamedTuple):
    captioner: object
    embedder: object
    aggregator: object
    pair_scorer: Optional[object] = None


def _require(cfg: CliConfig, role: str):
    spec = cfg.pipeline.backend(role)
    if not spec.endpoint:
        raise ConfigError(f"no endpoint configured for {role}; set {role}.endpoint or use --mock")
    return spec


def make_backends(cfg: CliConfig, roles=("captioner", "embedder", "aggregator")) -> Backends:
    """Mocks under ``cfg.mock``; otherwise HTTP clients for the requested roles.

    The pair scorer is optional: without an endpoint it is left as None.
    """
    p = cfg.pipeline
    if cfg.mock:
        return Backends(MockCaptioner(seed=p.seed), MockEmbedder(cfg.embed_dim), MockAggregator(),
                        MockPairScorer(cfg.embed_dim))
    built = {}
    for role in roles:
        spec = _require(cfg, role)
        common = dict(max_concurrency=spec.max_concurrency)
        if role in ("captioner", "aggregator"):
            built[role] = HttpChat(spec.endpoint, spec.model, temperature=p.temperature,
                                   seed=p.seed, multi_image=p.multi_image, **common)
        elif role == "embedder":
            built[role] = HttpEmbedder(spec.endpoint, spec.model, **common)
    scorer_spec = p.backend("pair_scorer")
    scorer = (HttpPairScorer(scorer_spec.endpoint, scorer_spec.model,
                             max_concurrency=scorer_spec.max_concurrency)
              if scorer_spec.endpoint else None)
    return Backends(built.get("captioner"), built.get("embedder"), built.get("aggregator"), scorer)


@dataclass
class SceneResult:
    entry: SceneManifestEntry
    subcaptions: list = field(default_factory=list)
    trace: Optional[StrideTrace] = None
    record: Optional[AggregationRecord] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.record is not None


def caption_scene(entry: SceneManifestEntry, scenes_dir, cfg: CliConfig, backends: Backends,
                  fingerprint: str) -> SceneResult:
    """Run one scene end to end. Scene-local failures are captured in ``SceneResult.error``."""
    result = SceneResult(entry)
    p = cfg.pipeline
    try:
        scene = load_scene_frames(entry, scenes_dir, side=p.side)
        seq = subsample(scene, p.M)
        result.subcaptions, result.trace = select_windows(seq, p, backends.captioner, backends.embedder)
        if not result.subcaptions:
            raise StrideCapError("no window produced a parseable subcaption")
        result.record = aggregate_scene(result.subcaptions, backends.aggregator, entry.video_id,
                                        entry.segment_index, fingerprint)
    except EmbeddingFailed:
        raise
    except (AggregationFailed, EmptySceneError, FileNotFoundError, BackendError, StrideCapError) as exc:
        logger.error("scene %s failed: %s", entry.frames_dir, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def run_caption(cfg: CliConfig, manifest: SceneManifest, backends: Optional[Backends] = None) -> list:
    """Caption every manifest scene; results come back in manifest order."""
    if cfg.frames_root is None:
        raise ConfigError("frames_root is required for captioning")
    backends = backends or make_backends(cfg)
    fingerprint = cfg.fingerprint()
    scenes_dir = split_root(cfg.frames_root, manifest)
    with ThreadPoolExecutor(max_workers=cfg.pool_size()) as pool:
        futures = [pool.submit(caption_scene, e, scenes_dir, cfg, backends, fingerprint)
                   for e in manifest.entries]
        return [f.result() for f in futures]


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=False) + "\n"


def write_caption_outputs(out_dir, results: list, cfg: CliConfig) -> dict:
    """Write captions, subcaptions and traces JSONL plus a run summary; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fp = cfg.fingerprint()
    paths = {name: out / name for name in (CAPTIONS_FILE, SUBCAPTIONS_FILE, TRACES_FILE, SUMMARY_FILE)}
    with open(paths[CAPTIONS_FILE], "w", encoding="utf-8") as cap, \
            open(paths[SUBCAPTIONS_FILE], "w", encoding="utf-8") as sub, \
            open(paths[TRACES_FILE], "w", encoding="utf-8") as tr:
        for r in results:
            scene = {"video_id": r.entry.video_id, "segment_index": r.entry.segment_index}
            if r.trace is not None:
                for v in r.trace.visits:
                    tr.write(_dumps({**scene, **v.to_dict(), "config_fingerprint": fp}))
            for sc in r.subcaptions:
                sub.write(_dumps({**scene, **sc.to_dict(), "config_fingerprint": fp}))
            if r.ok:
                cap.write(_dumps(r.record.caption.to_dict()))
    failed = [{"video_id": r.entry.video_id, "segment_index": r.entry.segment_index, "error": r.error}
              for r in results if not r.ok]
    summary = {
        "config_fingerprint": fp,
        "seed": cfg.pipeline.seed,
        "scenes_total": len(results),
        "scenes_succeeded": sum(r.ok for r in results),
        "failed": failed,
    }
    paths[SUMMARY_FILE].write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return paths


def read_captions(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    out.append(SceneCaption.from_dict(json.loads(line)))
                except (ValueError, KeyError) as exc:
                    raise ConfigError(f"{path}:{lineno}: bad caption record: {exc}") from exc
    return out
