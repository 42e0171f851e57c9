"""Run configuration: a flat ``key = value`` file, CLI overrides and the config fingerprint.

Example::

    # stride selection
    M = 40
    K = 10
    tau = 0.5
    captioner.endpoint = http://localhost:8000/v1/chat/completions
    captioner.model = Qwen/Qwen2.5-VL-7B-Instruct
    captioner.max_concurrency = 2
    metrics = bleu, meteor, cider

Blank lines and ``#`` comments are ignored. Keys are case-sensitive.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .backends.http import endpoint_override
from .core import ROLES, BackendSpec, ConfigError, ParseError, PipelineConfig

ALL_METRICS = ("bleu", "meteor", "cider", "bert", "sbert", "dtw", "nli", "nsp")

_PIPELINE_KEYS = {
    "M": int, "K": int, "s_base": float, "s_max": float, "alpha": float, "tau": float,
    "seed": int, "side": int, "temperature": float, "multi_image": "bool",
}
_BACKEND_KEYS = {"endpoint": str, "model": str, "max_concurrency": int}
_RUN_KEYS = {
    "manifest": str, "frames_root": str, "out": str, "workers": int, "seeds": "intlist",
    "metrics": "strlist", "embed_dim": int, "mock": "bool",
}


@dataclass(frozen=True)
class CliConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    manifest: Optional[str] = None
    frames_root: Optional[str] = None
    out: str = "runs"
    workers: int = 4
    seeds: tuple = (0,)
    metrics: tuple = ALL_METRICS
    embed_dim: int = 128
    mock: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.metrics) - set(ALL_METRICS)
        if unknown:
            raise ConfigError(f"unknown metrics {sorted(unknown)}; choose from {ALL_METRICS}")
        if self.embed_dim < 2:
            raise ConfigError(f"embed_dim must be >= 2, got {self.embed_dim}")

    def pool_size(self) -> int:
        if self.mock:
            return self.workers
        limits = [self.pipeline.backend(r).max_concurrency for r in ("captioner", "embedder", "aggregator")]
        return max(1, min([self.workers] + limits))

    def fingerprint(self) -> str:
        return config_fingerprint(self)


def _convert(key: str, value: str, typ):
    try:
        if typ == "bool":
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ == "intlist":
            return tuple(int(v) for v in value.split(",") if v.strip())
        if typ == "strlist":
            return tuple(v.strip() for v in value.split(",") if v.strip())
        return typ(value.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse the flat format into a dict of raw string values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected 'key = value', got {line!r}", raw=text, line=lineno)
        out[key.strip()] = value.strip()
    return out


def build_config(values: dict) -> CliConfig:
    """Typed config from raw key/values (strings or already-typed values)."""
    pipeline_kw, run_kw = {}, {}
    backends = {}
    for key, value in values.items():
        if value is None:
            continue
        if key in _PIPELINE_KEYS:
            target, typ = pipeline_kw, _PIPELINE_KEYS[key]
        elif key in _RUN_KEYS:
            target, typ = run_kw, _RUN_KEYS[key]
        elif "." in key and key.split(".", 1)[0] in ROLES and key.split(".", 1)[1] in _BACKEND_KEYS:
            role, attr = key.split(".", 1)
            target, typ = backends.setdefault(role, {}), _BACKEND_KEYS[attr]
            key = attr
        else:
            raise ConfigError(f"unknown config key {key!r}")
        target[key] = _convert(key, value, typ) if isinstance(value, str) else value
    specs = {}
    for role in ROLES:
        kw = backends.get(role, {})
        kw["endpoint"] = endpoint_override(role, kw.get("endpoint", ""))
        specs[role] = BackendSpec(**kw)
    pipeline = PipelineConfig(backends=specs, **pipeline_kw)
    return CliConfig(pipeline=pipeline, **run_kw)


def load_config(path=None, overrides: Optional[dict] = None) -> CliConfig:
    """File values first, then ``overrides`` (CLI flags) on top."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return build_config(values)


def resolved_dict(cfg: CliConfig) -> dict:
    p = dataclasses.asdict(cfg.pipeline)
    p["backends"] = {r: dataclasses.asdict(cfg.pipeline.backend(r)) for r in ROLES}
    return {
        "pipeline": p,
        "manifest": cfg.manifest, "frames_root": cfg.frames_root, "out": cfg.out,
        "workers": cfg.workers, "seeds": list(cfg.seeds), "metrics": list(cfg.metrics),
        "embed_dim": cfg.embed_dim, "mock": cfg.mock,
    }


def config_fingerprint(cfg: CliConfig) -> str:
    """Short stable hash of everything that shapes the generated captions.

    The seed, file locations and concurrency are left out so that replicate
    runs over several seeds share a fingerprint and can be aggregated together.
    """
    d = resolved_dict(cfg)
    p = dict(d["pipeline"])
    p.pop("seed")
    for spec in p["backends"].values():
        spec.pop("max_concurrency")
    payload = {"pipeline": p, "mock": d["mock"], "embed_dim": d["embed_dim"]}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
