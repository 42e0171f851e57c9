"""Domain types shared across the pipeline and the metric suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class StrideCapError(Exception):
    """Base class for all package errors."""


class ConfigError(StrideCapError, ValueError):
    """Invalid configuration or mismatched inputs (e.g. vector dimensions)."""


class ValidationError(StrideCapError, ValueError):
    """A domain invariant was violated."""


class LogicError(StrideCapError):
    """A precondition the caller was responsible for was not met."""


class ParseError(StrideCapError, ValueError):
    """Structured text could not be parsed.

    ``raw`` keeps the offending input so callers can log or persist it.
    """

    def __init__(self, message: str, raw: str = "", line: Optional[int] = None,
                 column: Optional[int] = None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.raw = raw
        self.line = line
        self.column = column


class EmptySceneError(StrideCapError):
    """A scene directory held no decodable frames."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """One H x W x C uint8 raster. Grayscale frames keep a trailing channel axis."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray):
            raise ValidationError("frame pixels must be a numpy array")
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3:
            raise ValidationError(f"frame must be H x W x C, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise ValidationError(f"frame pixels must be uint8, got {px.dtype}")
        h, w, c = px.shape
        if h <= 0 or w <= 0:
            raise ValidationError(f"frame dimensions must be positive, got {h}x{w}")
        if c not in (1, 3):
            raise ValidationError(f"frame must have 1 or 3 channels, got {c}")
        if not px.flags.c_contiguous or px.flags.writeable:
            px = np.ascontiguousarray(px).copy()
        object.__setattr__(self, "pixels", _readonly(px))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()


@dataclass(frozen=True, eq=False)
class Scene:
    video_id: str
    segment_index: int
    frames: tuple
    start_frame: int = 0
    end_frame: int = 0

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if not frames:
            raise EmptySceneError(f"scene {self.key} has no frames")
        if self.segment_index < 0:
            raise ValidationError(f"segment_index must be >= 0, got {self.segment_index}")
        if self.start_frame > self.end_frame:
            raise ValidationError(
                f"scene {self.key}: start_frame {self.start_frame} > end_frame {self.end_frame}")
        shape = frames[0].pixels.shape
        for i, f in enumerate(frames):
            if f.pixels.shape != shape:
                raise ValidationError(
                    f"scene {self.key}: frame {i} has shape {f.pixels.shape}, expected {shape}")

    @property
    def key(self) -> str:
        return f"{self.video_id}_{self.segment_index}"

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True, eq=False)
class Window:
    """Frames ``[start, start + len(frames))`` of a subsampled sequence."""

    scene_key: str
    start: int
    frames: tuple
    max_size: int

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not 1 <= len(self.frames) <= self.max_size:
            raise ValidationError(
                f"window must hold 1..{self.max_size} frames, got {len(self.frames)}")
        if self.start < 0:
            raise ValidationError(f"window start must be >= 0, got {self.start}")


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise ValidationError("embedding must have dim >= 1")
        if not np.all(np.isfinite(v)):
            raise ValidationError("embedding entries must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def normalized(self) -> "EmbeddingVector":
        n = self.norm
        return self if n == 0.0 else EmbeddingVector(self.values / n)

    def tolist(self) -> list:
        return self.values.tolist()


@dataclass(frozen=True)
class Subcaption:
    """Parsed ``action | objects`` reply for the window starting at ``window_start``."""

    action: str
    objects: tuple = ()
    window_start: int = 0
    raw: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not self.action.strip():
            raise ValidationError("subcaption action must be non-empty")

    def render(self) -> str:
        return f"{self.action} | {', '.join(self.objects)}"

    def to_dict(self) -> dict:
        return {
            "window_start": self.window_start,
            "action": self.action,
            "objects": list(self.objects),
            "raw": self.raw,
        }


@dataclass(frozen=True)
class SceneCaption:
    video_id: str
    segment_index: int
    caption: str
    retained_window_starts: tuple
    config_fingerprint: str = ""

    def __post_init__(self):
        object.__setattr__(self, "retained_window_starts", tuple(self.retained_window_starts))
        if not self.caption.strip():
            raise ValidationError("scene caption must be non-empty")
        if "\n" in self.caption or "\r" in self.caption:
            raise ValidationError("scene caption must be a single line")
        starts = self.retained_window_starts
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValidationError(f"retained window starts must increase strictly: {starts}")

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "segment_index": self.segment_index,
            "caption": self.caption,
            "retained_window_starts": list(self.retained_window_starts),
            "config_fingerprint": self.config_fingerprint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneCaption":
        return cls(
            video_id=str(d["video_id"]),
            segment_index=int(d["segment_index"]),
            caption=str(d["caption"]),
            retained_window_starts=tuple(int(t) for t in d.get("retained_window_starts", ())),
            config_fingerprint=str(d.get("config_fingerprint", "")),
        )


@dataclass(frozen=True)
class BackendSpec:
    endpoint: str = ""
    model: str = ""
    max_concurrency: int = 4

    def __post_init__(self):
        if self.max_concurrency < 1:
            raise ConfigError(f"max_concurrency must be >= 1, got {self.max_concurrency}")


ROLES = ("captioner", "embedder", "aggregator", "pair_scorer")


@dataclass(frozen=True)
class PipelineConfig:
    """Stride-selection and backend settings for one captioning run.

    Defaults are the published ones: K = 10, s_base = 10, s_max = 3 * s_base,
    alpha = 1.5, tau = 0.5, and M = 40 (the best sampling rate in the ablation).
    """

    M: int = 40
    K: int = 10
    s_base: float = 10.0
    s_max: float = 30.0
    alpha: float = 1.5
    tau: float = 0.5
    seed: int = 0
    side: int = 384
    temperature: float = 0.0
    multi_image: bool = False
    backends: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.M < 1:
            raise ConfigError(f"M must be >= 1, got {self.M}")
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if not self.s_base >= 1:
            raise ConfigError(f"s_base must be >= 1, got {self.s_base}")
        if not self.s_max >= self.s_base:
            raise ConfigError(f"s_max ({self.s_max}) must be >= s_base ({self.s_base})")
        if not self.alpha >= 1:
            raise ConfigError(f"alpha must be >= 1, got {self.alpha}")
        if not -1.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [-1, 1], got {self.tau}")
        if self.side < 1:
            raise ConfigError(f"side must be >= 1, got {self.side}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")
        for role in self.backends:
            if role not in ROLES:
                raise ConfigError(f"unknown backend role {role!r}; expected one of {ROLES}")

    def backend(self, role: str) -> BackendSpec:
        return self.backends.get(role, BackendSpec())


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, 0.0 if either has zero norm.

    Accepts :class:`EmbeddingVector` or any 1-D sequence of numbers. The
    computation runs in float64 regardless of the input precision.
    """
    a = u.values if isinstance(u, EmbeddingVector) else np.asarray(u, dtype=np.float64)
    b = v.values if isinstance(v, EmbeddingVector) else np.asarray(v, dtype=np.float64)
    a = a.astype(np.float64, copy=False).reshape(-1)
    b = b.astype(np.float64, copy=False).reshape(-1)
    if a.shape != b.shape:
        raise ConfigError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.size < 1:
        raise ConfigError("vectors must have dim >= 1")
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        return 0.0
    sim = float(np.dot(a, b)) / (na * nb)
    return max(-1.0, min(1.0, sim))


def as_embedding(values: Sequence[float]) -> EmbeddingVector:
    return values if isinstance(values, EmbeddingVector) else EmbeddingVector(np.asarray(values))
