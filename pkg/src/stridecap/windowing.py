"""Frame subsampling, window extraction and horizontal concatenation."""

from __future__ import annotations

import base64
import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .core import ConfigError, Frame, LogicError, Scene, ValidationError, Window


@dataclass(frozen=True, eq=False)
class SubsampledSequence:
    scene_key: str
    frames: tuple
    source_indices: tuple

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "source_indices", tuple(self.source_indices))
        if len(self.frames) != len(self.source_indices):
            raise ValidationError("frames and source_indices must have equal length")
        idx = self.source_indices
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError("source_indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True, eq=False)
class WideImage:
    """Frames of one window placed side by side, left to right."""

    pixels: np.ndarray
    n: int
    offsets: tuple = ()

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.n < 1:
            raise ValidationError("wide image must be H x W x C with n >= 1")
        if not self.offsets:
            w = self.pixels.shape[1] // self.n
            object.__setattr__(self, "offsets", tuple(i * w for i in range(self.n)))
        self.pixels.setflags(write=False)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def split(self) -> list:
        """Recover the individual frames by column offset."""
        bounds = list(self.offsets) + [self.width]
        return [Frame(self.pixels[:, a:b]) for a, b in zip(bounds, bounds[1:])]

    def to_png_base64(self) -> str:
        return frame_png_base64(self.pixels)


def frame_png_base64(pixels: np.ndarray) -> str:
    arr = pixels[:, :, 0] if pixels.shape[2] == 1 else pixels
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(arr)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def subsample(scene: Scene, M: int) -> SubsampledSequence:
    """Keep original frames 0, M, 2M, ... of the scene."""
    if M < 1:
        raise ConfigError(f"subsample rate M must be >= 1, got {M}")
    indices = tuple(range(0, len(scene.frames), M))
    return SubsampledSequence(
        scene_key=scene.key,
        frames=tuple(scene.frames[i] for i in indices),
        source_indices=indices,
    )


def window_at(seq: SubsampledSequence, t: int, K: int) -> Window:
    """Positions ``[t, min(t + K, len(seq)))``; tail windows may be shorter than K."""
    if K < 1:
        raise ConfigError(f"window size K must be >= 1, got {K}")
    if not 0 <= t < len(seq):
        raise LogicError(f"window start {t} out of range for sequence of length {len(seq)}")
    return Window(scene_key=seq.scene_key, start=t, frames=seq.frames[t:t + K], max_size=K)


def hconcat(w: Window) -> WideImage:
    frames = w.frames
    if not frames:
        raise ValidationError("cannot concatenate an empty window")
    h, c = frames[0].height, frames[0].channels
    for i, f in enumerate(frames):
        if f.height != h or f.channels != c:
            raise ValidationError(
                f"window frame {i} is {f.height}x{f.width}x{f.channels}; expected height {h}, "
                f"{c} channels")
    offsets, pos = [], 0
    for f in frames:
        offsets.append(pos)
        pos += f.width
    pixels = np.concatenate([f.pixels for f in frames], axis=1)
    return WideImage(pixels=pixels, n=len(frames), offsets=tuple(offsets))
