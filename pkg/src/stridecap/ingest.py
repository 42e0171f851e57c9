"""Scene manifests and on-disk frame loading.

Frames live at ``<root>/<split>/<video_id>_<segment_index>/<NNN>.<png|jpg>``;
the manifest stores ``frames_dir`` relative to ``<root>/<split>``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .core import EmptySceneError, Frame, ParseError, Scene, ValidationError

logger = logging.getLogger(__name__)

FRAME_SUFFIXES = (".png", ".jpg", ".jpeg")


def scene_dir_name(video_id: str, segment_index: int) -> str:
    return f"{video_id}_{segment_index}"


@dataclass(frozen=True)
class SceneManifestEntry:
    video_id: str
    segment_index: int
    start_frame: int
    end_frame: int
    reference_caption: str = ""
    frames_dir: str = ""

    def __post_init__(self):
        if not self.frames_dir:
            object.__setattr__(self, "frames_dir", scene_dir_name(self.video_id, self.segment_index))
        if self.segment_index < 0:
            raise ValidationError(f"entry {self.key}: segment_index must be >= 0")
        if self.start_frame > self.end_frame:
            raise ValidationError(
                f"entry {self.key}: start_frame {self.start_frame} > end_frame {self.end_frame}")
        if Path(self.frames_dir).name != scene_dir_name(self.video_id, self.segment_index):
            raise ValidationError(
                f"entry {self.key}: frames_dir {self.frames_dir!r} must be named "
                f"{scene_dir_name(self.video_id, self.segment_index)!r}")

    @property
    def key(self) -> tuple:
        return (self.video_id, self.segment_index)

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "segment_index": self.segment_index,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "reference_caption": self.reference_caption,
            "frames_dir": self.frames_dir,
        }


@dataclass(frozen=True)
class SceneManifest:
    split: str
    entries: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for e in self.entries:
            if e.key in seen:
                raise ValidationError(f"duplicate manifest entry {e.video_id}_{e.segment_index}")
            seen.add(e.key)

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {"split": self.split, "entries": [e.to_dict() for e in self.entries]}


_ENTRY_FIELDS = {
    "video_id": str,
    "segment_index": int,
    "start_frame": int,
    "end_frame": int,
    "reference_caption": str,
    "frames_dir": str,
}


def _check_field(value, typ, name: str, where: str):
    # bool is an int subclass; reject it explicitly
    if typ is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ValidationError(f"{where}: field {name!r} must be an integer, got {value!r}")
    if typ is str and not isinstance(value, str):
        raise ValidationError(f"{where}: field {name!r} must be a string, got {value!r}")
    return value


def parse_manifest(manifest_text: str) -> SceneManifest:
    """Parse manifest JSON, preserving entry order."""
    try:
        doc = json.loads(manifest_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed manifest: {exc.msg}", raw=manifest_text,
                         line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object", raw=manifest_text)
    split = doc.get("split", "")
    if not isinstance(split, str):
        raise ValidationError("manifest 'split' must be a string")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list):
        raise ValidationError("manifest 'entries' must be a list")

    entries = []
    for i, item in enumerate(raw_entries):
        where = f"entry {i}"
        if not isinstance(item, dict):
            raise ValidationError(f"{where}: must be an object")
        missing = [k for k in ("video_id", "segment_index", "start_frame", "end_frame") if k not in item]
        if missing:
            raise ValidationError(f"{where}: missing fields {missing}")
        kwargs = {k: _check_field(item[k], typ, k, where)
                  for k, typ in _ENTRY_FIELDS.items() if k in item}
        where = f"entry {i} ({kwargs['video_id']}_{kwargs['segment_index']})"
        try:
            entries.append(SceneManifestEntry(**kwargs))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
    return SceneManifest(split=split, entries=tuple(entries))


def serialize_manifest(manifest: SceneManifest) -> str:
    return json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n"


def read_manifest(path) -> SceneManifest:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))


def manifest_from_annotations(doc: dict, split: Optional[str] = None) -> tuple:
    """Convert a YouCookII-style annotation document into a manifest.

    Accepts ``{"database": {video_id: {"subset": ..., "annotations": [{"id", "segment":
    [start, end], "sentence"}]}}}``. Returns ``(manifest, skipped)`` where ``skipped``
    lists human-readable reasons for every annotation that could not be converted.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("database"), dict):
        raise ParseError("annotation document must contain a 'database' object")
    entries, skipped, seen = [], [], set()
    subsets = set()
    for video_id, video in doc["database"].items():
        if not isinstance(video, dict):
            skipped.append(f"{video_id}: video record is not an object")
            continue
        subset = video.get("subset", "")
        if split is not None and subset != split:
            continue
        subsets.add(subset)
        for pos, ann in enumerate(video.get("annotations", [])):
            try:
                seg_idx = int(ann.get("id", pos))
                start, end = ann["segment"]
                entry = SceneManifestEntry(
                    video_id=str(video_id),
                    segment_index=seg_idx,
                    start_frame=int(start),
                    end_frame=int(end),
                    reference_caption=str(ann.get("sentence", "")).strip(),
                )
            except (KeyError, TypeError, ValueError) as exc:
                skipped.append(f"{video_id} annotation {pos}: {exc}")
                continue
            if entry.key in seen:
                skipped.append(f"{entry.frames_dir}: duplicate segment")
                continue
            seen.add(entry.key)
            entries.append(entry)
    if split is None:
        split = subsets.pop() if len(subsets) == 1 else ""
    return SceneManifest(split=split, entries=tuple(entries)), skipped


def _frame_files(directory: Path) -> list:
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES]
    return sorted(files, key=lambda p: p.name)


def _decode(path: Path) -> Optional[np.ndarray]:
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)[:, :, None]
            if img.mode != "RGB":
                img = img.convert("RGB")
            return np.asarray(img, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        logger.warning("skipping undecodable frame %s: %s", path, exc)
        return None


def resize_frame(f: Frame, side: int = 384) -> Frame:
    """Bilinear resize to ``side x side``; the aspect ratio is not preserved."""
    if side < 1:
        raise ValidationError(f"side must be >= 1, got {side}")
    if f.height == side and f.width == side:
        return f
    if f.channels == 1:
        img = Image.fromarray(f.pixels[:, :, 0], mode="L")
        out = np.asarray(img.resize((side, side), Image.BILINEAR))[:, :, None]
    else:
        img = Image.fromarray(f.pixels, mode="RGB")
        out = np.asarray(img.resize((side, side), Image.BILINEAR))
    return Frame(np.ascontiguousarray(out))


def load_scene_frames(entry: SceneManifestEntry, root, side: int = 384) -> Scene:
    """Load and resize every frame of ``entry`` found under ``root``.

    ``root`` is the split directory (``<frames_root>/<split>``).
    """
    directory = Path(root) / entry.frames_dir
    if not directory.is_dir():
        raise FileNotFoundError(f"frames directory not found: {directory}")
    frames = []
    channels = None
    for path in _frame_files(directory):
        px = _decode(path)
        if px is None:
            continue
        if channels is None:
            channels = px.shape[2]
        elif px.shape[2] != channels:
            raise ValidationError(
                f"{directory}: mixed channel counts ({channels} and {px.shape[2]} in {path.name})")
        frames.append(resize_frame(Frame(px), side))
    if not frames:
        raise EmptySceneError(f"no decodable frames in {directory}")
    return Scene(
        video_id=entry.video_id,
        segment_index=entry.segment_index,
        frames=tuple(frames),
        start_frame=entry.start_frame,
        end_frame=entry.end_frame,
    )


def split_root(frames_root, manifest: SceneManifest) -> Path:
    root = Path(frames_root)
    return root / manifest.split if manifest.split else root
