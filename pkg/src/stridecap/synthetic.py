"""Bundled synthetic corpus: 12 small scenes whose steps are painted in palette colours.

The mock captioner recognises those colours, so the whole pipeline can run
offline and deterministically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .backends.mock import PALETTE
from .ingest import manifest_from_annotations, serialize_manifest

N_SCENES = 12
FRAME_W, FRAME_H = 64, 48
SPLIT = "validation"

# config tuned for the tiny scenes; everything else keeps the defaults
SYNTHETIC_CONFIG = """\
# synthetic corpus: short scenes, so subsample every 2nd frame
M = 2
K = 10
s_base = 10
s_max = 30
alpha = 1.5
tau = 0.5
side = 384
workers = 4
seeds = 0, 1, 2
"""


def _scene_plan(rng: np.random.Generator) -> list:
    """List of (palette bucket, frame count) steps for one scene."""
    n_steps = int(rng.integers(1, 4))
    buckets = rng.choice(len(PALETTE), size=n_steps, replace=False)
    return [(int(b), int(rng.integers(24, 61))) for b in buckets]


def _render(bucket: int, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    base = np.array(PALETTE[bucket][0], dtype=np.int16)
    img = np.empty((FRAME_H, FRAME_W, 3), dtype=np.int16)
    img[:] = base
    # a small square drifting across the frame, plus mild noise
    x = int((FRAME_W - 12) * k / max(n - 1, 1))
    img[18:30, x:x + 12] = 255 - base
    img += rng.integers(-6, 7, size=img.shape, dtype=np.int16)
    return np.clip(img, 0, 255).astype(np.uint8)


def _reference(plan: list) -> str:
    actions = [PALETTE[b][1][0] for b, _ in plan]
    if len(actions) == 1:
        text = actions[0]
    else:
        text = ", ".join(actions[:-1]) + " and " + actions[-1]
    return text[0].upper() + text[1:] + "."


def write_synthetic_corpus(root, seed: int = 0, n_scenes: int = N_SCENES) -> dict:
    """Write frames, a YouCookII-style annotation file, the manifest and a config.

    Returns the paths: ``frames_root``, ``annotations``, ``manifest``, ``config``.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    database = {}
    videos = [f"syn{v:02d}" for v in range(n_scenes // 3 or 1)]
    start = {v: 0 for v in videos}
    for s in range(n_scenes):
        vid = videos[s % len(videos)]
        seg = s // len(videos)
        plan = _scene_plan(rng)
        total = sum(n for _, n in plan)
        scene_dir = root / "frames" / SPLIT / f"{vid}_{seg}"
        scene_dir.mkdir(parents=True, exist_ok=True)
        idx = 0
        for bucket, n in plan:
            for k in range(n):
                Image.fromarray(_render(bucket, k, n, rng)).save(scene_dir / f"{idx:05d}.png")
                idx += 1
        video = database.setdefault(vid, {"subset": SPLIT, "annotations": []})
        video["annotations"].append({
            "id": seg,
            "segment": [start[vid], start[vid] + total - 1],
            "sentence": _reference(plan),
        })
        start[vid] += total
    annotations = root / "annotations.json"
    annotations.write_text(json.dumps({"database": database}, indent=2) + "\n", encoding="utf-8")
    manifest, _ = manifest_from_annotations({"database": database}, split=SPLIT)
    manifest_path = root / "manifest.json"
    manifest_path.write_text(serialize_manifest(manifest), encoding="utf-8")
    config = root / "synthetic.cfg"
    config.write_text(SYNTHETIC_CONFIG, encoding="utf-8")
    return {"frames_root": root / "frames", "annotations": annotations,
            "manifest": manifest_path, "config": config}
