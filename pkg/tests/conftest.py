import numpy as np
import pytest

from stridecap.core import EmbeddingVector, Frame, Scene
from stridecap.synthetic import write_synthetic_corpus
from stridecap.windowing import SubsampledSequence


def index_frames(n):
    """1x2 RGB frames whose first two channels encode the frame index (up to 65535)."""
    frames = []
    for i in range(n):
        px = np.zeros((1, 2, 3), dtype=np.uint8)
        px[0, 0, 0], px[0, 0, 1] = i // 256, i % 256
        frames.append(Frame(px))
    return frames


def frame_index(frame):
    return int(frame.pixels[0, 0, 0]) * 256 + int(frame.pixels[0, 0, 1])


def index_sequence(n, key="vid_0"):
    frames = index_frames(n)
    return SubsampledSequence(scene_key=key, frames=tuple(frames), source_indices=tuple(range(n)))


class LabelCaptioner:
    """Reply for a window is looked up from the index encoded in its first frame."""

    def __init__(self, labels):
        self.labels = labels
        self.visits = []

    def caption(self, image, prompt):
        t = frame_index(image.split()[0])
        self.visits.append(t)
        label = self.labels[t]
        if label is None:
            return "no conclusion here"
        return f"<CONCLUSION>{label} | thing</CONCLUSION>"


class TableEmbedder:
    """Embeds a rendered subcaption by looking up its label in a vector table."""

    def __init__(self, table):
        self.table = table
        self.dim = len(next(iter(table.values())))

    def embed(self, text):
        label = text.split(" | ")[0]
        return EmbeddingVector(np.asarray(self.table[label], dtype=np.float64))

    def embed_tokens(self, tokens):
        return [self.embed(t) for t in tokens]


def make_scene(n, h=4, w=6, c=3, value=0, video_id="vid", segment_index=0):
    frames = [Frame(np.full((h, w, c), value, dtype=np.uint8)) for _ in range(n)]
    return Scene(video_id=video_id, segment_index=segment_index, frames=tuple(frames),
                 start_frame=0, end_frame=max(n - 1, 0))


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    return write_synthetic_corpus(root)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.call_report = rep
