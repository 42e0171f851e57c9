"""JSON-over-HTTP backends speaking the chat-completions and embeddings shapes.

Chat:       POST {model, messages, temperature, seed} -> {choices: [{message: {content}}]}
Embeddings: POST {model, input: [str, ...]}           -> {data: [{embedding: [float, ...]}]}
Pair score: POST {model, task: "nsp"|"nli", pairs: [[a, b], ...]}
            -> {scores: [{nsp_prob} | {entail, neutral, contradict}]}
"""

from __future__ import annotations

import logging
import os
import threading
import time
from typing import Optional, Sequence

import httpx

from ..core import EmbeddingVector, ValidationError
from ..windowing import frame_png_base64
from .base import BackendError, NonRetryableBackendError, PairScore, TransientBackendError

logger = logging.getLogger(__name__)

API_KEY_ENV = "DYNASTRIDE_API_KEY"


def endpoint_override(role: str, default: str) -> str:
    """Per-role endpoint from ``DYNASTRIDE_<ROLE>_ENDPOINT`` if set."""
    return os.environ.get(f"DYNASTRIDE_{role.upper()}_ENDPOINT", default)


class HttpClient:
    """POSTs JSON with retries on 5xx, timeouts and connection failures."""

    def __init__(self, endpoint: str, model: str, *, attempts: int = 3, backoff: float = 0.5,
                 timeout: float = 120.0, max_concurrency: int = 4,
                 transport: Optional[httpx.BaseTransport] = None):
        self.endpoint = endpoint
        self.model = model
        self.attempts = attempts
        self.backoff = backoff
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(max_concurrency)

    def close(self):
        self._client.close()

    def post(self, payload: dict) -> dict:
        last = None
        for attempt in range(1, self.attempts + 1):
            t0 = time.perf_counter()
            try:
                with self._slots:
                    resp = self._client.post(self.endpoint, json=payload)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                elapsed = time.perf_counter() - t0
                logger.debug("POST %s model=%s status=%d %.3fs", self.endpoint, self.model,
                             resp.status_code, elapsed)
                if resp.status_code < 400:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise NonRetryableBackendError(
                            f"response is not JSON: {exc}", self.endpoint, self.model) from exc
                if resp.status_code < 500:
                    raise NonRetryableBackendError(
                        f"HTTP {resp.status_code}: {resp.text[:200]}", self.endpoint, self.model)
                last = f"HTTP {resp.status_code}"
            logger.warning("attempt %d/%d to %s failed: %s", attempt, self.attempts,
                           self.endpoint, last)
            if attempt < self.attempts and self.backoff > 0:
                time.sleep(self.backoff * 2 ** (attempt - 1))
        raise TransientBackendError(f"gave up after {self.attempts} attempts ({last})",
                                    self.endpoint, self.model)

    def _shape_error(self, what: str, exc: Exception) -> BackendError:
        return NonRetryableBackendError(f"malformed {what} response: {exc!r}",
                                        self.endpoint, self.model)


def chat_payload(model: str, prompt: str, images: Sequence[str] = (), temperature: float = 0.0,
                 seed: Optional[int] = None) -> dict:
    content = [{"type": "image", "data": b64} for b64 in images]
    content.append({"type": "text", "text": prompt})
    payload = {"model": model, "messages": [{"role": "user", "content": content}],
               "temperature": temperature}
    if seed is not None:
        payload["seed"] = seed
    return payload


class HttpChat(HttpClient):
    """Captioner and aggregator over the chat wire shape."""

    def __init__(self, endpoint: str, model: str, *, temperature: float = 0.0,
                 seed: Optional[int] = None, multi_image: bool = False, **kwargs):
        super().__init__(endpoint, model, **kwargs)
        self.temperature = temperature
        self.seed = seed
        self.multi_image = multi_image

    def complete(self, prompt: str, image=None) -> str:
        images = []
        if image is not None:
            if self.multi_image:
                images = [frame_png_base64(f.pixels) for f in image.split()]
            else:
                images = [image.to_png_base64()]
        doc = self.post(chat_payload(self.model, prompt, images, self.temperature, self.seed))
        try:
            content = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise self._shape_error("chat", exc) from exc
        if isinstance(content, list):
            content = "".join(p.get("text", "") for p in content if isinstance(p, dict))
        return str(content)

    def caption(self, image, prompt: str) -> str:
        return self.complete(prompt, image)


class HttpEmbedder(HttpClient):
    def __init__(self, endpoint: str, model: str, **kwargs):
        super().__init__(endpoint, model, **kwargs)
        self.dim = None

    def embed_many(self, texts: Sequence[str]) -> list:
        if not texts:
            return []
        doc = self.post({"model": self.model, "input": list(texts)})
        try:
            vectors = [EmbeddingVector(item["embedding"]) for item in doc["data"]]
        except (KeyError, TypeError, ValidationError) as exc:
            raise self._shape_error("embedding", exc) from exc
        if len(vectors) != len(texts):
            raise self._shape_error("embedding", ValueError(
                f"{len(vectors)} vectors for {len(texts)} inputs"))
        dims = {v.dim for v in vectors}
        if self.dim is not None:
            dims.add(self.dim)
        if len(dims) != 1:
            raise self._shape_error("embedding", ValueError(f"inconsistent dims {sorted(dims)}"))
        self.dim = dims.pop()
        return vectors

    def embed(self, text: str) -> EmbeddingVector:
        return self.embed_many([text])[0]

    def embed_tokens(self, tokens: Sequence[str]) -> list:
        # tokens are embedded independently (no sentence context)
        return self.embed_many(list(tokens))


class HttpPairScorer(HttpClient):
    def _score(self, task: str, a: str, b: str) -> PairScore:
        doc = self.post({"model": self.model, "task": task, "pairs": [[a, b]]})
        try:
            item = doc["scores"][0]
            if task == "nsp":
                return PairScore(nsp_prob=float(item["nsp_prob"]))
            return PairScore(entail=float(item["entail"]), neutral=float(item["neutral"]),
                             contradict=float(item["contradict"]))
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise self._shape_error(task, exc) from exc

    def nsp(self, first: str, second: str) -> PairScore:
        return self._score("nsp", first, second)

    def nli(self, candidate: str, reference: str) -> PairScore:
        return self._score("nli", candidate, reference)
