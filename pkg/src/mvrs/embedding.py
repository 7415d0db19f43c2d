"""The shared text/image embedding space behind a provider interface.

Two providers: a deterministic hash-seeded embedder (reproducible,
dependency-free, used for tests and desk-scale runs) and a client for a
remote encoder service that owns the real model weights.  Both yield
unit-norm vectors of one configured dimension, so cosine scores are well
defined across modalities.
"""

from __future__ import annotations

import base64
import struct
import threading
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import httpx
import numpy as np

from . import kernels
from .errors import NormalizationError, ProtocolError, ProviderUnavailableError
from .preprocess import GrayImage, as_gray_image, pgm_bytes

DETERMINISTIC = "deterministic-test"
REMOTE = "remote"

REMOTE_SHORT_SIDE = 480

_TWO64 = float(2**64)


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = 512
    provider: str = DETERMINISTIC
    remote_endpoint: Optional[str] = None
    timeout_ms: int = 5000
    max_retries: int = 2
    max_in_flight: int = 4

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.provider not in (DETERMINISTIC, REMOTE):
            raise ValueError(f"unknown provider {self.provider!r}")
        if (self.provider == REMOTE) != (self.remote_endpoint is not None):
            raise ValueError("remote_endpoint is required iff provider is remote")


def unit_normalize(values) -> np.ndarray:
    """Scale to unit L2 norm (float64); zero/non-finite norms are errors."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        raise NormalizationError(f"cannot normalize vector with norm {norm}")
    return v / norm


def _hash_vector(seed: int, dim: int) -> np.ndarray:
    raw = kernels.splitmix64_fill(seed, dim)
    values = (raw / _TWO64) * 2.0 - 1.0
    return unit_normalize(values)


def text_seed(text: str) -> int:
    return int(kernels.fnv1a64(text.encode("utf-8")))


def image_seed(img: GrayImage) -> int:
    h, w = img.shape
    return int(kernels.fnv1a64(struct.pack(">II", h, w) + img.tobytes()))


def embed_text(cfg: EmbedderConfig, text: str) -> np.ndarray:
    if not text.strip():
        raise ValueError("query text must be non-empty")
    if cfg.provider == DETERMINISTIC:
        return _hash_vector(text_seed(text), cfg.dim)
    return remote_embed(cfg, "text", [text])[0]


def embed_frame(cfg: EmbedderConfig, img: GrayImage) -> np.ndarray:
    img = as_gray_image(img)
    if cfg.provider == DETERMINISTIC:
        return _hash_vector(image_seed(img), cfg.dim)
    resized = resize_short_side(img, REMOTE_SHORT_SIDE)
    payload = base64.b64encode(pgm_bytes(resized)).decode("ascii")
    return remote_embed(cfg, "image", [payload])[0]


def resize_short_side(img: GrayImage, target: int) -> GrayImage:
    """Bilinear resize so the short side equals ``target`` exactly."""
    h, w = img.shape
    if min(h, w) == target:
        return img
    if h <= w:
        new_h, new_w = target, max(1, round(w * target / h))
    else:
        new_h, new_w = max(1, round(h * target / w)), target
    return _bilinear(img, new_h, new_w)


def _bilinear(img: GrayImage, new_h: int, new_w: int) -> GrayImage:
    h, w = img.shape
    rows = (np.arange(new_h) + 0.5) * (h / new_h) - 0.5
    cols = (np.arange(new_w) + 0.5) * (w / new_w) - 0.5
    r0 = np.clip(np.floor(rows).astype(int), 0, h - 1)
    c0 = np.clip(np.floor(cols).astype(int), 0, w - 1)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = np.clip(rows - r0, 0.0, 1.0)[:, None]
    fc = np.clip(cols - c0, 0.0, 1.0)[None, :]
    f = img.astype(np.float64)
    top = f[r0][:, c0] * (1 - fc) + f[r0][:, c1] * fc
    bottom = f[r1][:, c0] * (1 - fc) + f[r1][:, c1] * fc
    out = top * (1 - fr) + bottom * fr
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


_inflight_locks: dict[int, threading.Semaphore] = {}
_inflight_guard = threading.Lock()


def _in_flight_semaphore(cfg: EmbedderConfig) -> threading.Semaphore:
    key = cfg.max_in_flight
    with _inflight_guard:
        if key not in _inflight_locks:
            _inflight_locks[key] = threading.Semaphore(cfg.max_in_flight)
        return _inflight_locks[key]


def remote_embed(cfg: EmbedderConfig, kind: str, items: Sequence[str]) -> list[np.ndarray]:
    """POST one batch to {endpoint}/embed and normalize the returned vectors.

    Retries with exponential backoff on transport failure; any non-200
    status or a dimension mismatch is a hard error.
    """
    if cfg.provider != REMOTE:
        raise ValueError("remote_embed requires the remote provider")
    if kind not in ("text", "image"):
        raise ValueError(f"kind must be 'text' or 'image', got {kind!r}")

    url = cfg.remote_endpoint.rstrip("/") + "/embed"
    body = {"kind": kind, "items": list(items)}
    timeout = cfg.timeout_ms / 1000.0
    sem = _in_flight_semaphore(cfg)

    last_exc: Optional[Exception] = None
    response = None
    for attempt in range(cfg.max_retries + 1):
        try:
            with sem:
                response = httpx.post(url, json=body, timeout=timeout)
            break
        except httpx.HTTPError as exc:
            last_exc = exc
            if attempt < cfg.max_retries:
                time.sleep(0.05 * (2**attempt))
    if response is None:
        raise ProviderUnavailableError(
            f"embedding service unreachable after {cfg.max_retries + 1} attempts: {last_exc}"
        ) from last_exc
    if response.status_code != 200:
        raise ProviderUnavailableError(
            f"embedding service returned status {response.status_code}"
        )

    payload = response.json()
    if payload.get("dim") != cfg.dim:
        raise ProtocolError(
            f"embedding service dim {payload.get('dim')} != configured {cfg.dim}"
        )
    vectors = payload.get("vectors")
    if not isinstance(vectors, list) or len(vectors) != len(items):
        raise ProtocolError(
            f"embedding service returned {0 if vectors is None else len(vectors)} "
            f"vectors for {len(items)} items"
        )
    out = []
    for vec in vectors:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (cfg.dim,):
            raise ProtocolError(f"vector of shape {arr.shape} != ({cfg.dim},)")
        out.append(unit_normalize(arr))
    return out
