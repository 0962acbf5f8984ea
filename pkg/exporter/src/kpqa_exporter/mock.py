"""Deterministic stand-ins for model inference.

Mock outputs are pure functions of their text inputs via SHA-256, so
integration tests get byte-identical files on every platform without
downloading a model.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stable_hash(*parts: str) -> int:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def mock_weight(sample_id: str, side: str, token: str) -> float:
    return (stable_hash(sample_id, side, token) % 1000) / 1000.0


def mock_vector(token: str, dim: int = 8) -> list[float]:
    """Unit-norm pseudo-random vector seeded by the token string alone, so the
    same token gets the same vector on either side of a sample."""
    rng = np.random.default_rng(stable_hash(token))
    vec = rng.standard_normal(dim)
    return (vec / np.linalg.norm(vec)).tolist()
