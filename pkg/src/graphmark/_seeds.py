"""Deterministic stream derivation from one master seed.

Every stochastic operation takes an explicit 64-bit seed and derives its own
stream with :func:`numpy_rng` or :func:`python_rng`, keyed by a path of
integers and tags.  Streams with different paths are independent, so trials
and rows can be generated in any order (or concurrently) without changing
results.
"""

from __future__ import annotations

import hashlib
import random

import numpy as np


def _path_entropy(master: int, path: tuple[int | str, ...]) -> list[int]:
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF]
    for part in path:
        if isinstance(part, str):
            digest = hashlib.sha256(part.encode("utf-8")).digest()
            entropy.append(int.from_bytes(digest[:8], "big"))
        else:
            entropy.append(int(part) & 0xFFFFFFFFFFFFFFFF)
    return entropy


def seed_sequence(master: int, *path: int | str) -> np.random.SeedSequence:
    return np.random.SeedSequence(_path_entropy(master, path))


def numpy_rng(master: int, *path: int | str) -> np.random.Generator:
    """Counter-based generator (Philox) for the given derivation path."""
    return np.random.Generator(np.random.Philox(seed_sequence(master, *path)))


def python_rng(master: int, *path: int | str) -> random.Random:
    """Stdlib generator for scalar-heavy sampling loops; same keying."""
    state = seed_sequence(master, *path).generate_state(2)
    return random.Random(int(state[0]) << 32 | int(state[1]) >> 32)
