"""
Deterministic random streams.

Every random draw in SigScale comes from a numpy ``Generator`` whose seed is
derived by hashing the run seed together with a tuple of keys (sample size,
effect size, trial index, test name, chunk index ...). A stream therefore
depends only on its keys, never on scheduling, so parallel and sequential
execution produce identical numbers.
"""
import hashlib
from typing import Union

import numpy as np

Key = Union[int, float, str]


def _encode(key: Key) -> str:
    if isinstance(key, float):
        return f"f{key!r}"
    return f"{type(key).__name__[0]}{key}"


def derive_seed(base_seed: int, *keys: Key) -> int:
    """Stable 64-bit seed for the stream named by ``keys``."""
    text = ":".join([str(int(base_seed))] + [_encode(key) for key in keys])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def stream(base_seed: int, *keys: Key) -> np.random.Generator:
    """Independent generator for the stream named by ``keys``."""
    return np.random.default_rng(derive_seed(base_seed, *keys))


def open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws strictly inside (0, 1)."""
    return (rng.integers(0, 2 ** 53, size=size, dtype=np.int64) + 0.5) / float(2 ** 53)


def as_generator(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    """Accept either a seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit seed or generator is required")
    return np.random.default_rng(int(seed))
