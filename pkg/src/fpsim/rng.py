"""Counter-derived random streams and an order-preserving worker pool."""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

from fpsim.errors import InvalidParameterError

T = TypeVar("T")
R = TypeVar("R")

StreamKey = int | str | float


def stream_key(value: StreamKey) -> int:
    """Map a stream label to a non-negative 32-bit integer.

    Non-negative ints are used as-is; anything else is hashed from its
    string form so labels like sweep values give stable streams.
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool) and value >= 0:
        return int(value)
    digest = hashlib.sha256(str(value).encode()).hexdigest()
    return int(digest[:8], 16)


def derive_rng(master_seed: int, *keys: StreamKey) -> np.random.Generator:
    """Independent generator for the stream identified by ``keys``."""
    seq = np.random.SeedSequence(entropy=stream_key(master_seed), spawn_key=tuple(stream_key(k) for k in keys))
    return np.random.default_rng(seq)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` to every item, results in input order."""
    if threads < 1:
        raise InvalidParameterError(f"threads must be >= 1, got {threads}")
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    """Split ``total`` into fixed-size chunks, last one possibly shorter."""
    return [min(chunk, total - start) for start in range(0, total, chunk)]
