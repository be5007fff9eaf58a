"""Deterministic trial-level parallelism.

Workers only evaluate pure per-trial functions; results are gathered in
trial order and reduced sequentially, so outputs are identical for any
worker count. CIRCULAW_THREADS caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError


def thread_count() -> int:
    env = os.environ.get("CIRCULAW_THREADS")
    if env is not None:
        try:
            k = int(env)
        except ValueError as exc:
            raise ConfigError(f"CIRCULAW_THREADS must be an integer, got {env!r}") from exc
        if k < 1:
            raise ConfigError(f"CIRCULAW_THREADS must be >= 1, got {k}")
        return k
    return os.cpu_count() or 1


def parallel_map(fn, items):
    items = list(items)
    k = min(thread_count(), max(len(items), 1))
    if k == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
