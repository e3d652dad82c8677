"""Thread-count control for internal batch work.

The environment variable BLC_THREADS caps the number of worker threads used
by batched per-block computations. Default is 1 (serial); reductions are
always performed in a fixed order so results do not depend on the setting.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("BLC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map fn over items, possibly in parallel, preserving input order."""
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
