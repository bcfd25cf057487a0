"""Bounded worker-thread mapping controlled by SWARMSEL_THREADS (0 or unset = auto)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_AUTO_CAP = 8


def thread_count() -> int:
    raw = os.environ.get("SWARMSEL_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SWARMSEL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("SWARMSEL_THREADS must be >= 0")
    if n == 0:
        return min(os.cpu_count() or 1, _AUTO_CAP)
    return n


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map over pure work items; results equal the serial map."""
    seq: Sequence[T] = list(items)
    workers = thread_count()
    if workers <= 1 or len(seq) <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
