"""Deterministic fan-out of independent jobs (replicas, sweep cells)."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

ENV_THREADS = "COPOLY_THREADS"


def worker_count(n_jobs: Optional[int] = None) -> int:
    """Resolve the worker cap; ``COPOLY_THREADS`` applies when ``n_jobs`` is None, 0 means auto."""
    if n_jobs is None:
        raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
        try:
            n_jobs = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if n_jobs < 0:
        raise ValueError("worker count must be >= 0")
    return n_jobs or (os.cpu_count() or 1)


def map_ordered(fn: Callable, items: Iterable, n_jobs: Optional[int] = None) -> List:
    """``[fn(x) for x in items]``, possibly threaded; results keep input order.

    The compiled kernels release the GIL, so threads give real parallelism.
    """
    items = list(items)
    workers = min(worker_count(n_jobs), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
