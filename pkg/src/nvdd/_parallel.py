"""Ordered parallel map over independent scan points."""

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, threads=1):
    """``[fn(x) for x in items]``, optionally on a thread pool; output order matches input."""
    items = list(items)
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
