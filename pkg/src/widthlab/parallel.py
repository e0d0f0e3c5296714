"""Optional thread parallelism, capped by the WIDTHLAB_THREADS variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker cap from WIDTHLAB_THREADS; defaults to 1 (serial)."""
    raw = os.environ.get("WIDTHLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map fn over items, preserving order.

    Work items must be independent and fn deterministic; results are
    merged in input order, so the output does not depend on the worker
    count.
    """
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
