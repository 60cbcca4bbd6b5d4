"""Thread-pool helper honouring the BANDTOP_THREADS cap."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker count from ``BANDTOP_THREADS`` (default: min(4, cpu count))."""
    raw = os.environ.get("BANDTOP_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"BANDTOP_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return max(1, min(4, os.cpu_count() or 1))


def pmap(fn, items) -> list:
    """Order-preserving map, threaded when more than one worker is allowed."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
