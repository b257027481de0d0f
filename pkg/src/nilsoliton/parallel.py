"""Thread-pool helper honoring the NILSOLITON_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "parallel_map"]


def thread_count() -> int:
    """Worker count: NILSOLITON_THREADS if set, else min(cpu, 4)."""
    raw = os.environ.get("NILSOLITON_THREADS")
    if raw is not None:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"NILSOLITON_THREADS must be an integer, "
                             f"got {raw!r}") from exc
        if n < 1:
            raise ValueError(f"NILSOLITON_THREADS must be >= 1, got {n}")
        return n
    return min(os.cpu_count() or 1, 4)


def parallel_map(fn, items) -> list:
    """Map preserving order; serial when one worker is requested.

    Workers are threads: the compiled kernels release the GIL, the numpy
    fallback mostly does, so this scales for flow scans without the
    pickling constraints of processes.
    """
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
