"""Worker-count cap and an order-preserving thread map."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested: int | None = None) -> int:
    """min(requested or cpu count, BEAD_ATLAS_THREADS) and at least 1."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("BEAD_ATLAS_THREADS", "").strip()
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ValueError(f"BEAD_ATLAS_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def pmap(fn, items, workers: int | None = None) -> list:
    """[fn(x) for x in items], run on a thread pool; results keep input order."""
    items = list(items)
    w = min(worker_count(workers), len(items))
    if w <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))
