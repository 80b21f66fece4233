"""Order-preserving map honouring the QFI_WORKBENCH_THREADS cap."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("QFI_WORKBENCH_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn, items, threads=None):
    """``[fn(x) for x in items]``, possibly on a thread pool; output order follows ``items``."""
    items = list(items)
    threads = thread_count() if threads is None else max(1, threads)
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
