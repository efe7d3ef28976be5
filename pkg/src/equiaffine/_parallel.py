"""Ordered thread-pool map used by the estimators.

Kernels release the GIL, so threads give real parallelism; results are
reassembled in submission order so output never depends on worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_workers() -> int:
    env = os.environ.get("EQUIDIST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def ordered_map(fn, items, workers=None):
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]
