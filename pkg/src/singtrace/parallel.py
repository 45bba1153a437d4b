"""Optional thread-pool mapping, capped by SINGTRACE_THREADS.

Everything in this package is pure, so parallel evaluation is safe; the
default stays serial and results are always assembled in input order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_budget() -> int:
    raw = os.environ.get("SINGTRACE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    items = list(items)
    workers = min(thread_budget(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
