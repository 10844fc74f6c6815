"""Process-based map helper honouring the ENVDIAG_THREADS cap."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from .errors import ParameterError

ENV_THREADS = "ENVDIAG_THREADS"


def worker_count() -> int:
    """Number of worker processes allowed by the environment (default 1)."""
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order.

    Runs serially unless ENVDIAG_THREADS > 1.  ``fn`` and the items must be
    picklable when workers are used; results are independent of the worker
    count because every item carries its own seed.
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (n * 8))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
