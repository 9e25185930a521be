#!/usr/bin/env python3
"""
Ordered worker pool for per-document stages.

Results always come back in input (manifest) order, whatever the scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import psutil

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

MEMORY_LIMIT_PERCENT = 90


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or 1


def map_ordered(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply func to every item on a thread pool; a single worker when memory is above the limit."""
    items = list(items)
    if workers is None:
        workers = default_workers()
    workers = max(1, min(workers, len(items) or 1))

    if workers > 1:
        used = psutil.virtual_memory().percent
        if used > MEMORY_LIMIT_PERCENT:
            logger.warning("⚠️ Memory at %s%%, running %d items on one worker", used, len(items))
            workers = 1

    if workers == 1:
        return [func(item) for item in items]

    logger.debug("Dispatching %d items to %d workers", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # executor.map yields in submission order
        return list(pool.map(func, items))
