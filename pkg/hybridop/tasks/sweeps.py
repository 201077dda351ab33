"""
Parallel grid sweeps.

Grid points are independent, so each one runs in a worker thread via
asyncio.to_thread; a semaphore bounds concurrency and asyncio.gather joins the
results in input order.
"""

import asyncio
import logging
import os
from typing import Callable, List, Optional, Sequence, TypeVar

from hybridop.core.config import get_settings

logger = logging.getLogger(__name__)

P = TypeVar("P")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else settings, else logical cores."""
    if workers is None:
        workers = get_settings().worker_threads
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def run_async(coro):
    """Run a coroutine on a private event loop from synchronous code."""
    loop = asyncio.new_event_loop()
    try:
        return loop.run_until_complete(coro)
    finally:
        loop.close()


async def _gather_grid(fn: Callable[[P], R], points: Sequence[P], workers: int) -> List[R]:
    semaphore = asyncio.Semaphore(workers)

    async def run_point(point: P) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, point)

    return list(await asyncio.gather(*(run_point(p) for p in points)))


def run_grid(fn: Callable[[P], R], points: Sequence[P], workers: Optional[int] = None) -> List[R]:
    """Evaluate fn at every point; results keep the order of ``points``."""
    points = list(points)
    workers = resolve_workers(workers)
    if workers <= 1 or len(points) <= 1:
        return [fn(p) for p in points]
    logger.debug("sweeping %d grid points on %d workers", len(points), workers)
    return run_async(_gather_grid(fn, points, workers))
