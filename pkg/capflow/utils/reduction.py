import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from capflow.config import app_settings


def partition_bounds(count: int, partitions: int) -> list[tuple[int, int]]:
    """Split ``range(count)`` into contiguous, ordered, non-empty blocks."""
    partitions = max(1, min(partitions, count))
    edges = np.linspace(0, count, partitions + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def partitioned_fsum(
    term: Callable[[int], np.ndarray | float],
    count: int,
    partitions: int | None = None,
) -> float:
    """Sum ``term(i)`` over ``i < count`` with a fixed-order partitioned reduction.

    Each partition is reduced with ``math.fsum`` on its own worker and the
    partials are combined in partition order, so the result only depends on
    ``count`` and ``partitions``.
    """
    if count <= 0:
        return 0.0
    partitions = partitions or app_settings.partition_count

    def reduce_block(bounds: tuple[int, int]) -> float:
        lo, hi = bounds
        return math.fsum(
            math.fsum(np.ravel(term(i))) for i in range(lo, hi)
        )

    blocks = partition_bounds(count, partitions)
    if len(blocks) == 1:
        return reduce_block(blocks[0])
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        partials = list(pool.map(reduce_block, blocks))
    return math.fsum(partials)
