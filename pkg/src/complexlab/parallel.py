"""Fixed-order chunked evaluation.

Work is cut into chunks whose boundaries do not depend on the worker count;
results are combined in chunk-index order, so sums are bit-identical for any
number of workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


def ordered_map(fn: Callable[[int], T], n_chunks: int, workers: int = 1) -> list[T]:
    if workers <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def chunk_bounds(total: int, chunk: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def ordered_sum(values: Sequence):
    acc = values[0] * 0
    for v in values:
        acc = acc + v
    return acc
