"""Deterministic chunked Monte Carlo reduction.

A run of ``samples`` draws is cut into fixed-size chunks; chunk ``c`` always
draws from ``rng.substream(c)`` and returns per-statistic sums. The chunk
partition depends only on ``samples`` and ``chunk_size``, and the partial
sums are added in chunk order, so results are bit-identical for any number
of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .channel import SeededRng

DEFAULT_CHUNK = 1 << 18
THREADS_ENV = "BICOOP_THREADS"

_default_threads = 1


def set_default_threads(n: int) -> None:
    global _default_threads
    _default_threads = resolve_threads(n)


def resolve_threads(n: int | None) -> int:
    """0 means one worker per CPU; None falls back to the module default."""
    if n is None:
        return _default_threads
    if n < 0:
        raise ValueError("thread count must be >= 0")
    return (os.cpu_count() or 1) if n == 0 else n


def chunk_sizes(samples: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def chunked_sums(
    kernel: Callable[[SeededRng, int], np.ndarray],
    samples: int,
    rng: SeededRng,
    chunk_size: int = DEFAULT_CHUNK,
    threads: int | None = None,
) -> np.ndarray:
    """Sum ``kernel(rng.substream(c), n_c)`` over all chunks, in chunk order."""
    sizes = chunk_sizes(samples, chunk_size)
    jobs = [(rng.substream(c), n) for c, n in enumerate(sizes)]
    workers = min(resolve_threads(threads), len(jobs))
    if workers <= 1:
        parts = [kernel(r, n) for r, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: kernel(*job), jobs))
    total = np.zeros_like(np.asarray(parts[0], dtype=float))
    for p in parts:
        total = total + p
    return total


def ordered_map(fn: Callable, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order preserved."""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def mean_and_stderr(total: float, total_sq: float, n: int) -> tuple[float, float]:
    mean = float(total) / n
    if n < 2:
        return mean, 0.0
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, float(np.sqrt(var / n))
