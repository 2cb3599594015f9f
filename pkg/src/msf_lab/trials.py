"""Trial scheduling and summary statistics.

Trials are independent and addressed by index; a worker pool only changes
where a trial runs, never what it computes.  Results come back in trial order.
"""
from __future__ import annotations

import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

WORKERS_ENV = "MSF_LAB_WORKERS"


@dataclass(frozen=True)
class Stats:
    mean: float
    stderr: float
    count: int
    single: bool = False


def statistics(values: Sequence[float]) -> Stats:
    """Sample mean and standard error (sample std / sqrt(count))."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("statistics of an empty sample")
    mean = float(arr.sum() / arr.size)
    if arr.size == 1:
        return Stats(mean, 0.0, 1, single=True)
    var = float(((arr - mean) ** 2).sum() / (arr.size - 1))
    return Stats(mean, math.sqrt(var / arr.size), int(arr.size))


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, int(workers))


_TASK: Optional[Callable] = None


def _run_block(block):
    return [_TASK(t) for t in block]


def run_trials(task: Callable[[int], object], trials: int, workers: Optional[int] = None) -> list:
    """``[task(0), ..., task(trials-1)]``, optionally spread over forked worker processes."""
    global _TASK
    workers = resolve_workers(workers)
    if workers == 1 or trials < 2:
        return [task(t) for t in range(trials)]
    n_blocks = min(trials, 4 * workers)
    blocks = [list(b) for b in np.array_split(np.arange(trials), n_blocks)]
    _TASK = task
    try:
        with ProcessPoolExecutor(max_workers=workers, mp_context=mp.get_context("fork")) as pool:
            out = []
            for part in pool.map(_run_block, blocks):
                out.extend(part)
    finally:
        _TASK = None
    return out
