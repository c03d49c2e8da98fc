"""Replicate fan-out across worker processes.

Replicates are cut into contiguous index ranges; each range is simulated
with per-replicate streams, so the concatenated result does not depend on
the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    edges = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def _call(job):
    fn, args, start, stop = job
    return fn(*args, start, stop)


def run_chunks(fn, args: tuple, replicates: int, workers: int = 1) -> np.ndarray:
    """Concatenate ``fn(*args, start, stop)`` over a split of range(replicates)."""
    jobs = [(fn, args, a, b) for a, b in _split(replicates, workers)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(len(jobs)) as pool:
            parts = list(pool.map(_call, jobs))
    else:
        parts = [_call(job) for job in jobs]
    return np.concatenate(parts)
