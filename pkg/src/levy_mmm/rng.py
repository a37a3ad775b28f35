"""Deterministic random streams and an order-preserving parallel map.

Replicate ``k`` of an operation labelled ``label`` always draws from the
stream keyed by ``(master_seed, crc32(label), k)``, so results do not depend on
how replicates are distributed over workers.
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

WORKERS_ENV = "LEVY_MMM_WORKERS"
CHUNK = 256


def label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, *index: int) -> np.random.Generator:
    """Generator for the sub-stream ``(seed, label, *index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(label_code(label), *map(int, index)))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_workers(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def _run_chunk(args):
    fn, start, stop = args
    return [fn(k) for k in range(start, stop)]


def parallel_map(fn: Callable[[int], object], n: int, workers: Optional[int] = None) -> list:
    """``[fn(k) for k in range(n)]``, optionally spread over processes.

    Chunk boundaries are fixed (independent of ``workers``) and results are
    concatenated in index order.
    """
    workers = resolve_workers(workers)
    chunks = [(fn, s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if workers == 1 or len(chunks) <= 1:
        out = []
        for c in chunks:
            out.extend(_run_chunk(c))
        return out
    with ProcessPoolExecutor(max_workers=workers) as ex:
        out = []
        for part in ex.map(_run_chunk, chunks):
            out.extend(part)
    return out


def compensated_mean_se(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error using exactly rounded sums."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no values")
    mean = math.fsum(x.tolist()) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum(((x - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)
