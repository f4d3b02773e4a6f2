"""Deterministic compensated reductions.

Row sums are accumulated along a fixed pairwise tree of Knuth's TwoSum
steps, so each row carries its own rounding error term. Rows are then merged with ``math.fsum``
in ascending order. The result does not depend on how rows are partitioned
across workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def two_sum(a, b):
    """Error-free transformation: ``a + b == s + e`` exactly."""
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


def compensated_row_sums(matrix):
    """Return ``(sums, errors)`` for every row of a 2-D array.

    Columns are combined in a fixed pairwise tree of TwoSum steps; the
    rounding errors of every step are collected in ``errors``. The pair is
    what gets merged downstream.
    """
    s = np.array(matrix, dtype=float, copy=True)
    if s.ndim != 2:
        raise ValueError("expected a 2-D array")
    c = np.zeros(s.shape[0])
    if s.shape[1] == 0:
        return c.copy(), c
    while s.shape[1] > 1:
        if s.shape[1] % 2:
            s = np.concatenate([s, np.zeros((s.shape[0], 1))], axis=1)
        s, e = two_sum(s[:, 0::2], s[:, 1::2])
        c += e.sum(axis=1)
    return s[:, 0].copy(), c


def merge(parts):
    """Exactly-rounded merge of ``(sums, errors)`` pairs in the given order."""
    terms = []
    for s, c in parts:
        terms.extend(np.asarray(s, dtype=float).tolist())
        terms.extend(np.asarray(c, dtype=float).tolist())
    return math.fsum(terms)


def stable_sum(values):
    """Deterministic compensated sum of an arbitrary array."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        return float(values)
    if values.ndim == 1:
        return math.fsum(values.tolist())
    return merge([compensated_row_sums(values.reshape(values.shape[0], -1))])


def blocked_sum(row_fn, n_rows, block=256, threads=1):
    """Sum ``row_fn(start, stop)`` matrices over row blocks.

    ``row_fn`` must return a 2-D array with ``stop - start`` rows. Blocks may
    run in a thread pool; merging is always in ascending block order.
    """
    starts = list(range(0, n_rows, block))

    def work(start):
        return compensated_row_sums(row_fn(start, min(start + block, n_rows)))

    if threads and threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return merge(parts)
