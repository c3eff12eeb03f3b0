"""Seeded random graph generators: Erdos-Renyi and a two-block planted partition.

Edges are drawn by geometric skip sampling over the flattened pair space,
so generation cost scales with the number of edges rather than the number
of candidate pairs; a million-node sparse graph takes seconds.
"""

from __future__ import annotations

import numpy as np


def _bernoulli_hits(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in [0, total) selected independently with probability p."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunks = []
    position = -1
    expected = max(int(total * p), 1)
    batch = max(1024, int(expected * 1.1) + 64)
    while position < total - 1:
        steps = rng.geometric(p, size=batch).astype(np.int64)
        hits = position + np.cumsum(steps)
        if hits[-1] >= total:
            hits = hits[hits < total]
            chunks.append(hits)
            break
        chunks.append(hits)
        position = int(hits[-1])
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def _pairs_from_triangle(hits: np.ndarray, n: int) -> np.ndarray:
    """Map flat upper-triangle indices (i < j over n nodes) to (i, j) pairs."""
    if len(hits) == 0:
        return np.empty((0, 2), dtype=np.int64)
    i_range = np.arange(n, dtype=np.int64)
    row_starts = i_range * (n - 1) - (i_range * (i_range - 1)) // 2
    i = np.searchsorted(row_starts, hits, side="right") - 1
    j = hits - row_starts[i] + i + 1
    return np.column_stack((i, j))


def erdos_renyi_edges(
    n: int,
    p: float | None = None,
    avg_degree: float | None = None,
    seed: int = 0,
) -> np.ndarray:
    """G(n, p) edges as (m, 2) pairs with u < v; no loops, no duplicates."""
    if (p is None) == (avg_degree is None):
        raise ValueError("specify exactly one of p or avg_degree")
    if p is None:
        p = avg_degree / (n - 1) if n > 1 else 0.0
    rng = np.random.default_rng(seed)
    total = n * (n - 1) // 2
    return _pairs_from_triangle(_bernoulli_hits(total, p, rng), n)


def two_block_sbm(
    n: int,
    p_in: float,
    p_out: float,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Two equal blocks; returns (edges, block labels).

    Within-block pairs appear with probability ``p_in``, cross-block pairs
    with ``p_out``. Labels are 0 for the first block and 1 for the second.
    """
    rng = np.random.default_rng(seed)
    n1 = n // 2
    n2 = n - n1

    within_a = _pairs_from_triangle(
        _bernoulli_hits(n1 * (n1 - 1) // 2, p_in, rng), n1
    )
    within_b = _pairs_from_triangle(
        _bernoulli_hits(n2 * (n2 - 1) // 2, p_in, rng), n2
    ) + n1
    cross_hits = _bernoulli_hits(n1 * n2, p_out, rng)
    cross = np.column_stack((cross_hits // n2, n1 + cross_hits % n2))

    edges = np.vstack((within_a, within_b, cross))
    labels = np.concatenate(
        (np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64))
    )
    return edges, labels
