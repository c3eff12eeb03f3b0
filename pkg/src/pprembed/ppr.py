"""Epsilon-approximate personalized PageRank via residual pushing.

``approximate_ppr`` runs the local push procedure for the standard
(non-lazy) walk: it keeps a sparse estimate ``p`` and residual ``r``
(initially the indicator of the source) and, while any node ``u`` holds
``r[u] >= epsilon * deg(u)``, settles ``alpha * r[u]`` into ``p[u]`` and
spreads the remaining ``(1 - alpha) * r[u]`` evenly over the neighbors.
The work order is a FIFO queue with each node enqueued at most once while
over threshold, so identical inputs give bit-identical output.

``exact_ppr`` is the independent dense power-iteration oracle used by the
test suite; it shares no code with the push.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graphio import GraphHandle

DEFAULT_ALPHA = 0.15
DEFAULT_EPSILON = 1e-5

_MAX_POWER_ITERATIONS = 10**6


@dataclass
class PushStats:
    """Instrumentation counters from one push run.

    ``peak_state_bytes`` is the logical working-set peak: 16 bytes per map
    entry (estimate, residual, degree cache), 8 per cached adjacency id and
    8 per queue slot. It deliberately excludes interpreter overhead so the
    number reflects what the locality theory bounds, not allocator details.
    """

    push_count: int
    nodes_touched: int
    support_volume: int
    peak_state_bytes: int


@dataclass
class SparsePprVector:
    """Sparse epsilon-approximate PPR estimate for one source node.

    ``entries`` maps node id to strictly positive mass, in ascending id
    order; masses sum to at most 1.
    """

    source: int
    alpha: float
    epsilon: float
    entries: dict[int, float]

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ids = np.fromiter(self.entries.keys(), dtype=np.int64, count=len(self.entries))
        masses = np.fromiter(self.entries.values(), dtype=np.float64,
                             count=len(self.entries))
        return ids, masses

    @property
    def mass_sum(self) -> float:
        return math.fsum(self.entries.values())


def _validate_params(alpha: float, epsilon: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")


def approximate_ppr(
    handle: GraphHandle,
    source: int,
    alpha: float = DEFAULT_ALPHA,
    epsilon: float = DEFAULT_EPSILON,
    check_conservation: bool = False,
) -> tuple[SparsePprVector, PushStats]:
    """Push until every residual is below its degree-scaled threshold.

    A degree-zero source is absorbing: its residual converts entirely to
    estimate, which keeps estimate + residual mass at exactly 1. Self-loops
    count once in the degree and receive residual like any neighbor.
    ``check_conservation`` re-sums both maps after every push (debug only).
    """
    _validate_params(alpha, epsilon)
    if not 0 <= source < handle.node_count:
        raise IndexError(
            f"node {source} out of range for graph with {handle.node_count} nodes"
        )

    estimate: dict[int, float] = {}
    residual: dict[int, float] = {source: 1.0}
    deg_cache: dict[int, int] = {}
    adj_cache: dict[int, list[int]] = {}
    adj_entries = 0
    queue: deque[int] = deque()
    queued: set[int] = set()

    source_deg = handle.degree(source)
    deg_cache[source] = source_deg
    if 1.0 >= epsilon * source_deg:
        queue.append(source)
        queued.add(source)

    pushes = 0
    spread = 1.0 - alpha
    peak_bytes = 0
    res_get = residual.get
    est_get = estimate.get
    deg_get = deg_cache.get

    while queue:
        u = queue.popleft()
        queued.discard(u)
        mass = residual.pop(u)
        du = deg_cache[u]
        pushes += 1
        if du == 0:
            estimate[u] = est_get(u, 0.0) + mass
        else:
            estimate[u] = est_get(u, 0.0) + alpha * mass
            share = spread * mass / du
            nbrs = adj_cache.get(u)
            if nbrs is None:
                nbrs = handle.neighbors(u).tolist()
                adj_cache[u] = nbrs
                adj_entries += du
            for w in nbrs:
                rw = res_get(w, 0.0) + share
                residual[w] = rw
                if w not in queued:
                    dw = deg_get(w)
                    if dw is None:
                        dw = handle.degree(w)
                        deg_cache[w] = dw
                    if rw >= epsilon * dw:
                        queue.append(w)
                        queued.add(w)
        state = (
            16 * (len(estimate) + len(residual) + len(deg_cache))
            + 8 * adj_entries
            + 8 * len(queue)
        )
        if state > peak_bytes:
            peak_bytes = state
        if check_conservation:
            total = math.fsum(estimate.values()) + math.fsum(residual.values())
            if abs(total - 1.0) > 1e-9:
                raise AssertionError(f"mass leak: estimate + residual = {total}")

    vector = SparsePprVector(
        source=source,
        alpha=alpha,
        epsilon=epsilon,
        entries={k: estimate[k] for k in sorted(estimate)},
    )
    stats = PushStats(
        push_count=pushes,
        nodes_touched=len(adj_cache),
        support_volume=sum(deg_cache[u] for u in estimate),
        peak_state_bytes=peak_bytes,
    )
    return vector, stats


def exact_ppr(
    handle: GraphHandle,
    source: int,
    alpha: float = DEFAULT_ALPHA,
    tol: float = 1e-12,
) -> np.ndarray:
    """Dense PPR by iterating the restart fixed point; testing oracle.

    Iterates pi <- alpha * e_source + (1 - alpha) * pi P from pi = e_source
    until the successive-iterate L1 change falls below ``tol``. P is the
    degree-normalized adjacency; a degree-zero row keeps its mass in place,
    matching the absorbing treatment in the push.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    graph = handle.load_graph()
    n = graph.node_count
    if not 0 <= source < n:
        raise IndexError(f"node {source} out of range for graph with {n} nodes")
    degrees = graph.degrees().astype(np.float64)
    dangling = degrees == 0
    safe_deg = np.where(dangling, 1.0, degrees)
    src = np.repeat(np.arange(n, dtype=np.int64), graph.degrees())
    dst = graph.adjacency

    pi = np.zeros(n, dtype=np.float64)
    pi[source] = 1.0
    for _ in range(_MAX_POWER_ITERATIONS):
        contrib = (1.0 - alpha) * pi / safe_deg
        nxt = np.zeros(n, dtype=np.float64)
        nxt[source] = alpha
        np.add.at(nxt, dst, contrib[src])
        nxt[dangling] += (1.0 - alpha) * pi[dangling]
        change = np.abs(nxt - pi).sum()
        pi = nxt
        if change < tol:
            return pi
    raise RuntimeError(
        f"power iteration did not converge within {_MAX_POWER_ITERATIONS} iterations"
    )
