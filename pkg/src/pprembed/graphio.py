"""Compressed sparse row storage for undirected graphs with selective per-node reads.

On-disk layout (all integers little-endian):

    magic b"IECS" | version u8 = 1 | 3 zero bytes | n u64 | m2 u64
    offsets:   (n + 1) x u64
    adjacency: m2 x u64

Adjacency holds both directions of every edge, deduplicated and sorted
ascending within each node's slice; a self-loop appears once in its own
list and counts once toward the node's degree. A file-backed handle
answers ``degree``/``neighbors`` by reading only the two offsets and the
node's slice, so large graphs are never loaded wholesale.
"""

from __future__ import annotations

import os
import struct
import threading
from dataclasses import dataclass

import numpy as np

MAGIC = b"IECS"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sB3xQQ")
_OFFSET_PAIR = struct.Struct("<QQ")
_HEADER_SIZE = _HEADER.size  # 24 bytes

# Edge deduplication packs (u, v) into a single int64 key u*n + v.
MAX_NODE_COUNT = 2**31


class EdgeListError(ValueError):
    """Malformed edge-list text input."""


class BinaryFormatError(ValueError):
    """Bad magic, unsupported version, or truncated binary graph file."""


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph in CSR form.

    ``offsets`` has ``n + 1`` non-decreasing entries with ``offsets[0] == 0``
    and ``offsets[n] == m2``; ``adjacency[offsets[v]:offsets[v+1]]`` lists
    the neighbors of ``v`` in strictly increasing order.
    """

    offsets: np.ndarray
    adjacency: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_endpoint_count(self) -> int:
        """Sum of degrees; equals 2m for loop-free undirected graphs."""
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        self._check_node(v)
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self.adjacency[int(self.offsets[v]) : int(self.offsets[v + 1])]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def undirected_edges(self, include_loops: bool = False) -> np.ndarray:
        """Unique edges as a (k, 2) array of pairs with u <= v."""
        n = self.node_count
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees())
        dst = self.adjacency
        keep = src < dst if not include_loops else src <= dst
        return np.column_stack((src[keep], dst[keep]))

    def validate(self) -> None:
        """Raise ValueError if any CSR invariant is violated."""
        n = self.node_count
        if n < 0 or self.offsets[0] != 0:
            raise ValueError("offsets must start at 0")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be non-decreasing")
        if self.offsets[-1] != len(self.adjacency):
            raise ValueError("offsets[n] must equal the adjacency length")
        if len(self.adjacency) and (
            self.adjacency.min() < 0 or self.adjacency.max() >= n
        ):
            raise ValueError("adjacency entry out of range")
        for v in range(n):
            nbrs = self.neighbors(v)
            if np.any(np.diff(nbrs) <= 0):
                raise ValueError(f"neighbors of {v} not strictly increasing")
        # Symmetry: u in neighbors(v) iff v in neighbors(u).
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees())
        forward = set(zip(src.tolist(), self.adjacency.tolist()))
        for u, v in forward:
            if (v, u) not in forward:
                raise ValueError(f"missing reverse edge for ({u}, {v})")

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise IndexError(
                f"node {v} out of range for graph with {self.node_count} nodes"
            )

    @classmethod
    def from_edges(cls, edges: np.ndarray, node_count: int | None = None) -> "Graph":
        """Build a deduplicated undirected CSR graph from (u, v) pairs.

        Each pair contributes both directions; self-loops contribute a single
        entry. Node ids are taken literally (no compaction): when
        ``node_count`` is omitted it becomes ``max id + 1``.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and edges.min() < 0:
            raise ValueError("negative node id")
        if node_count is None:
            node_count = int(edges.max()) + 1 if edges.size else 0
        elif edges.size and edges.max() >= node_count:
            raise ValueError("edge endpoint exceeds node_count")
        if node_count >= MAX_NODE_COUNT:
            raise ValueError(f"node_count must be < {MAX_NODE_COUNT}")
        if not edges.size:
            return cls(np.zeros(node_count + 1, dtype=np.int64),
                       np.empty(0, dtype=np.int64))
        u, v = edges[:, 0], edges[:, 1]
        loop = u == v
        src = np.concatenate((u[~loop], v[~loop], u[loop]))
        dst = np.concatenate((v[~loop], u[~loop], u[loop]))
        keys = np.unique(src * node_count + dst)
        src = keys // node_count
        dst = keys % node_count
        counts = np.bincount(src, minlength=node_count)
        offsets = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(offsets, dst)


def load_edge_list(path: str | os.PathLike, directed_input: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into an undirected Graph.

    Lines starting with '#' or '%' are comments. Every pair is symmetrized
    and parallel edges are deduplicated, so ``directed_input`` only documents
    the source convention; both settings yield the same graph. An empty file
    yields the empty graph.
    """
    del directed_input
    pairs: list[tuple[int, int]] = []
    with open(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListError(
                    f"{path}:{lineno}: expected two node ids, got {text!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise EdgeListError(
                    f"{path}:{lineno}: non-integer node id in {text!r}"
                ) from exc
            if u < 0 or v < 0:
                raise EdgeListError(f"{path}:{lineno}: negative node id in {text!r}")
            pairs.append((u, v))
    edges = np.array(pairs, dtype=np.int64) if pairs else np.empty((0, 2), np.int64)
    return Graph.from_edges(edges)


def write_binary(graph: Graph, path: str | os.PathLike) -> None:
    """Write the binary CSR format; ``open_binary`` reads it back bit-exactly."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION,
                              graph.node_count, graph.edge_endpoint_count))
        fh.write(graph.offsets.astype("<u8").tobytes())
        fh.write(graph.adjacency.astype("<u8").tobytes())


class GraphHandle:
    """Immutable adjacency reader with touch statistics.

    Wraps either an in-memory :class:`Graph` or an open binary file. File
    queries read only the requested offsets pair and adjacency slice.
    ``nodes_touched`` counts distinct nodes whose adjacency slice was read
    (degree-only lookups update ``bytes_read`` but do not mark a touch);
    counters are updated under a lock so concurrent readers stay consistent.
    """

    def __init__(self, *, graph: Graph | None = None,
                 path: str | os.PathLike | None = None):
        if (graph is None) == (path is None):
            raise ValueError("exactly one of graph or path is required")
        self.path = os.fspath(path) if path is not None else None
        self._graph = graph
        self._fd: int | None = None
        self._degrees: np.ndarray | None = None
        if graph is not None:
            self._n = graph.node_count
            self._m2 = graph.edge_endpoint_count
            self._degrees = graph.degrees()
        else:
            self._fd = os.open(self.path, os.O_RDONLY)
            try:
                header = os.pread(self._fd, _HEADER_SIZE, 0)
                if len(header) < _HEADER_SIZE:
                    raise BinaryFormatError(f"{self.path}: truncated header")
                magic, version, n, m2 = _HEADER.unpack(header)
                if magic != MAGIC:
                    raise BinaryFormatError(f"{self.path}: bad magic {magic!r}")
                if version != FORMAT_VERSION:
                    raise BinaryFormatError(
                        f"{self.path}: unsupported version {version}"
                    )
                expected = _HEADER_SIZE + 8 * (n + 1) + 8 * m2
                actual = os.fstat(self._fd).st_size
                if actual != expected:
                    raise BinaryFormatError(
                        f"{self.path}: expected {expected} bytes, found {actual}"
                    )
            except Exception:
                os.close(self._fd)
                self._fd = None
                raise
            self._n = int(n)
            self._m2 = int(m2)
        self._adj_base = _HEADER_SIZE + 8 * (self._n + 1)
        self._lock = threading.Lock()
        self._touched: set[int] = set()
        self._bytes_read = 0

    @classmethod
    def open(cls, path: str | os.PathLike) -> "GraphHandle":
        return cls(path=path)

    @classmethod
    def in_memory(cls, graph: Graph) -> "GraphHandle":
        return cls(graph=graph)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_endpoint_count(self) -> int:
        return self._m2

    @property
    def nodes_touched(self) -> int:
        with self._lock:
            return len(self._touched)

    @property
    def bytes_read(self) -> int:
        with self._lock:
            return self._bytes_read

    def reset_stats(self) -> None:
        with self._lock:
            self._touched.clear()
            self._bytes_read = 0

    def degree(self, v: int) -> int:
        self._check_node(v)
        if self._degrees is not None:
            d = int(self._degrees[v])
            self._account(16, None)
            return d
        lo, hi = self._read_offsets(v)
        self._account(16, None)
        return hi - lo

    def neighbors(self, v: int) -> np.ndarray:
        """Ascending neighbor ids of ``v``; reads only v's slice from disk."""
        self._check_node(v)
        if self._graph is not None:
            nbrs = self._graph.neighbors(v)
            self._account(16 + 8 * len(nbrs), v)
            return nbrs
        lo, hi = self._read_offsets(v)
        raw = os.pread(self._fd, 8 * (hi - lo), self._adj_base + 8 * lo)
        if len(raw) != 8 * (hi - lo):
            raise BinaryFormatError(f"{self.path}: truncated adjacency read")
        nbrs = np.frombuffer(raw, dtype="<u8").astype(np.int64)
        self._account(16 + 8 * len(nbrs), v)
        return nbrs

    def load_graph(self) -> Graph:
        """Materialize the full graph (used by oracles and the eval harness)."""
        if self._graph is not None:
            return self._graph
        raw = os.pread(self._fd, 8 * (self._n + 1), _HEADER_SIZE)
        offsets = np.frombuffer(raw, dtype="<u8").astype(np.int64)
        raw = os.pread(self._fd, 8 * self._m2, self._adj_base)
        adjacency = np.frombuffer(raw, dtype="<u8").astype(np.int64)
        return Graph(offsets, adjacency)

    def close(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None

    def __enter__(self) -> "GraphHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    # Handles are shipped to worker processes by path (file-backed) or by
    # graph arrays (in-memory); statistics do not travel.
    def __getstate__(self):
        return {"path": self.path, "graph": self._graph}

    def __setstate__(self, state):
        if state["path"] is not None:
            self.__init__(path=state["path"])
        else:
            self.__init__(graph=state["graph"])

    def _read_offsets(self, v: int) -> tuple[int, int]:
        raw = os.pread(self._fd, 16, _HEADER_SIZE + 8 * v)
        if len(raw) != 16:
            raise BinaryFormatError(f"{self.path}: truncated offsets read")
        lo, hi = _OFFSET_PAIR.unpack(raw)
        return int(lo), int(hi)

    def _account(self, nbytes: int, touched: int | None) -> None:
        with self._lock:
            self._bytes_read += nbytes
            if touched is not None:
                self._touched.add(touched)

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self._n:
            raise IndexError(
                f"node {v} out of range for graph with {self._n} nodes"
            )


def open_binary(path: str | os.PathLike) -> GraphHandle:
    """Open a binary CSR file for selective reads."""
    return GraphHandle.open(path)


def read_binary(path: str | os.PathLike) -> Graph:
    """Load a binary CSR file fully into memory."""
    with GraphHandle.open(path) as handle:
        return handle.load_graph()
