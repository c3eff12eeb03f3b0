"""Node embeddings from hashed, log-scaled sparse PPR vectors.

The per-node pipeline is: run the residual push for the source, rescale
each mass ``r`` to ``max(ln(r * n), 0)`` (natural log; masses at or below
the uniform level 1/n contribute nothing) and accumulate the values into
``dim`` buckets with the signed hash projection. The whole-graph path runs
exactly this pipeline once per node, so a row of the matrix is bitwise
identical to the single-node result, for any worker count.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graphio import GraphHandle
from .hashing import DEFAULT_SEED, HashSeeds, project_sorted
from .ppr import DEFAULT_ALPHA, DEFAULT_EPSILON, PushStats, approximate_ppr

DEFAULT_DIM = 512

TEXT_HEADER_PREFIX = "#IE v1"
_BINARY_PREAMBLE_SIZE = 256


@dataclass(frozen=True)
class EmbedConfig:
    """Embedding parameters: decay, push precision, dimension, hash seeds."""

    alpha: float
    epsilon: float
    dim: int
    seeds: HashSeeds

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.dim != self.seeds.dim:
            raise ValueError("dim does not match seeds.dim")

    @classmethod
    def create(
        cls,
        alpha: float = DEFAULT_ALPHA,
        epsilon: float = DEFAULT_EPSILON,
        dim: int = DEFAULT_DIM,
        master_seed: int = DEFAULT_SEED,
    ) -> "EmbedConfig":
        return cls(alpha=alpha, epsilon=epsilon, dim=dim,
                   seeds=HashSeeds.derive(master_seed, dim))

    @property
    def master_seed(self) -> int:
        return self.seeds.master_seed


@dataclass
class EmbeddingVector:
    node: int
    values: np.ndarray


@dataclass
class EmbeddingMatrix:
    """Embeddings for all nodes in id order, plus the producing config."""

    values: np.ndarray
    alpha: float
    epsilon: float
    dim: int
    master_seed: int

    @property
    def node_count(self) -> int:
        return self.values.shape[0]

    def row(self, v: int) -> np.ndarray:
        return self.values[v]


def transform_mass(mass: float, node_count: int) -> float:
    """max(ln(mass * node_count), 0); zero mass clamps to 0.

    Uses the scalar libm log. The vectorized ``np.log`` rounds differently
    in the last ulp on some inputs, so every path that feeds the projection
    goes through this function to keep embeddings bit-stable.
    """
    if mass < 0.0:
        raise ValueError("mass must be non-negative")
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    scaled = mass * node_count
    return math.log(scaled) if scaled > 1.0 else 0.0


def embed_node_with_stats(
    handle: GraphHandle, node: int, config: EmbedConfig
) -> tuple[EmbeddingVector, PushStats]:
    """Single-node embedding plus the push instrumentation counters."""
    ppr, stats = approximate_ppr(handle, node, config.alpha, config.epsilon)
    ids, masses = ppr.as_arrays()
    n = handle.node_count
    scaled = np.fromiter(
        (transform_mass(m, n) for m in masses.tolist()),
        dtype=np.float64,
        count=len(masses),
    )
    values = project_sorted(ids, scaled, config.seeds)
    return EmbeddingVector(node=node, values=values), stats


def embed_node(handle: GraphHandle, node: int, config: EmbedConfig) -> EmbeddingVector:
    """Embed one node using only its local neighborhood."""
    vector, _ = embed_node_with_stats(handle, node, config)
    return vector


# Worker state for parallel whole-graph embedding. Handles are re-opened
# per process via pickling (file-backed handles reopen by path).
_worker_handle: GraphHandle | None = None
_worker_config: EmbedConfig | None = None


def _init_worker(handle: GraphHandle, config: EmbedConfig) -> None:
    global _worker_handle, _worker_config
    _worker_handle = handle
    _worker_config = config


def _embed_range(bounds: tuple[int, int]) -> tuple[int, np.ndarray]:
    lo, hi = bounds
    block = np.empty((hi - lo, _worker_config.dim), dtype=np.float64)
    for v in range(lo, hi):
        try:
            block[v - lo] = embed_node(_worker_handle, v, _worker_config).values
        except Exception as exc:
            raise RuntimeError(f"embedding failed for node {v}") from exc
    return lo, block


def embed_graph(
    handle: GraphHandle, config: EmbedConfig, workers: int = 1
) -> EmbeddingMatrix:
    """Embed every node; rows are assembled in node-id order.

    Each row is an independent pure computation, so the result does not
    depend on ``workers``.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = handle.node_count
    values = np.zeros((n, config.dim), dtype=np.float64)
    if n == 0:
        return EmbeddingMatrix(values, config.alpha, config.epsilon,
                               config.dim, config.master_seed)
    if workers == 1 or n < 2 * workers:
        for v in range(n):
            try:
                values[v] = embed_node(handle, v, config).values
            except Exception as exc:
                raise RuntimeError(f"embedding failed for node {v}") from exc
    else:
        chunk = max(1, -(-n // (workers * 4)))
        bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        ctx = mp.get_context("fork" if os.name == "posix" else None)
        with ProcessPoolExecutor(
            max_workers=workers,
            mp_context=ctx,
            initializer=_init_worker,
            initargs=(handle, config),
        ) as pool:
            for lo, block in pool.map(_embed_range, bounds):
                values[lo : lo + block.shape[0]] = block
    return EmbeddingMatrix(values, config.alpha, config.epsilon,
                           config.dim, config.master_seed)


def embedding_header(node_count: int, config: EmbedConfig) -> str:
    return (
        f"{TEXT_HEADER_PREFIX} n={node_count} d={config.dim} "
        f"alpha={config.alpha!r} epsilon={config.epsilon!r} "
        f"seed={config.master_seed} log=nat"
    )


def write_embeddings_text(
    path: str | os.PathLike,
    node_ids: np.ndarray,
    rows: np.ndarray,
    node_count: int,
    config: EmbedConfig,
) -> None:
    """One header line, then one "<node_id> <v_0> ... <v_{d-1}>" line per node.

    Values use the shortest decimal representation that round-trips to the
    same float64.
    """
    with open(path, "wt", encoding="utf-8") as fh:
        fh.write(embedding_header(node_count, config) + "\n")
        for node, row in zip(node_ids, rows):
            fh.write(f"{int(node)} " + " ".join(repr(float(x)) for x in row) + "\n")


def read_embeddings_text(path: str | os.PathLike) -> tuple[dict, np.ndarray, np.ndarray]:
    """Return (header fields, node ids, rows) from the text format."""
    with open(path, "rt", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(TEXT_HEADER_PREFIX):
            raise ValueError(f"{path}: missing embedding header")
        fields = dict(part.split("=", 1) for part in header.split()[2:])
        ids = []
        rows = []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            ids.append(int(parts[0]))
            rows.append([float(x) for x in parts[1:]])
    return fields, np.array(ids, dtype=np.int64), np.array(rows, dtype=np.float64)


def write_embeddings_binary(path: str | os.PathLike, matrix: EmbeddingMatrix) -> None:
    """Fixed 256-byte preamble holding the text header, then n*d little-endian f64.

    The binary layout carries no per-row ids, so it stores full matrices
    only; row index equals node id.
    """
    config = EmbedConfig.create(matrix.alpha, matrix.epsilon, matrix.dim,
                                matrix.master_seed)
    header = embedding_header(matrix.node_count, config).encode("utf-8")
    if len(header) >= _BINARY_PREAMBLE_SIZE:
        raise ValueError("embedding header does not fit the fixed preamble")
    with open(path, "wb") as fh:
        fh.write(header.ljust(_BINARY_PREAMBLE_SIZE, b"\0"))
        fh.write(matrix.values.astype("<f8").tobytes())


def read_embeddings_binary(path: str | os.PathLike) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        preamble = fh.read(_BINARY_PREAMBLE_SIZE)
        if len(preamble) != _BINARY_PREAMBLE_SIZE:
            raise ValueError(f"{path}: truncated embedding preamble")
        header = preamble.rstrip(b"\0").decode("utf-8")
        if not header.startswith(TEXT_HEADER_PREFIX):
            raise ValueError(f"{path}: missing embedding header")
        fields = dict(part.split("=", 1) for part in header.split()[2:])
        n = int(fields["n"])
        dim = int(fields["d"])
        raw = fh.read(8 * n * dim)
        if len(raw) != 8 * n * dim:
            raise ValueError(f"{path}: truncated embedding payload")
        values = np.frombuffer(raw, dtype="<f8").reshape(n, dim).copy()
    return EmbeddingMatrix(
        values=values,
        alpha=float(fields["alpha"]),
        epsilon=float(fields["epsilon"]),
        dim=dim,
        master_seed=int(fields["seed"]),
    )
