"""Global bucket and sign hashes with O(1) stored state, and the signed projection.

Both hash functions are keyed by 64-bit seeds expanded deterministically
from one master seed, so the full mapping ``key -> (bucket, sign)`` is a
pure function of ``(master_seed, dim)`` and persisted embeddings stay
comparable across processes and machines. The bit mixer is the splitmix64
finalizer; buckets come from Lemire's multiply-shift range reduction, so
no stored state grows with the id space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_C1 = 0xBF58476D1CE4E5B9
_MIX_C2 = 0x94D049BB133111EB

DEFAULT_SEED = 42


def mix64(x: int) -> int:
    """splitmix64 finalizer: bijective 64-bit mix with strong diffusion."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX_C1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX_C2) & _MASK64
    return x ^ (x >> 31)


def _mix64_array(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX_C1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX_C2)
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class HashSeeds:
    """Constant-size state realizing the bucket hash and the sign hash.

    ``seed_d`` and ``seed_sgn`` are fixed expansions of ``master_seed``:
    two instances with equal master seed and dim are interchangeable.
    """

    master_seed: int
    dim: int
    seed_d: int
    seed_sgn: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.seed_d != mix64(self.master_seed) or self.seed_sgn != mix64(
            self.master_seed + _GOLDEN
        ):
            raise ValueError("derived seeds do not match master_seed")

    @classmethod
    def derive(cls, master_seed: int, dim: int) -> "HashSeeds":
        return cls(
            master_seed=master_seed,
            dim=dim,
            seed_d=mix64(master_seed),
            seed_sgn=mix64(master_seed + _GOLDEN),
        )


def hash_dim(key: int, seeds: HashSeeds) -> int:
    """Bucket of ``key`` in [0, dim): high 64 bits of mix64(key ^ seed_d) * dim."""
    z = mix64(key ^ seeds.seed_d)
    return (z * seeds.dim) >> 64


def hash_sign(key: int, seeds: HashSeeds) -> int:
    """-1 or +1 from bit 63 of mix64(key ^ seed_sgn)."""
    z = mix64(key ^ seeds.seed_sgn)
    return -1 if z >> 63 else 1


def hash_dim_array(keys: np.ndarray, seeds: HashSeeds) -> np.ndarray:
    """Vectorized ``hash_dim``; bit-identical to the scalar form."""
    z = _mix64_array(np.asarray(keys).astype(np.uint64) ^ np.uint64(seeds.seed_d))
    # High 64 bits of z * dim via 32-bit limbs (dim < 2**32 keeps limbs exact).
    d = np.uint64(seeds.dim)
    hi = z >> np.uint64(32)
    lo = z & np.uint64(0xFFFFFFFF)
    high = (hi * d + ((lo * d) >> np.uint64(32))) >> np.uint64(32)
    return high.astype(np.int64)


def hash_sign_array(keys: np.ndarray, seeds: HashSeeds) -> np.ndarray:
    """Vectorized ``hash_sign`` returning float64 in {-1.0, +1.0}."""
    z = _mix64_array(np.asarray(keys).astype(np.uint64) ^ np.uint64(seeds.seed_sgn))
    return 1.0 - 2.0 * (z >> np.uint64(63)).astype(np.float64)


def project_sorted(keys: np.ndarray, values: np.ndarray, seeds: HashSeeds) -> np.ndarray:
    """Signed bucket accumulation of an ascending-key sparse vector.

    ``np.add.at`` applies the additions in the order given, so ascending key
    order makes the floating-point accumulation deterministic. Every code
    path that projects a sparse vector goes through here, which is what makes
    the single-node and whole-graph embedding paths agree bit for bit.
    """
    out = np.zeros(seeds.dim, dtype=np.float64)
    if len(keys) == 0:
        return out
    buckets = hash_dim_array(keys, seeds)
    signs = hash_sign_array(keys, seeds)
    np.add.at(out, buckets, signs * values)
    return out


def project(x: Mapping[int, float], seeds: HashSeeds) -> np.ndarray:
    """Project a sparse vector keyed by node id into dim dense components.

    output[i] = sum over keys k with bucket(k) == i of x[k] * sign(k),
    accumulated in ascending key order.
    """
    if not x:
        return np.zeros(seeds.dim, dtype=np.float64)
    keys = np.fromiter(sorted(x), dtype=np.int64, count=len(x))
    values = np.array([x[int(k)] for k in keys], dtype=np.float64)
    return project_sorted(keys, values, seeds)
