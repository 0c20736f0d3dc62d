"""Deterministic seed streams and counter-based sampling primitives.

Every stochastic oracle in this package is a pure function of ``(x, seed)``:
a 64-bit seed is hashed (splitmix64 finalizer) into uniforms or normals, so
the same seed always yields the same sample, independent of call order or
process.  ``SeedStream`` organizes seeds hierarchically: a stream is an
immutable 64-bit state, ``child(*steps)`` derives an independent stream, and
``seeds(n)`` derives a block of oracle seeds.  Streams never mutate, so
batches may be evaluated in any order (or in parallel) with identical
results.

Splitting by label is what keeps paired experiments comparable: a first-order
and a zeroth-order run with the same master seed consume the same noise-seed
("xi") sequence, while Gaussian directions come from a separate "u" child.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# domain-separation tags for oracle randomness
TAG_SEQ = 0x5EED5EED5EED5EED
TAG_U01 = 0xA511E9B3D1C6A127
TAG_NORMAL = 0x8B72E0F355D1E3A9


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int (exact 64-bit wraparound)."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer; input is converted to uint64."""
    z = np.asarray(z, dtype=np.uint64)
    z = z + np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _label_hash(label: str) -> int:
    h = _FNV_OFFSET
    for b in label.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def _fold(state: int, token) -> int:
    if isinstance(token, (int, np.integer)):
        return mix64(state ^ mix64(int(token) & _MASK))
    if isinstance(token, str):
        return mix64(state ^ _label_hash(token))
    raise TypeError(f"seed path steps must be int or str, got {type(token)!r}")


def fold_int_states(state: int, ks: np.ndarray) -> np.ndarray:
    """Vectorized ``child(k).state`` for an array of integer steps.

    Bit-identical to ``SeedStream.child(k)`` looped over ``ks``.
    """
    ks = np.asarray(ks, dtype=np.uint64)
    return mix64_array(np.uint64(state) ^ mix64_array(ks))


def fold_label_states(states: np.ndarray, label: str) -> np.ndarray:
    """Vectorized ``child(label).state`` applied to an array of states."""
    return mix64_array(np.asarray(states, dtype=np.uint64) ^ np.uint64(_label_hash(label)))


def seed_blocks(states: np.ndarray, n: int) -> np.ndarray:
    """(len(states), n) oracle-seed grid; row i equals the ``seeds(n)`` of a
    stream whose state is ``states[i]``."""
    idx = np.arange(n, dtype=np.uint64)
    pre = mix64_array(idx ^ np.uint64(TAG_SEQ))
    return mix64_array(pre[None, :] ^ np.asarray(states, dtype=np.uint64)[:, None])


class SeedStream:
    """Immutable node in a deterministic seed tree."""

    __slots__ = ("state",)

    def __init__(self, entropy: int, *path):
        state = mix64(int(entropy) & _MASK)
        for token in path:
            state = _fold(state, token)
        self.state = state

    def child(self, *path) -> "SeedStream":
        s = SeedStream.__new__(SeedStream)
        state = self.state
        for token in path:
            state = _fold(state, token)
        s.state = state
        return s

    def seeds(self, n: int) -> np.ndarray:
        """n independent oracle seeds (uint64); pure in (stream, n-prefix)."""
        idx = np.arange(n, dtype=np.uint64)
        return mix64_array(mix64_array(idx ^ np.uint64(TAG_SEQ)) ^ np.uint64(self.state))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.state)

    def __repr__(self):
        return f"SeedStream(0x{self.state:016x})"


def uniform01(seeds: np.ndarray, tag: int = TAG_U01) -> np.ndarray:
    """Uniforms in (0, 1], one per seed."""
    h = mix64_array(np.asarray(seeds, dtype=np.uint64) ^ np.uint64(tag))
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def standard_normals(seeds: np.ndarray, dim: int, tag: int = TAG_NORMAL) -> np.ndarray:
    """(n, dim) standard normals, row i a pure function of seeds[i].

    Box-Muller on hashed uniforms; two hashes per normal.
    """
    s = np.asarray(seeds, dtype=np.uint64).reshape(-1, 1) ^ np.uint64(tag)
    cols = np.arange(dim, dtype=np.uint64).reshape(1, -1)
    h1 = mix64_array(s + mix64_array(np.uint64(2) * cols))
    h2 = mix64_array(s + mix64_array(np.uint64(2) * cols + np.uint64(1)))
    u1 = ((h1 >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (h2 >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
