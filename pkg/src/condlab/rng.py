"""Deterministic counter-based random streams.

Every random quantity in this package is addressed, not drawn: a stream key
is derived by hashing a (seed, index, index, ...) path with the SplitMix64
finalizer, and the k-th variate of a stream is a pure function of
(key, k).  Experiments therefore reproduce bit-for-bit for a fixed seed no
matter how trials are chunked or reordered.

Normals come from Box-Muller on open-interval uniforms, so log() never sees
zero.  All integer arithmetic is uint64 with wraparound; numpy arrays (not
scalars) are used throughout because numpy warns on scalar overflow.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _finalize(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def substream(seed, *path):
    """Derive a stream key from a seed and an index path.

    Path parts may be ints or integer arrays; arrays broadcast, so
    ``substream(seed, 3, np.arange(T))`` yields one key per trial.
    """
    with np.errstate(over="ignore"):
        key = _finalize(np.asarray(int(seed) & _MASK, dtype=np.uint64) + _GOLDEN)
        for part in path:
            part = np.asarray(part)
            if part.dtype.kind not in "iu":
                raise TypeError("substream indices must be integers")
            part = part.astype(np.uint64)
            key = _finalize(key ^ (part * _GOLDEN + np.uint64(0x1D8E4E27C47D124F)))
    return key


def uniforms(key, count):
    """``count`` floats in (0, 1] with 53-bit resolution per key.

    Returns shape ``key.shape + (count,)``.
    """
    counters = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = _finalize(np.asarray(key, dtype=np.uint64)[..., None] + counters * _GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def standard_normals(key, count):
    """``count`` N(0,1) draws per key via Box-Muller, shape ``key.shape + (count,)``."""
    pairs = (count + 1) // 2
    u = uniforms(key, 2 * pairs)
    radius = np.sqrt(-2.0 * np.log(u[..., 0::2]))
    angle = (2.0 * np.pi) * u[..., 1::2]
    out = np.empty(u.shape, dtype=np.float64)
    out[..., 0::2] = radius * np.cos(angle)
    out[..., 1::2] = radius * np.sin(angle)
    return out[..., :count]


def normal_matrix(key, rows, cols):
    """A rows-by-cols matrix of N(0,1) draws, row-major; batched over key shape."""
    z = standard_normals(key, rows * cols)
    return z.reshape(np.shape(key) + (rows, cols))
