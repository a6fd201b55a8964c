"""Seeded random streams and the few dense-array primitives the models need.

Every random draw in the package goes through :class:`RngStream`. A stream is
identified by a master ``seed`` plus a derivation path of integers, so that the
stream for, say, generation 12 / individual 3 can be rebuilt independently of
execution order.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ParameterError, ShapeError

_MASK64 = (1 << 64) - 1


class RngStream:
    """Splittable random stream backed by a counter-based Philox generator.

    Parameters
    ----------
    seed : int
        Master seed (reduced modulo 2**64).
    stream_id : int or tuple of int, default=()
        Derivation path. Identical ``(seed, stream_id)`` pairs replay the same
        sequence; distinct paths give independent sequences.
    """

    def __init__(self, seed, stream_id=()):
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        self.seed = int(seed) & _MASK64
        self.stream_id = tuple(int(s) & _MASK64 for s in stream_id)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, *ids):
        """Return the independent stream at ``stream_id + ids``."""
        return RngStream(self.seed, self.stream_id + tuple(ids))

    def uniform(self, lo=0.0, hi=1.0, size=None):
        if not lo < hi:
            raise ParameterError(f"need lo < hi, got [{lo}, {hi})")
        u = self.generator.random(size)
        out = lo + u * (hi - lo)
        # rounding can land exactly on hi for tiny intervals
        return np.minimum(out, np.nextafter(hi, lo)) if size is not None else min(out, math.nextafter(hi, lo))

    def normal(self, mean=0.0, stddev=1.0, size=None):
        if not stddev > 0:
            raise ParameterError(f"stddev must be positive, got {stddev}")
        return self.generator.normal(mean, stddev, size)

    def cauchy(self, location=0.0, scale=1.0):
        if not scale > 0:
            raise ParameterError(f"scale must be positive, got {scale}")
        return cauchy_from_uniform(self.generator.random(), location, scale)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def permutation(self, n):
        return self.generator.permutation(n)

    def bernoulli(self, p):
        """Elementwise Bernoulli draws with success probabilities ``p``."""
        p = np.asarray(p)
        return (self.generator.random(p.shape) < p).astype(np.float64)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def derive_seed(seed, *path):
    """Deterministic 63-bit integer seed for the derivation ``path`` under ``seed``."""
    seq = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(p) & _MASK64 for p in path))
    return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))


def cauchy_from_uniform(u, location, scale):
    return location + scale * math.tan(math.pi * (u - 0.5))


def sample_uniform(rng, lo, hi):
    """One draw from ``[lo, hi)``."""
    return float(rng.uniform(lo, hi))


def sample_normal(rng, mean, stddev):
    return float(rng.normal(mean, stddev))


def sample_cauchy(rng, location, scale):
    return float(rng.cauchy(location, scale))


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


sigmoid_map = sigmoid


def softmax(z):
    """Row-wise softmax with max subtraction."""
    z = np.asarray(z, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def argmax_lowest(m):
    """Row-wise argmax; ties go to the smallest column index."""
    # np.argmax already returns the first maximal index
    return np.argmax(np.asarray(m), axis=1)
