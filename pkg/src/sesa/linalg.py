"""Dense vector/matrix helpers and the seeded random stream used everywhere.

Vectors and matrices are plain float64 numpy arrays. The helpers here add
the shape and domain checks the rest of the library relies on; heavy math
goes through numpy so the hot paths stay fast.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, DimensionError, RangeError


def as_vector(values, name="vector"):
    """Coerce to a 1-D float64 array, checking it is non-empty and finite."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def as_matrix(values, name="matrix"):
    """Coerce to a 2-D float64 array, checking it is non-empty and finite."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    check_finite(arr, name)
    return arr


def check_finite(arr, name="array"):
    if not np.all(np.isfinite(arr)):
        from .errors import NumericError

        raise NumericError(f"{name} contains non-finite entries")


def dot(a, b):
    """Inner product of two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError(f"dot expects 1-D operands, got shapes {a.shape} and {b.shape}")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dot length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(a @ b)


def matvec(m, v):
    """Matrix-vector product; m.cols must equal len(v)."""
    m = np.asarray(m, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if m.ndim != 2 or v.ndim != 1:
        raise DimensionError(f"matvec expects a matrix and a vector, got shapes {m.shape} and {v.shape}")
    if m.shape[1] != v.shape[0]:
        raise DimensionError(f"matvec dimension mismatch: {m.shape} @ {v.shape}")
    return m @ v


def norm(v):
    return float(np.sqrt(np.asarray(v, dtype=np.float64) @ np.asarray(v, dtype=np.float64)))


def cosine(a, b):
    """Cosine similarity; raises DegenerateInputError on a zero-norm operand."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"cosine expects equal-length vectors, got shapes {a.shape} and {b.shape}")
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine is undefined for zero-norm vectors")
    return float((a @ b) / (na * nb))


class SeededRng:
    """Deterministic random stream: PCG64 keyed by a 64-bit seed.

    The same seed always yields bitwise-identical draws, independent of
    platform. A SeededRng is single-owner; never share one across threads.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, lo, hi, size=None):
        if not lo < hi:
            raise RangeError(f"uniform requires lo < hi, got [{lo}, {hi})")
        return self._gen.uniform(lo, hi, size)

    def random(self, size=None):
        return self._gen.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def choice(self, n, size, replace=False):
        return self._gen.choice(n, size=size, replace=replace)


def rng_uniform(rng, lo, hi):
    """Next uniform draw in [lo, hi) from the stream; advances its state."""
    return float(rng.uniform(lo, hi))
