"""Dense arithmetic helpers, contract errors and the seedable index generator.

Matrices and vectors are plain float64 numpy arrays.  The constructors below
validate shape and finiteness and return read-only arrays so fitted models
can be shared freely.
"""
from __future__ import annotations

import numpy as np


class ContractError(ValueError):
    """An operation was called outside its precondition."""


class DegenerateWindowError(ValueError):
    """A calibration window carries no usable variation for the model."""


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    a = np.array(values, dtype=np.float64)
    if a.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} contains NaN or Inf")
    a.flags.writeable = False
    return a


def as_vector(values, name: str = "vector") -> np.ndarray:
    a = np.array(values, dtype=np.float64)
    if a.ndim != 1:
        raise ContractError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} contains NaN or Inf")
    a.flags.writeable = False
    return a


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def column_mean(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m, "m")
    if m.ndim != 2 or m.shape[0] < 1:
        raise ContractError("column_mean needs a matrix with at least one row")
    return m.mean(axis=0)


def center_columns(m: np.ndarray, means: np.ndarray) -> np.ndarray:
    m, means = as_matrix(m, "m"), as_vector(means, "means")
    if m.ndim != 2 or means.shape != (m.shape[1],):
        raise ContractError(
            f"means of length {means.shape} do not match {m.shape[1]} columns"
        )
    return m - means


_MASK64 = (1 << 64) - 1


class RngState:
    """Deterministic uniform index source.

    Raw 64-bit words come from numpy's PCG64 seeded with ``seed`` (through
    numpy's SeedSequence).  An index in ``[0, n)`` is obtained from a single
    raw word ``r`` by multiply-shift on its upper half::

        index = ((r >> 32) * n) >> 32

    which needs no rejection loop; the bias is below ``n / 2**32``.  Words are
    pulled in blocks, which does not change the stream.  ``n`` must be smaller
    than ``2**32``.
    """

    _BLOCK = 64

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._bits = np.random.PCG64(self.seed)
        self._buf: list[int] = []
        self._pos = 0

    def next_raw(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bits.random_raw(self._BLOCK).tolist()
            self._pos = 0
        r = self._buf[self._pos]
        self._pos += 1
        return r

    def uniform_index(self, n: int) -> int:
        if n < 1:
            raise ContractError("uniform_index needs n >= 1")
        if n >= 1 << 32:
            raise ContractError("uniform_index supports n < 2**32")
        return ((self.next_raw() >> 32) * n) >> 32

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """``k`` distinct indices from ``range(n)`` by partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ContractError(f"cannot draw {k} distinct items from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.uniform_index(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def derive_seed(base_seed: int, index: int) -> int:
    """Per-task seed rule shared by every parallelisable loop: base XOR index."""
    return (int(base_seed) ^ int(index)) & _MASK64


def mix_seed(seed: int) -> int:
    """SplitMix64 finaliser; scrambles a seed so nearby inputs share no bits."""
    z = (int(seed) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)
