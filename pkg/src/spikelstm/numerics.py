"""Dense linear algebra helpers and the deterministic random number stream.

All arrays in the training core are `numpy.float64`. Matrices are 2-D
arrays in row-major (C) order, vectors are 1-D arrays.

The random stream is built on the counter-based Philox generator. A stream
is identified by a 64-bit seed plus a path of integer keys, so child streams
can be split off deterministically:

```python
rng = RngStream(1234)
init_rng, data_rng = rng.spawn(0), rng.spawn(1)
```
"""
from __future__ import annotations

import math

import numpy as np

from .exceptions import DomainError, NumericalError, ShapeError

SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f'{what} produced non-finite entries')
    return arr


def gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product `a @ b` with shape and finiteness checks.

    Every entry is accumulated left to right over the inner dimension, so
    results do not depend on the BLAS build.

    Parameters
    ----------
    a : np.ndarray
        Matrix of shape (n, k).
    b : np.ndarray
        Matrix of shape (k, m).

    Returns
    -------
    np.ndarray
        Matrix of shape (n, m).

    Raises
    ------
    ShapeError
        When the inner dimensions differ.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f'cannot multiply {a.shape} by {b.shape}')

    out = np.zeros((a.shape[0], b.shape[1]))
    for p in range(a.shape[1]):
        out += np.outer(a[:, p], b[p])
    return _check_finite(out, 'gemm')


def gaussian_pdf(x, alpha: float):
    """Normal probability density with zero mean and standard deviation
    `alpha`, evaluated elementwise at `x`."""
    if not alpha > 0:
        raise DomainError(f'alpha must be positive, got {alpha}')

    x = np.asarray(x, dtype=np.float64)
    return np.exp(-(x * x) / (2.0 * alpha * alpha)) / (alpha * SQRT_2PI)


class RngStream:
    """Reproducible random stream.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed.
    key : tuple[int, ...], optional
        Path of the stream below the root seed, see `spawn`.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise DomainError(f'seed must fit in 64 unsigned bits, got {seed}')
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        seed_seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.Philox(seed_seq))

    def __repr__(self):
        return f'{self.__class__.__name__}(seed={self.seed}, key={self.key})'

    def spawn(self, key: int) -> RngStream:
        """Return the independent child stream identified by `key`."""
        return RngStream(self.seed, (*self.key, key))

    def uniform(self, size) -> np.ndarray:
        """Uniform draws in [0, 1)."""
        return self._gen.random(size)

    def standard_normal(self, n: int) -> np.ndarray:
        """`n` standard normal draws using the Box-Muller transform."""
        n_pairs = (n + 1) // 2
        u = self.uniform((n_pairs, 2))
        # 1 - u lies in (0, 1], so the log is finite
        radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        pairs = np.stack((radius * np.cos(angle), radius * np.sin(angle)), axis=1)
        return pairs.reshape(-1)[:n]

    def choice(self, n: int, size=None) -> np.ndarray:
        """Uniform integers in [0, n)."""
        return self._gen.integers(0, n, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def draw_standard_normal(rng: RngStream, n: int) -> np.ndarray:
    """Draw `n` i.i.d. standard normal values from `rng`.

    Raises
    ------
    DomainError
        When `n` < 1.
    """
    if n < 1:
        raise DomainError(f'need at least one draw, got n={n}')
    return rng.standard_normal(n)
