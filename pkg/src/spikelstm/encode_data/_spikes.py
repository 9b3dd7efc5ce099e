"""Spike trains and the rate coders that produce them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError, InvariantError, ShapeError
from ..numerics import RngStream


@dataclass(frozen=True)
class SpikeTrain:
    """Time-major binary tensor of shape (steps, batch, features)."""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ShapeError(f'spike train must be (steps, batch, features), got {data.shape}')
        if not np.all((data == 0) | (data == 1)):
            raise InvariantError('spike train contains values other than 0 and 1')
        object.__setattr__(self, 'data', data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __len__(self):
        return self.steps

    @property
    def steps(self) -> int:
        return self.data.shape[0]

    @property
    def batch(self) -> int:
        return self.data.shape[1]

    @property
    def features(self) -> int:
        return self.data.shape[2]

    @property
    def rate(self) -> np.ndarray:
        """Empirical firing rate per (batch, feature)."""
        return self.data.mean(axis=0)


def _check_probabilities(values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
        raise DomainError('spike probabilities must lie in [0, 1]')
    return values


def bernoulli_spike_encode(values, steps: int, rng: RngStream) -> SpikeTrain:
    """Rate coding: at every step each feature spikes with probability equal
    to its value, independently of everything else.

    Parameters
    ----------
    values : array_like
        Probabilities, shape (features,) or (batch, features) for a constant
        rate, or (steps, batch, features) for a rate that changes per step.
    steps : int
        Number of time steps.
    rng : RngStream
        Source of the uniform draws, one per entry of the spike train.
    """
    values = _check_probabilities(np.asarray(values, dtype=np.float64))
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim not in (2, 3):
        raise ShapeError(f'expected (features,), (batch, features) or (steps, batch, features), '
                         f'got {values.shape}')
    if steps < 1:
        raise DomainError(f'steps must be >= 1, got {steps}')
    if values.ndim == 3 and values.shape[0] != steps:
        raise ShapeError(f'{values.shape[0]} probability steps for a train of {steps}')

    shape = (steps, *values.shape[-2:])
    u = rng.uniform(shape)
    return SpikeTrain(u < values)


def pixel_probabilities(images) -> np.ndarray:
    """Map pixel intensities to spike probabilities, bytes are divided by 255."""
    images = np.asarray(images)
    if np.issubdtype(images.dtype, np.integer):
        return images.astype(np.float64) / 255.0
    return images.astype(np.float64)


def encode_image_rows(images, rng: RngStream) -> SpikeTrain:
    """Sequential image coding: row r of every image is the input at step r.

    Parameters
    ----------
    images : array_like
        Shape (batch, rows, cols), bytes or probabilities.

    Returns
    -------
    SpikeTrain
        Shape (rows, batch, cols).
    """
    p = pixel_probabilities(images)
    if p.ndim != 3:
        raise ShapeError(f'expected (batch, rows, cols), got {p.shape}')

    return bernoulli_spike_encode(p.transpose(1, 0, 2), p.shape[1], rng)


def one_hot_encode(index: int, n: int) -> np.ndarray:
    """Binary vector of length `n` with a single 1 at `index`."""
    if not 0 <= index < n:
        raise IndexError(f'index {index} out of range for {n} symbols')
    vec = np.zeros(n)
    vec[index] = 1.0
    return vec


def one_hot_sequence(ids, n: int) -> np.ndarray:
    """One-hot rows for an integer array of any shape, output shape
    `(*ids.shape, n)`."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise IndexError(f'symbol ids must lie in [0, {n})')
    return np.eye(n)[ids]
