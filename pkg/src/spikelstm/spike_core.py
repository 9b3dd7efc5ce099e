"""Spike activations, their Gaussian surrogate derivatives and the cell
state threshold.

The forward pass uses hard thresholds. The backward pass replaces the
(almost everywhere zero) derivative of a threshold at `theta` by the
normal density of `|u| - |theta|` with standard deviation `alpha`.
"""
from __future__ import annotations

import numpy as np
from pydantic import Field

from .exceptions import InvariantError
from .numerics import gaussian_pdf
from .schema import BaseModel


class SurrogateConfig(BaseModel):
    """Thresholds and surrogate widths of the spike activations."""
    theta1: float = Field(0.1, description='Threshold of sigma_1 (gates f, i, o).')
    theta2: float = Field(0.1, description='Threshold of sigma_2 (modulated input g).')
    alpha1: float = Field(4.0, gt=0, description='Surrogate width of sigma_1.')
    alpha2: float = Field(0.3, gt=0, description='Surrogate width of sigma_2.')
    gamma2: float = Field(
        0.5,
        gt=0,
        le=1,
        description='Gradient of the cell threshold where the pre-threshold '
        'cell sum equals 2. Sums of 0 and 1 pass the gradient unchanged.')


def spike_sigma(u, theta: float) -> np.ndarray:
    """Return 1 where `u` strictly exceeds `theta`, else 0."""
    return (np.asarray(u) > theta).astype(np.float64)


def surrogate_deriv(u, theta: float, alpha: float) -> np.ndarray:
    """Surrogate derivative of `spike_sigma` at membrane potential `u`."""
    return gaussian_pdf(np.abs(u) - abs(theta), alpha)


def _check_cell_sum(v) -> np.ndarray:
    v = np.asarray(v)
    if not np.all((v == 0) | (v == 1) | (v == 2)):
        bad = np.unique(v[(v != 0) & (v != 1) & (v != 2)])
        raise InvariantError(f'cell sum outside {{0, 1, 2}}: {bad[:5]}')
    return v


def cell_threshold(v) -> np.ndarray:
    """Map the pre-threshold cell sum (0, 1 or 2) to a binary cell state."""
    v = _check_cell_sum(v)
    return (v >= 1).astype(np.float64)


def cell_threshold_grad(v, cfg: SurrogateConfig) -> np.ndarray:
    """Gradient assigned to `cell_threshold`: 1 for sums 0 and 1,
    `cfg.gamma2` for a sum of 2."""
    v = _check_cell_sum(v)
    return np.where(v == 2, cfg.gamma2, 1.0)
