from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from spikelstm.exceptions import InvariantError
from spikelstm.numerics import RngStream
from spikelstm.spike_core import (
    SurrogateConfig,
    cell_threshold,
    cell_threshold_grad,
    spike_sigma,
    surrogate_deriv,
)


@pytest.mark.parametrize('u,expected', (
    (0.5, 1.0),
    (0.0, 0.0),
    (0.1, 0.0),
    (-0.5, 0.0),
))
def test_spike_sigma(u, expected):
    assert spike_sigma(u, 0.1) == expected


def test_spike_sigma_binary_fuzz():
    u = 10 * RngStream(0).standard_normal(1_000_000)
    out = spike_sigma(u, 0.1)
    assert set(np.unique(out)) <= {0.0, 1.0}


def test_surrogate_deriv_peak():
    assert surrogate_deriv(0.1, 0.1, 4) == pytest.approx(0.09973557010035818, rel=1e-14)
    assert surrogate_deriv(-0.1, 0.1, 0.3) == pytest.approx(1.329807601338109, rel=1e-14)


def test_surrogate_deriv_shifted():
    assert surrogate_deriv(1.2, 0.1, 4) == pytest.approx(norm.pdf(1.1, scale=4), rel=1e-13)


def test_surrogate_deriv_symmetric():
    u = np.linspace(-2, 2, 41)
    np.testing.assert_array_equal(surrogate_deriv(u, 0.1, 0.3), surrogate_deriv(-u, 0.1, 0.3))


@pytest.mark.parametrize('theta,alpha', ((0.1, 4.0), (0.1, 0.3), (0.5, 0.05), (-0.25, 1.0)))
def test_surrogate_deriv_argmax(theta, alpha):
    u = np.linspace(-3, 3, 6001)
    values = surrogate_deriv(u, theta, alpha)
    peaks = u[values == values.max()]
    np.testing.assert_allclose(np.abs(peaks), abs(theta), atol=1e-9)


def test_cell_threshold_idempotent():
    v = np.array([0, 1, 2, 1, 0, 2])
    once = cell_threshold(v)
    np.testing.assert_array_equal(cell_threshold(once), once)
    np.testing.assert_array_equal(cell_threshold(np.array([0.0, 1.0])), [0.0, 1.0])


@pytest.mark.parametrize('v,expected', ((0, 0.0), (1, 1.0), (2, 1.0)))
def test_cell_threshold(v, expected):
    assert cell_threshold(v) == expected


@pytest.mark.parametrize('v,expected', ((0, 1.0), (1, 1.0), (2, 0.5)))
def test_cell_threshold_grad(v, expected):
    assert cell_threshold_grad(v, SurrogateConfig()) == expected


def test_cell_threshold_grad_gamma():
    cfg = SurrogateConfig(gamma2=0.25)
    np.testing.assert_array_equal(cell_threshold_grad(np.array([0, 1, 2]), cfg),
                                  [1.0, 1.0, 0.25])


@pytest.mark.parametrize('v', (3, -1, 0.5))
def test_cell_threshold_rejects(v):
    with pytest.raises(InvariantError):
        cell_threshold(v)
    with pytest.raises(InvariantError):
        cell_threshold_grad(v, SurrogateConfig())


def test_config_bounds():
    with pytest.raises(ValueError):
        SurrogateConfig(alpha1=0)
    with pytest.raises(ValueError):
        SurrogateConfig(gamma2=1.5)
