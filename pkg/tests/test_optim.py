from __future__ import annotations

import math

import numpy as np
import pytest

from spikelstm.exceptions import NumericalError, ShapeError
from spikelstm.lstm_snn import GradientSet
from spikelstm.optim import AdamConfig, AdamState, adam_step
from spikelstm.numerics import RngStream


def scalar_adam(w, grads, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        w -= lr * m_hat / (math.sqrt(v_hat) + eps)
    return w


def test_zero_gradient_is_noop():
    params = {'w': np.array([1.0, -2.0])}
    new, state = adam_step(AdamState(), params, {'w': np.zeros(2)})
    np.testing.assert_array_equal(new['w'], params['w'])
    assert state.step == 1


def test_first_step_moves_by_lr():
    new, _ = adam_step(AdamState(), {'w': np.array([0.0, 0.0])}, {'w': np.array([3.0, -1e-3])})
    np.testing.assert_allclose(new['w'], [-0.001, 0.001], rtol=1e-4)


def test_matches_scalar_recurrence():
    grads = [0.5, -1.0, 2.0, 0.0, 0.25]
    params = {'w': np.array([1.0])}
    state = AdamState()
    for g in grads:
        params, state = adam_step(state, params, {'w': np.array([g])})

    assert params['w'][0] == pytest.approx(scalar_adam(1.0, grads), abs=1e-15)
    assert state.step == 5


def test_step_bound():
    """Each update stays below the bound on `lr * m_hat / sqrt(v_hat)`."""
    lr, beta1, beta2 = 0.001, 0.9, 0.999
    rng = RngStream(3)
    state = AdamState(lr=lr, beta1=beta1, beta2=beta2)
    params = {'w': np.zeros(50)}

    ratio = beta1**2 / beta2
    for t in range(1, 31):
        g = 10 * rng.standard_normal(50)
        new, state = adam_step(state, params, {'w': g})

        series = sum(ratio**k for k in range(t))
        bound = (lr * (1 - beta1) / math.sqrt(1 - beta2) * math.sqrt(series) *
                 math.sqrt(1 - beta2**t) / (1 - beta1**t))
        assert np.all(np.abs(new['w'] - params['w']) <= bound * (1 + 1e-12))
        params = new


def test_not_inplace_leaves_inputs():
    params = {'w': np.array([1.0])}
    state = AdamState()
    new, new_state = adam_step(state, params, {'w': np.array([1.0])})

    assert params['w'][0] == 1.0
    assert state.step == 0
    assert state.m == {}
    assert new_state.step == 1
    assert new['w'][0] != 1.0


def test_inplace_updates_inputs():
    params = {'w': np.array([1.0])}
    state = AdamState()
    adam_step(state, params, {'w': np.array([1.0])}, inplace=True)
    assert params['w'][0] == pytest.approx(0.999)
    assert state.step == 1


def test_accepts_gradient_set():
    params = {'w': np.zeros((2, 2)), 'b': np.zeros(2)}
    grads = GradientSet({'w': np.ones((2, 2)), 'b': np.ones(2)})
    new, _ = adam_step(AdamState(), params, grads)
    assert new['w'].shape == (2, 2)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        adam_step(AdamState(), {'w': np.zeros(2)}, {'w': np.zeros(3)})
    with pytest.raises(ShapeError):
        adam_step(AdamState(), {'w': np.zeros(2)}, {'v': np.zeros(2)})


def test_non_finite_gradient():
    state = AdamState()
    with pytest.raises(NumericalError):
        adam_step(state, {'w': np.zeros(2)}, {'w': np.array([0.0, np.nan])})
    assert state.step == 0


def test_from_config():
    state = AdamState.from_config(AdamConfig(lr=0.01))
    assert state.lr == 0.01
    assert state.beta2 == 0.999

    with pytest.raises(ValueError):
        AdamConfig(beta1=1.0)
