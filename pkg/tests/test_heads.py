from __future__ import annotations

import math
from decimal import Decimal, getcontext

import numpy as np
import pytest

from spikelstm.exceptions import DomainError, ShapeError
from spikelstm.gradcheck import finite_diff_head_check
from spikelstm.heads import (
    LinearHead,
    SoftmaxHead,
    ce_output_grad,
    cross_entropy,
    head_backward,
    init_head,
    mse_loss_and_grad,
    perplexity,
    softmax,
)
from spikelstm.numerics import RngStream


def decimal_softmax(logits):
    getcontext().prec = 40
    exps = [Decimal(float(v)).exp() for v in logits]
    total = sum(exps)
    return [float(e / total) for e in exps]


def test_softmax_uniform():
    np.testing.assert_allclose(softmax(np.zeros(4)), 0.25, rtol=1e-15)
    np.testing.assert_allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5], rtol=1e-15)


def test_softmax_high_precision():
    logits = np.array([1.5, -0.25, 3.0, 0.0, -7.0])
    np.testing.assert_allclose(softmax(logits), decimal_softmax(logits), rtol=1e-14)


def test_softmax_properties():
    logits = 20 * RngStream(4).standard_normal(60).reshape(6, 10)
    y = softmax(logits)
    np.testing.assert_allclose(y.sum(axis=-1), 1.0, rtol=1e-14)
    assert np.all(y >= 0)
    np.testing.assert_allclose(softmax(logits + 123.0), y, rtol=1e-12, atol=1e-300)


def test_softmax_head_forward_normalized():
    rng = RngStream(6)
    head = init_head('softmax', 5, 4, rng.spawn(0))
    h = (rng.spawn(1).uniform((7, 5)) < 0.5).astype(float)
    probs = head.forward(h)
    np.testing.assert_allclose(probs.sum(axis=-1), 1.0, rtol=0, atol=1e-12)

    shifted = SoftmaxHead(head.w_y.copy(), head.b_y + 42.0)
    np.testing.assert_allclose(shifted.forward(h), probs, rtol=0, atol=1e-12)


def test_softmax_large_logits():
    y = softmax(np.array([1000.0, 0.0]))
    assert np.all(np.isfinite(y))
    assert y[0] == 1.0


def test_softmax_temperature():
    logits = np.array([2.0, 1.0])
    np.testing.assert_allclose(softmax(logits, temperature=2.0), softmax(logits / 2), rtol=1e-15)


def test_ce_output_grad():
    np.testing.assert_allclose(ce_output_grad(np.array([0.2, 0.8]), np.array([0.0, 1.0])),
                               [0.2, -0.2])
    np.testing.assert_array_equal(ce_output_grad(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
                                  [0.0, 0.0])

    with pytest.raises(ShapeError):
        ce_output_grad(np.zeros(2), np.zeros(3))


def test_cross_entropy_floor():
    y = np.array([[1.0, 0.0]])
    assert cross_entropy(y, np.array([1]))[0] == pytest.approx(-math.log(1e-12))
    assert cross_entropy(y, np.array([0]))[0] == 0.0


def test_head_backward_zero():
    head = LinearHead(RngStream(1).standard_normal(6).reshape(2, 3), np.zeros(2))
    dh, dw, db = head_backward(head, np.array([1.0, 0.0, 1.0]), np.zeros(2))
    assert np.all(dh == 0)
    assert np.all(dw == 0)
    assert np.all(db == 0)


def test_head_backward_scalar():
    head = LinearHead(np.array([[2.0]]), np.array([0.0]))
    dh, dw, db = head_backward(head, np.array([1.0]), np.array([0.5]))
    np.testing.assert_array_equal(dh, [1.0])
    np.testing.assert_array_equal(dw, [[0.5]])
    np.testing.assert_array_equal(db, [0.5])


def test_head_backward_batch_sums():
    head = LinearHead(np.ones((2, 3)), np.zeros(2))
    h = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    dy = np.array([[1.0, 2.0], [3.0, 4.0]])
    dh, dw, db = head_backward(head, h, dy)

    assert dh.shape == (2, 3)
    np.testing.assert_array_equal(dw, np.outer(dy[0], h[0]) + np.outer(dy[1], h[1]))
    np.testing.assert_array_equal(db, [4.0, 6.0])


def test_head_backward_shape_mismatch():
    head = LinearHead(np.ones((2, 3)), np.zeros(2))
    with pytest.raises(ShapeError):
        head_backward(head, np.ones(3), np.ones(3))


def test_head_shapes_checked():
    with pytest.raises(ShapeError):
        SoftmaxHead(np.ones((2, 3)), np.zeros(3))


def test_mse_examples():
    loss, grads = mse_loss_and_grad([np.array([1.0])], [np.array([1.0])])
    assert loss == 0.0
    np.testing.assert_array_equal(grads[0], [0.0])

    loss, grads = mse_loss_and_grad([np.array([3.0]), np.array([1.0, 1.0])],
                                    [np.array([1.0]), np.array([0.0, 0.0])])
    assert loss == 3.0
    np.testing.assert_array_equal(grads[0], [2.0])
    np.testing.assert_array_equal(grads[1], [1.0, 1.0])


def test_mse_length_mismatch():
    with pytest.raises(ShapeError):
        mse_loss_and_grad([np.zeros(1)], [])


@pytest.mark.parametrize('mode', ('every', 'final'))
def test_finite_differences_linear(mode):
    rng = RngStream(21)
    head = init_head('linear', 4, 2, rng.spawn(0), scale=0.5)
    hidden = (rng.spawn(1).uniform((3, 2, 4)) < 0.5).astype(float)
    targets = rng.spawn(2).standard_normal(12).reshape(3, 2, 2)
    assert finite_diff_head_check(head, hidden, targets, mode=mode) < 1e-6


@pytest.mark.parametrize('mode', ('every', 'final'))
def test_finite_differences_softmax(mode):
    rng = RngStream(22)
    head = init_head('softmax', 5, 3, rng.spawn(0), scale=0.5)
    hidden = (rng.spawn(1).uniform((3, 5)) < 0.5).astype(float)
    labels = rng.spawn(2).choice(3, size=3)
    assert finite_diff_head_check(head, hidden, labels, mode=mode) < 1e-6


@pytest.mark.parametrize('seed', range(50))
def test_finite_differences_random_heads(seed):
    rng = RngStream(100 + seed)
    kind = ('softmax', 'linear')[seed % 2]
    mode = ('every', 'final')[(seed // 2) % 2]
    n_hidden, n_out, steps, batch = 3 + seed % 4, 2 + seed % 3, 1 + seed % 5, 1 + seed % 3
    head = init_head(kind, n_hidden, n_out, rng.spawn(0), scale=0.5)
    hidden = (rng.spawn(1).uniform((steps, batch, n_hidden)) < 0.5).astype(float)
    if kind == 'softmax':
        targets = rng.spawn(2).choice(n_out, size=steps * batch).reshape(steps, batch)
    else:
        targets = rng.spawn(2).standard_normal(steps * batch * n_out).reshape(
            steps, batch, n_out)
    assert finite_diff_head_check(head, hidden, targets, mode=mode) < 1e-6


def test_finite_differences_leave_head_untouched():
    head = init_head('linear', 3, 1, RngStream(0))
    before = {name: arr.copy() for name, arr in head.tables().items()}
    finite_diff_head_check(head, np.ones((2, 3)), np.zeros((2, 1)))
    for name, arr in head.tables().items():
        np.testing.assert_array_equal(arr, before[name])


@pytest.mark.parametrize('step', (1e-9, 1e-3))
def test_finite_differences_step_range(step):
    head = init_head('linear', 1, 1, RngStream(0))
    with pytest.raises(DomainError):
        finite_diff_head_check(head, np.ones((1, 1)), np.zeros((1, 1)), step=step)


def test_perplexity_uniform():
    assert perplexity([1 / 41] * 7) == pytest.approx(41.0, rel=1e-14)


def test_perplexity_certain():
    assert perplexity([1.0, 1.0, 1.0]) == 1.0


def test_perplexity_mixed():
    assert perplexity([0.5, 0.25]) == pytest.approx(2.8284271247461903, rel=1e-15)


def test_perplexity_zero_probability():
    assert perplexity([0.5, 0.0]) == math.inf


@pytest.mark.parametrize('probs', ([], [1.5], [-0.1]))
def test_perplexity_domain(probs):
    with pytest.raises(DomainError):
        perplexity(probs)
