from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from spikelstm.exceptions import GradcheckError, ShapeError, SizeError
from spikelstm.gradcheck import (
    Graph,
    compare_gradients,
    gradcheck,
    reference_gradient,
    run_gradcheck,
)
from spikelstm.heads import LinearHead
from spikelstm.lstm_snn import GATES, GradientSet, LayerParams
from spikelstm.network import SpikingNetwork
from spikelstm.numerics import RngStream
from spikelstm.spike_core import SurrogateConfig

P1 = norm.pdf(0.9, scale=4.0)
P2 = norm.pdf(0.9, scale=0.3)


def one_neuron(w_y=2.0, b_y=0.0) -> SpikingNetwork:
    layer = LayerParams.zeros(1, 1)
    for q in GATES:
        layer.tables[f'w_{q}x'][...] = 1.0
    return SpikingNetwork(layer=layer,
                          head=LinearHead(np.array([[w_y]]), np.array([b_y])),
                          surrogate=SurrogateConfig())


@pytest.fixture
def one_step():
    return np.ones((1, 1, 1)), np.zeros((1, 1, 1))


def test_zero_loss(one_step):
    inputs, _ = one_step
    network = one_neuron(w_y=0.0, b_y=0.7)
    targets = np.full((1, 1, 1), 0.7)

    for grads in (network.loss_and_grads(inputs, targets, 'every').grads,
                  reference_gradient(network, inputs, targets, 'every')):
        for name in network.tables():
            assert np.all(grads[name] == 0), name


def test_one_neuron_symbolic(one_step):
    """y = 2 h with h = 1 and target 0, so dL/dh = 4."""
    inputs, targets = one_step
    network = one_neuron()

    expected = {
        'w_y': 2.0,
        'b_y': 2.0,
        'w_ox': 4 * P1,
        'w_ix': 4 * P1,
        'w_gx': 4 * P2,
        'w_fx': 0.0,
    }
    for grads in (network.loss_and_grads(inputs, targets, 'every').grads,
                  reference_gradient(network, inputs, targets, 'every')):
        for name, value in expected.items():
            assert grads[name].ravel()[0] == pytest.approx(value, rel=1e-14), name
        for q in GATES:
            assert grads[f'w_{q}h'][0, 0] == 0.0
            assert grads[f'b_{q}x'][0] == grads[f'b_{q}h'][0] == grads[f'w_{q}x'][0, 0]


def test_graph_cell_nodes():
    """Threshold node scales by gamma at 2, carry node passes through."""
    cfg = SurrogateConfig()
    graph = Graph()
    v = graph.input(np.array([2.0, 1.0]))
    out = graph.add(graph.cell_threshold(v, cfg), graph.cell_carry(v))

    np.testing.assert_array_equal(graph.value(out), [2.0, 2.0])
    graph.backward(out)
    np.testing.assert_allclose(graph.nodes[v].grad, [1.5, 2.0])


def test_random_trials_pass():
    passed, results = run_gradcheck(20, 0)
    assert passed, '\n'.join(r.summary() for r in results)
    assert len(results) == 20
    assert {r.head for r in results} == {'softmax', 'linear'}
    assert {r.mode for r in results} == {'every', 'final'}


def test_trials_deterministic():
    _, a = run_gradcheck(3, 7)
    _, b = run_gradcheck(3, 7)
    assert [r.summary() for r in a] == [r.summary() for r in b]


def test_size_limit():
    network = SpikingNetwork.initialize(input_size=10,
                                        hidden_size=10,
                                        output_size=2,
                                        head='softmax',
                                        surrogate=SurrogateConfig(),
                                        rng=RngStream(0))
    with pytest.raises(SizeError):
        reference_gradient(network, np.ones((2, 1, 10)), np.zeros((2, 1)), 'every')


def test_batch_rejected():
    with pytest.raises(ShapeError):
        reference_gradient(one_neuron(), np.ones((1, 2, 1)), np.zeros((1, 2, 1)), 'every')


def test_compare_gradients():
    a = GradientSet({'x': np.array([1.0, 2.0]), 'y': np.array([0.0])})
    b = GradientSet({'x': np.array([1.0, 2.5]), 'y': np.array([1e-14])})
    report = compare_gradients(a, b)

    assert report.worst_table == 'x'
    assert report.max_abs_err == pytest.approx(0.5)
    assert report.max_rel_err == pytest.approx(0.2)
    assert [t.name for t in report.tables] == ['x', 'y']
    assert report.tables[1].max_rel == pytest.approx(0.01)
    assert 'max rel' in str(report)


@pytest.mark.parametrize('seed', range(5))
def test_compare_gradients_recovers_perturbation(seed):
    rng = RngStream(seed)
    base = rng.spawn(0).standard_normal(12).reshape(3, 4) + 3.0
    magnitude = 10.0**(-1 - 4 * rng.spawn(1).uniform(1)[0])
    index = rng.spawn(2).choice(12, size=1)[0]

    perturbed = base.copy()
    perturbed.flat[index] *= 1 + magnitude
    report = compare_gradients(GradientSet({'w': base}), GradientSet({'w': perturbed}))

    assert magnitude / 2 <= report.max_rel_err <= 2 * magnitude


def test_compare_gradients_mismatch():
    with pytest.raises(ShapeError):
        compare_gradients(GradientSet({'x': np.zeros(1)}), GradientSet({'y': np.zeros(1)}))
    with pytest.raises(ShapeError):
        compare_gradients(GradientSet({'x': np.zeros(1)}), GradientSet({'x': np.zeros(2)}))


def test_corrupted_table_detected():
    passed, results = run_gradcheck(2, 0, corrupt='w_fx')
    assert not passed
    assert all(r.report.worst_table == 'w_fx' for r in results)


def test_gradcheck_raises():
    with pytest.raises(GradcheckError, match='w_fx'):
        gradcheck(trials=2, corrupt='w_fx')


def test_gradcheck_no_trials():
    assert gradcheck(trials=0) == []


def test_gradcheck_summary_lines(caplog):
    results = gradcheck(trials=2, seed=3)
    assert len(results) == 2
    assert all(r.report.max_rel_err <= 1e-10 for r in results)
