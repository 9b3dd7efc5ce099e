from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from spikelstm.exceptions import ConfigError, InvariantError, ShapeError
from spikelstm.gradcheck import compare_gradients, reference_gradient
from spikelstm.heads import LinearHead
from spikelstm.lstm_snn import (
    GATES,
    LayerParams,
    backward_step,
    bptt,
    forward_sequence,
    forward_states,
    forward_step,
    init_params,
    layer_table_names,
)
from spikelstm.network import SpikingNetwork
from spikelstm.numerics import RngStream
from spikelstm.spike_core import SurrogateConfig

CFG = SurrogateConfig()

# surrogate derivatives at a membrane potential of 1
P1 = norm.pdf(0.9, scale=4.0)
P2 = norm.pdf(0.9, scale=0.3)


def unit_layer(input_size=1, hidden_size=1) -> LayerParams:
    """All input weights 1, everything else 0."""
    params = LayerParams.zeros(input_size, hidden_size)
    for q in GATES:
        params.tables[f'w_{q}x'][...] = 1.0
    return params


def random_layer(seed, input_size, hidden_size, bias_scale=0.5) -> LayerParams:
    rng = RngStream(seed)
    params = init_params(input_size, hidden_size, rng.spawn(0))
    bias_rng = rng.spawn(1)
    for name, arr in params.tables.items():
        if name.startswith('b_'):
            arr[...] = bias_scale * bias_rng.standard_normal(arr.size)
    return params


def test_table_names():
    names = layer_table_names()
    assert names[:4] == ['w_fh', 'w_fx', 'b_fh', 'b_fx']
    assert len(names) == 16


def test_init_biases_zero():
    params = init_params(3, 4, RngStream(0))
    for name, arr in params.tables.items():
        if name.startswith('b_'):
            assert np.all(arr == 0)


def test_init_deterministic():
    a = init_params(3, 4, RngStream(5))
    b = init_params(3, 4, RngStream(5))
    for name in layer_table_names():
        assert a.tables[name].tobytes() == b.tables[name].tobytes()


def test_init_weight_variance():
    params = init_params(100, 150, RngStream(11))
    weights = np.concatenate(
        [arr.ravel() for name, arr in params.tables.items() if name.startswith('w_')])
    assert weights.size >= 100_000
    assert abs(weights.var() - 1.0) < 0.02


def test_init_rejects_empty():
    with pytest.raises(ConfigError):
        init_params(0, 3, RngStream(0))


def test_table_shapes_checked():
    tables = LayerParams.zeros(2, 3).tables
    tables['w_fh'] = np.zeros((2, 2))
    with pytest.raises(ShapeError):
        LayerParams(2, 3, tables)


def test_zero_network():
    params = LayerParams.zeros(3, 4)
    cache = forward_step(params, CFG, np.array([0.3, 1.0, -2.0]), np.zeros(4), np.zeros(4))
    for q in GATES:
        assert np.all(cache.pre(q) == 0)
        assert np.all(cache.gate(q) == 0)
    assert np.all(cache.c_t == 0)
    assert np.all(cache.h_t == 0)


@pytest.mark.parametrize('c_prev,c_pre', ((1.0, 2.0), (0.0, 1.0)))
def test_one_neuron_step(c_prev, c_pre):
    cache = forward_step(unit_layer(), CFG, np.array([1.0]), np.array([0.0]), np.array([c_prev]))
    for q in GATES:
        assert cache.pre(q)[0] == 1.0
        assert cache.gate(q)[0] == 1.0
    assert cache.c_pre[0] == c_pre
    assert cache.c_t[0] == 1.0
    assert cache.h_t[0] == 1.0


def test_step_rejects_non_binary_state():
    params = LayerParams.zeros(1, 2)
    with pytest.raises(InvariantError):
        forward_step(params, CFG, np.array([1.0]), np.array([0.5, 0.0]), np.zeros(2))
    with pytest.raises(InvariantError):
        forward_step(params, CFG, np.array([1.0]), np.zeros(2), np.array([2.0, 0.0]))


def test_step_shape_mismatch():
    with pytest.raises(ShapeError):
        forward_step(LayerParams.zeros(2, 2), CFG, np.ones(3), np.zeros(2), np.zeros(2))


def test_sequence_single_step():
    params = random_layer(1, 3, 4)
    x = np.array([[1.0, 0.0, 1.0]])
    (cache, ) = forward_sequence(params, CFG, x)
    step = forward_step(params, CFG, x[0], np.zeros(4), np.zeros(4))
    np.testing.assert_array_equal(cache.h_t, step.h_t)
    np.testing.assert_array_equal(cache.c_pre, step.c_pre)


def test_sequence_zero_input():
    caches = forward_sequence(LayerParams.zeros(2, 3), CFG, np.zeros((5, 2)))
    assert all(np.all(cache.h_t == 0) for cache in caches)


def test_sequence_manual_recomputation():
    params = random_layer(4, 2, 2)
    x = (RngStream(9).uniform((3, 2)) < 0.5).astype(float)
    t = params.tables

    h, c = np.zeros(2), np.zeros(2)
    for cache, x_t in zip(forward_sequence(params, CFG, x), x):
        gates = {}
        for q in GATES:
            a = t[f'w_{q}h'] @ h + t[f'w_{q}x'] @ x_t + t[f'b_{q}h'] + t[f'b_{q}x']
            gates[q] = (a > 0.1).astype(float)
        c_pre = gates['f'] * c + gates['i'] * gates['g']
        c = (c_pre >= 1).astype(float)
        h = gates['o'] * c

        np.testing.assert_array_equal(cache.c_pre, c_pre)
        np.testing.assert_array_equal(cache.h_t, h)


def test_forward_states_matches_sequence():
    params = random_layer(2, 3, 5)
    x = (RngStream(3).uniform((6, 4, 3)) < 0.5).astype(float)
    hidden, h_T, c_T = forward_states(params, CFG, x)
    caches = forward_sequence(params, CFG, x)
    np.testing.assert_array_equal(hidden, np.stack([c.h_t for c in caches]))
    np.testing.assert_array_equal(h_T, caches[-1].h_t)
    np.testing.assert_array_equal(c_T, caches[-1].c_t)


def test_binary_invariant_fuzz():
    """10^4 random sequences in one batch, every gate and state binary."""
    rng = RngStream(2024)
    for trial in range(4):
        params = random_layer(trial, 3, 5, bias_scale=1.0)
        x = (rng.uniform((6, 2500, 3)) < 0.5).astype(float)
        for cache in forward_sequence(params, CFG, x):
            for arr in (cache.f, cache.i, cache.g, cache.o, cache.c_t, cache.h_t):
                assert np.all((arr == 0) | (arr == 1))
            assert np.all(np.isin(cache.c_pre, (0.0, 1.0, 2.0)))


def test_hidden_permutation_symmetry():
    """Relabelling hidden units permutes the states and nothing else."""
    params = random_layer(8, 3, 4)
    perm = np.array([2, 0, 3, 1])

    permuted = params.copy()
    for name, arr in permuted.tables.items():
        arr = arr[perm]
        if name.endswith('h') and name.startswith('w_'):
            arr = arr[:, perm]
        permuted.tables[name] = arr

    x = (RngStream(1).uniform((5, 3)) < 0.5).astype(float)
    hidden, _, _ = forward_states(params, CFG, x)
    hidden_perm, _, _ = forward_states(permuted, CFG, x)
    np.testing.assert_array_equal(hidden[:, perm], hidden_perm)


def swap_input_forget(params: LayerParams) -> LayerParams:
    swapped = params.copy()
    for kind in ('w_{}h', 'w_{}x', 'b_{}h', 'b_{}x'):
        f_name, i_name = kind.format('f'), kind.format('i')
        swapped.tables[f_name] = params.tables[i_name].copy()
        swapped.tables[i_name] = params.tables[f_name].copy()
    return swapped


@pytest.mark.parametrize('seed', range(6))
def test_input_forget_swap_symmetry(seed):
    """With c_prev = g = 1 the cell sum is symmetric in f and i, so swapping
    their weights swaps their gradients."""
    params = random_layer(seed, 1, 1, bias_scale=1.0)
    params.tables['w_gx'][...] = 5.0
    for name in ('w_gh', 'b_gh', 'b_gx'):
        params.tables[name][...] = 0.0
    swapped = swap_input_forget(params)

    x, h_prev, c_prev = np.array([1.0]), np.array([1.0]), np.array([1.0])
    dh, dc_carry = np.array([0.7]), np.array([-0.4])

    cache = forward_step(params, CFG, x, h_prev, c_prev)
    cache_sw = forward_step(swapped, CFG, x, h_prev, c_prev)
    assert cache.g[0] == 1.0

    np.testing.assert_array_equal(cache_sw.a_i, cache.a_f)
    np.testing.assert_array_equal(cache_sw.a_f, cache.a_i)
    np.testing.assert_array_equal(cache_sw.h_t, cache.h_t)

    step = backward_step(params, CFG, cache, dh, dc_carry)
    step_sw = backward_step(swapped, CFG, cache_sw, dh, dc_carry)

    np.testing.assert_allclose(step_sw.d_gate['i'], step.d_gate['f'], rtol=0, atol=1e-15)
    np.testing.assert_allclose(step_sw.d_gate['f'], step.d_gate['i'], rtol=0, atol=1e-15)
    np.testing.assert_allclose(step_sw.delta['i'], step.delta['f'], rtol=0, atol=1e-15)
    np.testing.assert_allclose(step_sw.delta['f'], step.delta['i'], rtol=0, atol=1e-15)
    np.testing.assert_allclose(step_sw.dh_prev, step.dh_prev, rtol=1e-14, atol=1e-15)


def test_backward_zero_cotangent():
    params = random_layer(3, 2, 3)
    (cache, ) = forward_sequence(params, CFG, np.array([[1.0, 1.0]]))
    step = backward_step(params, CFG, cache, np.zeros(3), np.zeros(3))
    for q in GATES:
        assert np.all(step.d_gate[q] == 0)
        assert np.all(step.delta[q] == 0)
    assert np.all(step.dh_prev == 0)
    assert np.all(step.dc_prev == 0)


def test_backward_output_gate():
    (cache, ) = forward_sequence(unit_layer(), CFG, np.array([[1.0]]))
    assert cache.c_t[0] == 1
    step = backward_step(unit_layer(), CFG, cache, np.array([0.3]), np.array([0.0]))
    assert step.d_gate['o'][0] == pytest.approx(0.3)


def test_backward_shape_mismatch():
    (cache, ) = forward_sequence(unit_layer(), CFG, np.array([[1.0]]))
    with pytest.raises(ShapeError):
        backward_step(unit_layer(), CFG, cache, np.zeros(2), np.zeros(1))


def test_bptt_zero_cotangents():
    params = random_layer(6, 2, 3)
    caches = forward_sequence(params, CFG, np.ones((4, 2)))
    grads = bptt(params, CFG, caches, [np.zeros(3)] * 4)
    assert all(np.all(arr == 0) for arr in grads.tables.values())


def test_bptt_single_step():
    params = random_layer(6, 2, 3, bias_scale=1.0)
    x = np.array([[1.0, 0.0]])
    caches = forward_sequence(params, CFG, x)
    dh = np.array([0.2, -0.7, 1.1])
    grads = bptt(params, CFG, caches, [dh])
    step = backward_step(params, CFG, caches[0], dh, np.zeros(3))

    for q in GATES:
        np.testing.assert_array_equal(grads[f'w_{q}x'], np.outer(step.delta[q], x[0]))
        np.testing.assert_array_equal(grads[f'b_{q}h'], step.delta[q])
        assert np.all(grads[f'w_{q}h'] == 0)


def test_bptt_carry_two_steps():
    """Hand-expanded two-step instance.

    Step 1 ends with c_pre = 1, step 2 with c_pre = 2; only h_2 receives a
    gradient. The threshold factor 0.5 applies at step 2 on the path from
    h_2, the memory line carries dc_2 back to step 1 unchanged.
    """
    params = unit_layer()
    caches = forward_sequence(params, CFG, np.array([[1.0], [1.0]]))
    assert [c.c_pre[0] for c in caches] == [1.0, 2.0]

    grads = bptt(params, CFG, caches, [np.zeros(1), np.ones(1)])

    expected = {
        'w_fx': 0.5 * P1,
        'w_ix': P1,
        'w_gx': P2,
        'w_ox': P1,
        'w_fh': 0.5 * P1,
        'w_ih': 0.5 * P1,
        'w_gh': 0.5 * P2,
        'w_oh': P1,
    }
    for name, value in expected.items():
        assert grads[name][0, 0] == pytest.approx(value, rel=1e-13), name
    for q in GATES:
        assert grads[f'b_{q}x'][0] == grads[f'b_{q}h'][0] == grads[f'w_{q}x'][0, 0]

    assert grads.dc0[0] == pytest.approx(0.5)
    assert grads.dh0[0] == 0.0


def test_bptt_matches_reference():
    layer = random_layer(10, 2, 3, bias_scale=1.0)
    rng = RngStream(10).spawn(5)
    head = LinearHead(rng.standard_normal(6).reshape(2, 3), np.zeros(2))
    network = SpikingNetwork(layer=layer, head=head, surrogate=CFG)

    inputs = (rng.uniform((4, 1, 2)) < 0.5).astype(float)
    targets = rng.standard_normal(8).reshape(4, 1, 2)

    grads = network.loss_and_grads(inputs, targets, 'every').grads
    reference = reference_gradient(network, inputs, targets, 'every')
    report = compare_gradients(grads, reference)

    assert report.max_rel_err <= 1e-10, str(report)
