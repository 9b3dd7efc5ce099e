"""The LSTM spiking layer.

Forward dynamics for gate `q` in (f, i, g, o) at step t:

```
a_q   = w_qh h_{t-1} + w_qx x_t + b_qh + b_qx
f, i, o = sigma_1(a_f), sigma_1(a_i), sigma_1(a_o)
g     = sigma_2(a_g)
c_pre = f * c_{t-1} + i * g          (values 0, 1, 2)
c_t   = cell_threshold(c_pre)
h_t   = o * c_t
```

Vectors may carry a leading batch axis; matrices act on the last axis
(`h @ w.T`). The backward pass is written out by hand (`backward_step`,
`bptt`), with surrogate derivatives in place of the threshold derivatives.

The products go through numpy `@`, whose summation order is up to the BLAS
library. Runs are bit-for-bit repeatable on one numpy and BLAS build;
`numerics.gemm` gives the fixed-order product used by the reference
gradients in `gradcheck`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConfigError, InvariantError, ShapeError
from .numerics import RngStream, draw_standard_normal
from .spike_core import (
    SurrogateConfig,
    cell_threshold,
    cell_threshold_grad,
    spike_sigma,
    surrogate_deriv,
)

logger = logging.getLogger(__name__)

GATES = ('f', 'i', 'g', 'o')


def layer_table_names() -> list[str]:
    """Parameter tables of one layer in checkpoint and fill order."""
    names = []
    for q in GATES:
        names += [f'w_{q}h', f'w_{q}x', f'b_{q}h', f'b_{q}x']
    return names


def _gate_constants(q: str, cfg: SurrogateConfig) -> tuple[float, float]:
    """Threshold and surrogate width of gate `q`."""
    if q == 'g':
        return cfg.theta2, cfg.alpha2
    return cfg.theta1, cfg.alpha1


def _check_binary(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all((arr == 0) | (arr == 1)):
        raise InvariantError(f'`{name}` must be binary')
    return arr


@dataclass
class LayerParams:
    """Weights and biases of one LSTM spiking layer.

    `tables` maps `w_qh` (hidden x hidden), `w_qx` (hidden x input),
    `b_qh` and `b_qx` (hidden) for every gate `q`.
    """
    input_size: int
    hidden_size: int
    tables: dict[str, np.ndarray]

    def __post_init__(self):
        shapes = self.table_shapes(self.input_size, self.hidden_size)
        if set(self.tables) != set(shapes):
            raise ShapeError(f'expected tables {sorted(shapes)}, got {sorted(self.tables)}')
        for name, shape in shapes.items():
            if self.tables[name].shape != shape:
                raise ShapeError(
                    f'table `{name}` has shape {self.tables[name].shape}, expected {shape}')

    @staticmethod
    def table_shapes(input_size: int, hidden_size: int) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for q in GATES:
            shapes[f'w_{q}h'] = (hidden_size, hidden_size)
            shapes[f'w_{q}x'] = (hidden_size, input_size)
            shapes[f'b_{q}h'] = (hidden_size, )
            shapes[f'b_{q}x'] = (hidden_size, )
        return shapes

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> LayerParams:
        shapes = cls.table_shapes(input_size, hidden_size)
        return cls(input_size, hidden_size,
                   {name: np.zeros(shape) for name, shape in shapes.items()})

    def copy(self) -> LayerParams:
        return LayerParams(self.input_size, self.hidden_size,
                           {name: arr.copy() for name, arr in self.tables.items()})

    def preactivation(self, q: str, x_t: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
        """Membrane potential of gate `q`."""
        t = self.tables
        return (h_prev @ t[f'w_{q}h'].T + x_t @ t[f'w_{q}x'].T + t[f'b_{q}h'] +
                t[f'b_{q}x'])


def init_params(input_size: int, hidden_size: int, rng: RngStream) -> LayerParams:
    """Standard normal weights, zero biases.

    Weights are filled gate by gate (f, i, g, o), recurrent table before
    input table, each in row-major order, from a single draw of `rng`.
    """
    if input_size < 1 or hidden_size < 1:
        raise ConfigError(
            f'layer sizes must be >= 1, got input={input_size}, hidden={hidden_size}')

    params = LayerParams.zeros(input_size, hidden_size)
    weights = [name for name in layer_table_names() if name.startswith('w_')]
    n_total = sum(params.tables[name].size for name in weights)
    draws = draw_standard_normal(rng, n_total)

    offset = 0
    for name in weights:
        table = params.tables[name]
        table[...] = draws[offset:offset + table.size].reshape(table.shape)
        offset += table.size

    return params


@dataclass
class StepCache:
    """Everything the backward pass needs from one forward step."""
    x_t: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    a_f: np.ndarray
    a_i: np.ndarray
    a_g: np.ndarray
    a_o: np.ndarray
    f: np.ndarray
    i: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c_pre: np.ndarray
    c_t: np.ndarray
    h_t: np.ndarray

    def pre(self, q: str) -> np.ndarray:
        return getattr(self, f'a_{q}')

    def gate(self, q: str) -> np.ndarray:
        return getattr(self, q)


@dataclass
class GradientSet:
    """Gradient accumulators keyed like the parameter tables.

    `dh0` and `dc0` are the recurrent carries left over at the initial
    state after the backward sweep.
    """
    tables: dict[str, np.ndarray]
    dh0: Optional[np.ndarray] = None
    dc0: Optional[np.ndarray] = None

    @classmethod
    def zeros_like(cls, tables: dict[str, np.ndarray]) -> GradientSet:
        return cls({name: np.zeros_like(arr) for name, arr in tables.items()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tables[name]

    def scaled(self, factor: float) -> GradientSet:
        return GradientSet({name: arr * factor for name, arr in self.tables.items()},
                           dh0=self.dh0, dc0=self.dc0)


@dataclass
class BackwardStep:
    """Result of one step of the backward pass.

    `d_gate` holds dL/dq for each gate output, `delta` the same values
    multiplied by the surrogate derivative at the gate's membrane
    potential (dL/da_q).
    """
    d_gate: dict[str, np.ndarray] = field(default_factory=dict)
    delta: dict[str, np.ndarray] = field(default_factory=dict)
    dh_prev: Optional[np.ndarray] = None
    dc_prev: Optional[np.ndarray] = None


def forward_step(params: LayerParams, cfg: SurrogateConfig, x_t: np.ndarray,
                 h_prev: np.ndarray, c_prev: np.ndarray) -> StepCache:
    """Advance the layer by one step."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = _check_binary(np.asarray(h_prev, dtype=np.float64), 'h_prev')
    c_prev = _check_binary(np.asarray(c_prev, dtype=np.float64), 'c_prev')

    if x_t.shape[-1] != params.input_size:
        raise ShapeError(f'input has {x_t.shape[-1]} features, layer expects '
                         f'{params.input_size}')
    if h_prev.shape[-1] != params.hidden_size or c_prev.shape != h_prev.shape:
        raise ShapeError(f'state shapes {h_prev.shape} / {c_prev.shape} do not match '
                         f'hidden size {params.hidden_size}')

    pre = {q: params.preactivation(q, x_t, h_prev) for q in GATES}
    spikes = {}
    for q in GATES:
        theta, _ = _gate_constants(q, cfg)
        spikes[q] = spike_sigma(pre[q], theta)

    c_pre = spikes['f'] * c_prev + spikes['i'] * spikes['g']
    c_t = cell_threshold(c_pre)
    h_t = spikes['o'] * c_t

    return StepCache(x_t=x_t,
                     h_prev=h_prev,
                     c_prev=c_prev,
                     a_f=pre['f'],
                     a_i=pre['i'],
                     a_g=pre['g'],
                     a_o=pre['o'],
                     f=spikes['f'],
                     i=spikes['i'],
                     g=spikes['g'],
                     o=spikes['o'],
                     c_pre=c_pre,
                     c_t=c_t,
                     h_t=h_t)


def _initial_state(inputs: np.ndarray, hidden_size: int, h0, c0):
    shape = (*inputs.shape[1:-1], hidden_size)
    h0 = np.zeros(shape) if h0 is None else np.asarray(h0, dtype=np.float64)
    c0 = np.zeros(shape) if c0 is None else np.asarray(c0, dtype=np.float64)
    return h0, c0


def forward_sequence(params: LayerParams,
                     cfg: SurrogateConfig,
                     inputs,
                     h0: Optional[np.ndarray] = None,
                     c0: Optional[np.ndarray] = None) -> list[StepCache]:
    """Run the layer over a time-major input sequence.

    Parameters
    ----------
    inputs : array_like
        Shape (T, features) or (T, batch, features).
    h0, c0 : np.ndarray, optional
        Initial binary states, zero by default.

    Returns
    -------
    list[StepCache]
        One cache per step.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim < 2 or len(inputs) < 1:
        raise ShapeError(f'need a time-major sequence with T >= 1, got {inputs.shape}')

    h, c = _initial_state(inputs, params.hidden_size, h0, c0)

    caches = []
    for x_t in inputs:
        cache = forward_step(params, cfg, x_t, h, c)
        caches.append(cache)
        h, c = cache.h_t, cache.c_t

    return caches


def forward_states(params: LayerParams,
                   cfg: SurrogateConfig,
                   inputs,
                   h0: Optional[np.ndarray] = None,
                   c0: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Like `forward_sequence`, but keep only the hidden states.

    Returns
    -------
    hidden : np.ndarray
        Hidden states, shape (T, ..., hidden).
    h_T, c_T : np.ndarray
        Final states.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    h, c = _initial_state(inputs, params.hidden_size, h0, c0)

    hidden = np.empty((*inputs.shape[:-1], params.hidden_size))
    for t, x_t in enumerate(inputs):
        cache = forward_step(params, cfg, x_t, h, c)
        h, c = cache.h_t, cache.c_t
        hidden[t] = h

    return hidden, h, c


def backward_step(params: LayerParams, cfg: SurrogateConfig, cache: StepCache,
                  dL_dh_t: np.ndarray, dL_dc_carry: np.ndarray) -> BackwardStep:
    """Propagate the loss gradient through one forward step.

    The cell threshold factor gamma applies to the path through `h_t`;
    the memory carry from the next step is added unchanged.
    """
    dh = np.asarray(dL_dh_t, dtype=np.float64)
    dc_carry = np.asarray(dL_dc_carry, dtype=np.float64)

    if dh.shape != cache.h_t.shape or dc_carry.shape != cache.c_t.shape:
        raise ShapeError(f'cotangent shapes {dh.shape} / {dc_carry.shape} do not '
                         f'match state shape {cache.h_t.shape}')

    dc = cell_threshold_grad(cache.c_pre, cfg) * cache.o * dh + dc_carry

    d_gate = {
        'o': cache.c_t * dh,
        'i': cache.g * dc,
        'g': cache.i * dc,
        'f': cache.c_prev * dc,
    }

    delta = {}
    dh_prev = np.zeros_like(dh)
    for q in GATES:
        theta, alpha = _gate_constants(q, cfg)
        delta[q] = surrogate_deriv(cache.pre(q), theta, alpha) * d_gate[q]
        dh_prev += delta[q] @ params.tables[f'w_{q}h']

    return BackwardStep(d_gate=d_gate,
                        delta=delta,
                        dh_prev=dh_prev,
                        dc_prev=cache.f * dc)


def bptt(params: LayerParams,
         cfg: SurrogateConfig,
         caches: Sequence[StepCache],
         dL_dh_seq: Sequence[np.ndarray],
         dL_dc_final: Optional[np.ndarray] = None) -> GradientSet:
    """Backpropagation through time over a full sequence.

    Parameters
    ----------
    caches : Sequence[StepCache]
        Forward caches, one per step.
    dL_dh_seq : Sequence[np.ndarray]
        Loss gradient w.r.t. each hidden state from outside the layer
        (typically the output head). Not modified.
    dL_dc_final : np.ndarray, optional
        Gradient w.r.t. the last cell state, zero by default.

    Returns
    -------
    GradientSet
        Gradients summed over steps (and batch entries).
    """
    if len(caches) != len(dL_dh_seq):
        raise ShapeError(f'{len(caches)} caches but {len(dL_dh_seq)} cotangents')

    grads = GradientSet.zeros_like(params.tables)
    if not caches:
        return grads

    dh_carry = np.zeros_like(caches[-1].h_t)
    dc_carry = (np.zeros_like(caches[-1].c_t)
                if dL_dc_final is None else np.asarray(dL_dc_final, dtype=np.float64))

    for cache, dh_ext in zip(reversed(caches), reversed(dL_dh_seq)):
        step = backward_step(params, cfg, cache, np.asarray(dh_ext) + dh_carry, dc_carry)

        x_t = np.atleast_2d(cache.x_t)
        h_prev = np.atleast_2d(cache.h_prev)
        for q in GATES:
            delta = np.atleast_2d(step.delta[q])
            grads.tables[f'w_{q}x'] += delta.T @ x_t
            grads.tables[f'w_{q}h'] += delta.T @ h_prev
            db = delta.sum(axis=0)
            grads.tables[f'b_{q}x'] += db
            grads.tables[f'b_{q}h'] += db

        dh_carry, dc_carry = step.dh_prev, step.dc_prev

    grads.dh0 = dh_carry
    grads.dc0 = dc_carry

    return grads
