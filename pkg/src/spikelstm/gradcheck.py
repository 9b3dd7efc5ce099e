"""Independent checks of the hand-written backward pass.

`reference_gradient` unrolls the network into an explicit graph of small
nodes and runs reverse accumulation node by node. Spike nodes carry the
Gaussian surrogate as their local derivative, cell-threshold nodes carry
gamma. The memory line leaves the cell sum through its own `cell-carry`
node whose local derivative is 1.

`finite_diff_head_check` verifies the output head, the only part of the
network that is differentiable in the ordinary sense, against central
differences with the hidden spikes held fixed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .exceptions import DomainError, GradcheckError, ShapeError, SizeError
from .heads import Head, cross_entropy, head_backward, softmax
from .lstm_snn import GATES, GradientSet, _gate_constants
from .network import LossMode, SpikingNetwork
from .numerics import RngStream, gemm
from .spike_core import (
    SurrogateConfig,
    cell_threshold,
    cell_threshold_grad,
    spike_sigma,
    surrogate_deriv,
)

logger = logging.getLogger(__name__)

MAX_PARAMETERS = 500
REL_FLOOR = 1e-12
FD_REL_FLOOR = 1e-8

NodeKind = Literal['input', 'add', 'matvec', 'hadamard', 'spike-sigma1', 'spike-sigma2',
                   'cell-threshold', 'cell-carry', 'softmax', 'loss']


def _matvec(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    return gemm(w, np.reshape(x, (-1, 1)))[:, 0]


@dataclass
class GraphNode:
    """One operation in the unrolled graph.

    `local` holds the recorded local derivative for elementwise nodes
    (spike and cell nodes), `grad` the accumulated adjoint.
    """
    kind: NodeKind
    inputs: tuple[int, ...]
    value: np.ndarray
    local: Optional[np.ndarray] = None
    grad: Optional[np.ndarray] = None
    name: str = ''
    extra: dict = field(default_factory=dict)


class Graph:
    """Acyclic graph built in evaluation order."""

    def __init__(self):
        self.nodes: list[GraphNode] = []

    def _push(self, node: GraphNode) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def value(self, idx: int) -> np.ndarray:
        return self.nodes[idx].value

    def input(self, value, name: str = '') -> int:
        return self._push(GraphNode('input', (), np.array(value, dtype=np.float64), name=name))

    def add(self, *idx: int) -> int:
        value = self.value(idx[0])
        for i in idx[1:]:
            value = value + self.value(i)
        return self._push(GraphNode('add', tuple(idx), value))

    def matvec(self, w: int, x: int) -> int:
        return self._push(GraphNode('matvec', (w, x), _matvec(self.value(w), self.value(x))))

    def hadamard(self, a: int, b: int) -> int:
        return self._push(GraphNode('hadamard', (a, b), self.value(a) * self.value(b)))

    def spike(self, a: int, theta: float, alpha: float, kind: NodeKind) -> int:
        u = self.value(a)
        return self._push(
            GraphNode(kind, (a, ), spike_sigma(u, theta), local=surrogate_deriv(u, theta, alpha)))

    def cell_threshold(self, v: int, cfg: SurrogateConfig) -> int:
        pre = self.value(v)
        return self._push(
            GraphNode('cell-threshold', (v, ),
                      cell_threshold(pre),
                      local=cell_threshold_grad(pre, cfg)))

    def cell_carry(self, v: int) -> int:
        pre = self.value(v)
        return self._push(
            GraphNode('cell-carry', (v, ), cell_threshold(pre), local=np.ones_like(pre)))

    def softmax(self, z: int) -> int:
        return self._push(GraphNode('softmax', (z, ), softmax(self.value(z))))

    def ce_loss(self, y: int, label: int) -> int:
        p = self.value(y)[label]
        return self._push(
            GraphNode('loss', (y, ), np.array(-np.log(p)), extra={
                'kind': 'ce',
                'label': label
            }))

    def mse_loss(self, y: int, target) -> int:
        target = np.asarray(target, dtype=np.float64)
        diff = self.value(y) - target
        return self._push(
            GraphNode('loss', (y, ),
                      np.array(0.5 * np.sum(diff * diff)),
                      extra={
                          'kind': 'mse',
                          'target': target
                      }))

    def backward(self, root: int) -> None:
        """Reverse accumulation from the scalar node `root`."""
        for node in self.nodes:
            node.grad = np.zeros_like(node.value)
        self.nodes[root].grad = np.ones_like(self.nodes[root].value)

        for node in reversed(self.nodes[:root + 1]):
            g = node.grad
            if node.kind == 'input':
                continue
            elif node.kind == 'add':
                for i in node.inputs:
                    self.nodes[i].grad = self.nodes[i].grad + g
            elif node.kind == 'matvec':
                w, x = (self.nodes[i] for i in node.inputs)
                w.grad = w.grad + np.outer(g, x.value)
                x.grad = x.grad + _matvec(w.value.T, g)
            elif node.kind == 'hadamard':
                a, b = (self.nodes[i] for i in node.inputs)
                a.grad = a.grad + g * b.value
                b.grad = b.grad + g * a.value
            elif node.kind == 'softmax':
                z = self.nodes[node.inputs[0]]
                y = node.value
                z.grad = z.grad + y * (g - np.sum(g * y))
            elif node.kind == 'loss':
                y = self.nodes[node.inputs[0]]
                if node.extra['kind'] == 'ce':
                    dy = np.zeros_like(y.value)
                    label = node.extra['label']
                    dy[label] = -1.0 / y.value[label]
                else:
                    dy = y.value - node.extra['target']
                y.grad = y.grad + g * dy
            else:
                src = self.nodes[node.inputs[0]]
                src.grad = src.grad + node.local * g


def parameter_count(network: SpikingNetwork) -> int:
    return sum(arr.size for arr in network.tables().values())


def _single_sequence(inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 3:
        if x.shape[1] != 1:
            raise ShapeError(f'the reference engine handles batch size 1, got {x.shape}')
        x = x[:, 0, :]
    if x.ndim != 2:
        raise ShapeError(f'expected inputs (T, features), got {x.shape}')
    return x


def unroll(network: SpikingNetwork, inputs, targets,
           mode: LossMode) -> tuple[Graph, int, dict[str, int]]:
    """Build the graph of the full loss for one sequence.

    Returns
    -------
    graph, loss_node, param_nodes
    """
    x_seq = _single_sequence(inputs)
    targets = np.asarray(targets)
    if targets.ndim >= 2 and targets.shape[1] == 1 and network.head.kind == 'softmax':
        targets = targets[:, 0]
    elif targets.ndim == 3:
        targets = targets[:, 0, :]

    cfg = network.surrogate
    graph = Graph()
    params = {name: graph.input(arr, name) for name, arr in network.tables().items()}

    h = graph.input(np.zeros(network.hidden_size), 'h0')
    c = graph.input(np.zeros(network.hidden_size), 'c0')

    T = len(x_seq)
    scored = range(T) if mode == 'every' else (T - 1, )
    losses = []

    for t, x_t in enumerate(x_seq):
        x = graph.input(x_t, f'x{t}')

        gate = {}
        for q in GATES:
            a = graph.add(graph.matvec(params[f'w_{q}h'], h), graph.matvec(params[f'w_{q}x'], x),
                          params[f'b_{q}h'], params[f'b_{q}x'])
            theta, alpha = _gate_constants(q, cfg)
            gate[q] = graph.spike(a, theta, alpha, 'spike-sigma2' if q == 'g' else 'spike-sigma1')

        c_pre = graph.add(graph.hadamard(gate['f'], c), graph.hadamard(gate['i'], gate['g']))
        c_out = graph.cell_threshold(c_pre, cfg)
        c = graph.cell_carry(c_pre)
        h = graph.hadamard(gate['o'], c_out)

        if t in scored:
            logits = graph.add(graph.matvec(params['w_y'], h), params['b_y'])
            if network.head.kind == 'softmax':
                losses.append(graph.ce_loss(graph.softmax(logits), int(targets[t])))
            else:
                losses.append(graph.mse_loss(logits, targets[t]))

    loss = graph.add(*losses)
    return graph, loss, params


def reference_gradient(network: SpikingNetwork, inputs, targets, mode: LossMode) -> GradientSet:
    """Surrogate-gradient chain rule on the explicit graph.

    Parameters
    ----------
    network : SpikingNetwork
        Layer, head and surrogate settings.
    inputs : array_like
        Shape (T, features) or (T, 1, features).
    targets : array_like
        Labels (T,) for a softmax head, values (T, output) for a linear head.
    mode : {'final', 'every'}
        Steps that contribute to the loss.

    Raises
    ------
    SizeError
        When the network has more than 500 parameters.
    """
    n_params = parameter_count(network)
    if n_params > MAX_PARAMETERS:
        raise SizeError(f'{n_params} parameters, the reference engine accepts at most '
                        f'{MAX_PARAMETERS}')

    graph, loss, params = unroll(network, inputs, targets, mode)
    graph.backward(loss)

    return GradientSet({name: graph.nodes[idx].grad.copy() for name, idx in params.items()})


@dataclass
class TableError:
    name: str
    max_abs: float
    max_rel: float


@dataclass
class GradientReport:
    """Per-table errors, worst first."""
    tables: list[TableError]

    @property
    def max_abs_err(self) -> float:
        return max((t.max_abs for t in self.tables), default=0.0)

    @property
    def max_rel_err(self) -> float:
        return max((t.max_rel for t in self.tables), default=0.0)

    @property
    def worst_table(self) -> Optional[str]:
        return self.tables[0].name if self.tables else None

    def __str__(self):
        lines = [f'{"table":8s} {"max abs":>12s} {"max rel":>12s}']
        lines += [f'{t.name:8s} {t.max_abs:12.3e} {t.max_rel:12.3e}' for t in self.tables]
        return '\n'.join(lines)


def compare_gradients(a: GradientSet, b: GradientSet) -> GradientReport:
    """Elementwise comparison with relative error `|a - b| / max(|a|, |b|, 1e-12)`.

    Raises
    ------
    ShapeError
        When the two sets have different tables or shapes.
    """
    if set(a.tables) != set(b.tables):
        raise ShapeError(f'gradient sets differ: {sorted(a.tables)} vs {sorted(b.tables)}')

    errors = []
    for name in a.tables:
        x, y = a[name], b[name]
        if x.shape != y.shape:
            raise ShapeError(f'table `{name}` has shapes {x.shape} and {y.shape}')
        diff = np.abs(x - y)
        denom = np.maximum(np.maximum(np.abs(x), np.abs(y)), REL_FLOOR)
        errors.append(
            TableError(name,
                       float(diff.max(initial=0.0)),
                       float((diff / denom).max(initial=0.0))))

    errors.sort(key=lambda e: (-e.max_rel, -e.max_abs, e.name))
    return GradientReport(errors)


def _head_loss(head: Head, hidden: np.ndarray, targets: np.ndarray, scored: Sequence[int]) -> float:
    batch = hidden.shape[1]
    total = 0.0
    for t in scored:
        y = head.forward(hidden[t])
        if head.kind == 'softmax':
            total += float(cross_entropy(y, targets[t].astype(np.int64)).sum())
        else:
            diff = y - targets[t]
            total += float(0.5 * np.sum(diff * diff))
    return total / batch


def _head_analytic(head: Head, hidden: np.ndarray, targets: np.ndarray,
                   scored: Sequence[int]) -> dict[str, np.ndarray]:
    batch = hidden.shape[1]
    grads = {name: np.zeros_like(arr) for name, arr in head.tables().items()}
    for t in scored:
        y = head.forward(hidden[t])
        if head.kind == 'softmax':
            dy = y.copy()
            dy[np.arange(batch), targets[t].astype(np.int64)] -= 1.0
        else:
            dy = y - targets[t]
        _, dw, db = head_backward(head, hidden[t], dy / batch)
        grads['w_y'] += dw
        grads['b_y'] += db
    return grads


def finite_diff_head_check(head: Head,
                           hidden,
                           targets,
                           step: float = 1e-6,
                           mode: LossMode = 'every') -> float:
    """Central differences on every head parameter against `head_backward`.

    Parameters
    ----------
    head : Head
        Softmax head (cross-entropy) or linear head (least squares).
    hidden : array_like
        Fixed hidden sequence, shape (T, hidden) or (T, batch, hidden).
    targets : array_like
        Labels (T,) / (T, batch), or values (T, output) / (T, batch, output).
    step : float
        Difference step, in [1e-8, 1e-4].

    Returns
    -------
    float
        Maximum relative error `|a - n| / max(|a|, |n|, 1e-8)`.
    """
    if not 1e-8 <= step <= 1e-4:
        raise DomainError(f'step must lie in [1e-8, 1e-4], got {step}')

    hidden = np.asarray(hidden, dtype=np.float64)
    targets = np.asarray(targets)
    if hidden.ndim == 2:
        hidden = hidden[:, None, :]
        targets = targets[:, None, ...]

    scored = range(len(hidden)) if mode == 'every' else (len(hidden) - 1, )
    analytic = _head_analytic(head, hidden, targets, scored)

    worst = 0.0
    for name, table in head.tables().items():
        for k in np.ndindex(table.shape):
            orig = table[k]
            table[k] = orig + step
            plus = _head_loss(head, hidden, targets, scored)
            table[k] = orig - step
            minus = _head_loss(head, hidden, targets, scored)
            table[k] = orig

            numeric = (plus - minus) / (2 * step)
            a = analytic[name][k]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), FD_REL_FLOOR)
            worst = max(worst, rel)

    return worst


@dataclass
class TrialResult:
    index: int
    input_size: int
    hidden_size: int
    output_size: int
    steps: int
    head: str
    mode: str
    report: GradientReport

    def summary(self) -> str:
        return (f'trial {self.index:3d}: input={self.input_size} hidden={self.hidden_size} '
                f'output={self.output_size} steps={self.steps} head={self.head:7s} '
                f'mode={self.mode:5s} max_rel={self.report.max_rel_err:.3e} '
                f'({self.report.worst_table})')


def random_instance(rng: RngStream, index: int, max_input: int, max_hidden: int,
                    max_steps: int):
    """Small random network, input sequence and targets for trial `index`."""
    sizes = rng.spawn(0).choice(1000, size=4)
    input_size = 1 + int(sizes[0]) % max_input
    hidden_size = 1 + int(sizes[1]) % max_hidden
    steps = 1 + int(sizes[2]) % max_steps
    output_size = 1 + int(sizes[3]) % 3
    head = 'softmax' if index % 2 == 0 else 'linear'
    mode: LossMode = 'every' if (index // 2) % 2 == 0 else 'final'

    network = SpikingNetwork.initialize(input_size=input_size,
                                        hidden_size=hidden_size,
                                        output_size=output_size,
                                        head=head,
                                        surrogate=SurrogateConfig(),
                                        rng=rng.spawn(1))
    bias_rng = rng.spawn(2)
    for name, arr in network.layer.tables.items():
        if name.startswith('b_'):
            arr[...] = 0.5 * bias_rng.standard_normal(arr.size).reshape(arr.shape)

    data_rng = rng.spawn(3)
    inputs = (data_rng.uniform((steps, 1, input_size)) < 0.5).astype(np.float64)
    if head == 'softmax':
        targets = data_rng.choice(output_size, size=(steps, 1))
    else:
        targets = data_rng.standard_normal(steps * output_size).reshape(steps, 1, output_size)

    return network, inputs, targets, mode


def run_gradcheck(trials: int = 20,
                  seed: int = 0,
                  *,
                  max_input: int = 4,
                  max_hidden: int = 6,
                  max_steps: int = 5,
                  tolerance: float = 1e-10,
                  corrupt: Optional[str] = None,
                  callback: Optional[Callable[[TrialResult], None]] = None
                  ) -> tuple[bool, list[TrialResult]]:
    """Compare `bptt` with the reference engine on random instances.

    Trials alternate between softmax and linear heads and between scoring
    every step and the final step only.

    Parameters
    ----------
    corrupt : str, optional
        Name of a parameter table whose hand-written gradient is offset by
        1e-3 before comparison. Used to test the failure path.

    Returns
    -------
    passed, results
    """
    root = RngStream(seed)
    results = []

    for index in range(trials):
        network, inputs, targets, mode = random_instance(root.spawn(index), index, max_input,
                                                         max_hidden, max_steps)
        grads = network.loss_and_grads(inputs, targets, mode).grads
        hand = GradientSet({name: grads[name] for name in network.tables()})

        if corrupt is not None:
            if corrupt not in hand.tables:
                raise ShapeError(f'unknown table `{corrupt}`')
            hand.tables[corrupt] = hand.tables[corrupt] + 1e-3

        reference = reference_gradient(network, inputs, targets, mode)
        result = TrialResult(index=index,
                             input_size=network.input_size,
                             hidden_size=network.hidden_size,
                             output_size=network.output_size,
                             steps=len(inputs),
                             head=network.head.kind,
                             mode=mode,
                             report=compare_gradients(hand, reference))
        logger.debug(result.summary())
        results.append(result)
        if callback:
            callback(result)

    passed = all(r.report.max_rel_err <= tolerance for r in results)
    return passed, results


def gradcheck(*,
              trials: int = 20,
              seed: int = 0,
              max_input: int = 4,
              max_hidden: int = 6,
              max_steps: int = 5,
              tolerance: float = 1e-10,
              corrupt: Optional[str] = None,
              **kwargs) -> list[TrialResult]:
    """Run `run_gradcheck`, print one line per trial and raise on failure.

    Raises
    ------
    GradcheckError
        If any trial exceeds `tolerance`, naming the worst table.
    """
    from ._logging_utils import snnlog_screen

    passed, results = run_gradcheck(trials,
                                    seed,
                                    max_input=max_input,
                                    max_hidden=max_hidden,
                                    max_steps=max_steps,
                                    tolerance=tolerance,
                                    corrupt=corrupt,
                                    callback=lambda r: snnlog_screen.info(r.summary()))

    if not results:
        snnlog_screen.info('0 trials, nothing to check')
        return results

    worst = max(results, key=lambda r: r.report.max_rel_err)
    snnlog_screen.info(f'{len(results)} trials, max relative error '
                       f'{worst.report.max_rel_err:.3e} in `{worst.report.worst_table}`')

    if not passed:
        failed = sum(r.report.max_rel_err > tolerance for r in results)
        raise GradcheckError(f'{failed} of {len(results)} trials exceed {tolerance:g}, '
                             f'worst: trial {worst.index}, table `{worst.report.worst_table}`, '
                             f'relative error {worst.report.max_rel_err:.3e}')

    return results
