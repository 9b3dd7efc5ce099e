"""One LSTM spiking layer followed by an output head."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .exceptions import ShapeError
from .heads import Head, cross_entropy, head_backward, init_head
from .lstm_snn import GradientSet, LayerParams, StepCache, bptt, forward_sequence, init_params
from .numerics import RngStream
from .spike_core import SurrogateConfig

logger = logging.getLogger(__name__)

LossMode = Literal['final', 'every']


@dataclass
class LossResult:
    """Loss, head outputs and gradients for one batch.

    `loss` is summed over the scored steps and averaged over the batch,
    `step_losses` holds the per-step, per-sample values (zero on steps
    that are not scored).
    """
    loss: float
    outputs: np.ndarray
    step_losses: np.ndarray
    grads: GradientSet
    caches: list[StepCache]


@dataclass
class SpikingNetwork:
    layer: LayerParams
    head: Head
    surrogate: SurrogateConfig

    @classmethod
    def initialize(cls,
                   *,
                   input_size: int,
                   hidden_size: int,
                   output_size: int,
                   head: str,
                   surrogate: SurrogateConfig,
                   rng: RngStream,
                   head_init_scale: float = 1.0) -> SpikingNetwork:
        """Fresh network: layer weights from `rng.spawn(0)`, head weights
        from `rng.spawn(1)`."""
        layer = init_params(input_size, hidden_size, rng.spawn(0))
        out = init_head(head,
                        hidden_size,
                        output_size,
                        rng.spawn(1),
                        scale=head_init_scale)
        return cls(layer=layer, head=out, surrogate=surrogate)

    @property
    def input_size(self) -> int:
        return self.layer.input_size

    @property
    def hidden_size(self) -> int:
        return self.layer.hidden_size

    @property
    def output_size(self) -> int:
        return self.head.output_size

    def tables(self) -> dict[str, np.ndarray]:
        """All parameter tables, layer first, sharing memory with the model."""
        return {**self.layer.tables, **self.head.tables()}

    def forward(self, inputs: np.ndarray) -> tuple[list[StepCache], np.ndarray]:
        """Run the network on `inputs` of shape (T, batch, features)."""
        caches = forward_sequence(self.layer, self.surrogate, inputs)
        hidden = np.stack([cache.h_t for cache in caches])
        return caches, self.head.forward(hidden)

    def loss_and_grads(self, inputs: np.ndarray, targets: np.ndarray,
                       mode: LossMode) -> LossResult:
        """Forward pass, loss and full backward pass.

        Parameters
        ----------
        inputs : np.ndarray
            Shape (T, batch, features).
        targets : np.ndarray
            Softmax head: integer labels of shape (T, batch). Linear head:
            target values of shape (T, batch, output).
        mode : {'final', 'every'}
            Score only the last step, or every step.
        """
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.ndim != 3:
            raise ShapeError(f'expected inputs (T, batch, features), got {inputs.shape}')

        T, batch = inputs.shape[:2]
        if targets.shape[:2] != (T, batch):
            raise ShapeError(f'targets {targets.shape} do not match inputs {inputs.shape}')

        caches, outputs = self.forward(inputs)

        scored = range(T) if mode == 'every' else (T - 1, )
        dL_dy = np.zeros_like(outputs)
        step_losses = np.zeros((T, batch))

        for t in scored:
            if self.head.kind == 'softmax':
                labels = targets[t].astype(np.int64)
                step_losses[t] = cross_entropy(outputs[t], labels)
                dy = outputs[t].copy()
                dy[np.arange(batch), labels] -= 1.0
            else:
                dy = outputs[t] - targets[t]
                step_losses[t] = 0.5 * np.sum(dy * dy, axis=-1)
            dL_dy[t] = dy / batch

        head_grads = {name: np.zeros_like(arr) for name, arr in self.head.tables().items()}
        dL_dh_seq = []
        for cache, dy in zip(caches, dL_dy):
            dh, dw_y, db_y = head_backward(self.head, cache.h_t, dy)
            head_grads['w_y'] += dw_y
            head_grads['b_y'] += db_y
            dL_dh_seq.append(dh)

        grads = bptt(self.layer, self.surrogate, caches, dL_dh_seq)
        grads.tables.update(head_grads)

        loss = float(step_losses.sum() / batch)

        return LossResult(loss=loss,
                          outputs=outputs,
                          step_losses=step_losses,
                          grads=grads,
                          caches=caches)
