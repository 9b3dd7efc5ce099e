"""Output heads, losses and the perplexity metric.

Both heads compute `w_y h + b_y` from the binary hidden state. The softmax
head is trained with cross-entropy, the linear head with least squares;
in both cases the gradient w.r.t. the head output is `y - y_true`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import ClassVar, Sequence, Union

import numpy as np

from .exceptions import DomainError, ShapeError
from .numerics import RngStream, draw_standard_normal

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


@dataclass
class _Head:
    w_y: np.ndarray
    b_y: np.ndarray

    kind: ClassVar[str]

    def __post_init__(self):
        self.w_y = np.asarray(self.w_y, dtype=np.float64)
        self.b_y = np.asarray(self.b_y, dtype=np.float64)
        if self.w_y.ndim != 2 or self.b_y.shape != (self.w_y.shape[0], ):
            raise ShapeError(f'inconsistent head shapes {self.w_y.shape} / {self.b_y.shape}')

    @property
    def output_size(self) -> int:
        return self.w_y.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.w_y.shape[1]

    def tables(self) -> dict[str, np.ndarray]:
        return {'w_y': self.w_y, 'b_y': self.b_y}

    def logits(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=np.float64)
        if h.shape[-1] != self.hidden_size:
            raise ShapeError(f'hidden state has {h.shape[-1]} units, head expects '
                             f'{self.hidden_size}')
        return h @ self.w_y.T + self.b_y


class SoftmaxHead(_Head):
    """Softmax classifier head."""
    kind = 'softmax'

    def forward(self, h: np.ndarray) -> np.ndarray:
        return softmax(self.logits(h))


class LinearHead(_Head):
    """Linear regression head."""
    kind = 'linear'

    def forward(self, h: np.ndarray) -> np.ndarray:
        return self.logits(h)


Head = Union[SoftmaxHead, LinearHead]

HEADS = {head.kind: head for head in (SoftmaxHead, LinearHead)}


def init_head(kind: str,
              hidden_size: int,
              output_size: int,
              rng: RngStream,
              scale: float = 1.0) -> Head:
    """Head with `scale` times standard normal weights and zero bias."""
    w_y = scale * draw_standard_normal(rng, output_size * hidden_size)
    return HEADS[kind](w_y.reshape(output_size, hidden_size), np.zeros(output_size))


def softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Softmax over the last axis, with the maximum subtracted first."""
    z = np.asarray(logits, dtype=np.float64) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_forward(head: SoftmaxHead, h_t: np.ndarray) -> np.ndarray:
    """Class probabilities for binary hidden state `h_t`."""
    return head.forward(h_t)


def ce_output_grad(y: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Gradient of cross-entropy w.r.t. the softmax output: `y - y_true`."""
    y = np.asarray(y, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if y.shape != y_true.shape:
        raise ShapeError(f'prediction {y.shape} and target {y_true.shape} differ')
    return y - y_true


def cross_entropy(y: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Negative log probability of `labels` under `y`, floored at 1e-12."""
    labels = np.asarray(labels)
    p = np.take_along_axis(y, labels[..., None], axis=-1)[..., 0]
    return -np.log(np.maximum(p, PROB_FLOOR))


def head_backward(head: Head, h_t: np.ndarray,
                  dL_dy: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward pass through the head for one step.

    Returns
    -------
    dL_dh : np.ndarray
        `w_y^T dL_dy`, same shape as `h_t`.
    dw_y : np.ndarray
        Outer product `dL_dy (x) h_t`, summed over a batch axis if present.
    db_y : np.ndarray
        `dL_dy`, summed over a batch axis if present.
    """
    h_t = np.asarray(h_t, dtype=np.float64)
    dL_dy = np.asarray(dL_dy, dtype=np.float64)

    if dL_dy.shape[-1] != head.output_size or h_t.shape[:-1] != dL_dy.shape[:-1]:
        raise ShapeError(f'cotangent {dL_dy.shape} does not match head output for '
                         f'hidden {h_t.shape}')

    dL_dh = dL_dy @ head.w_y
    dy2 = np.atleast_2d(dL_dy)
    dw_y = dy2.T @ np.atleast_2d(h_t)
    db_y = dy2.sum(axis=0)

    return dL_dh, dw_y, db_y


def mse_loss_and_grad(y_seq: Sequence[np.ndarray],
                      target_seq: Sequence[np.ndarray]) -> tuple[float, list[np.ndarray]]:
    """Least squares loss `1/2 sum_t ||y_t - target_t||^2` and its gradient
    `y_t - target_t` at every step."""
    if len(y_seq) != len(target_seq):
        raise ShapeError(f'{len(y_seq)} predictions but {len(target_seq)} targets')

    grads = [
        np.asarray(y, dtype=np.float64) - np.asarray(target, dtype=np.float64)
        for y, target in zip(y_seq, target_seq)
    ]
    loss = 0.5 * math.fsum(float(np.sum(g * g)) for g in grads)
    return loss, grads


def perplexity(prob_of_observed: Sequence[float], T: int | None = None) -> float:
    """Perplexity `exp(-1/T sum_t log p_t)` of an observed symbol stream.

    Returns `inf` (and logs a warning) when any probability is zero.
    """
    p = np.asarray(prob_of_observed, dtype=np.float64).reshape(-1)
    T = len(p) if T is None else T

    if T < 1:
        raise DomainError('perplexity needs at least one symbol')
    if np.any(p < 0) or np.any(p > 1):
        raise DomainError('probabilities must lie in [0, 1]')
    if np.any(p == 0):
        logger.warning('Zero probability assigned to %i observed symbol(s), '
                       'perplexity is infinite', int(np.sum(p == 0)))
        return math.inf

    return math.exp(-math.fsum(np.log(p)) / T)
