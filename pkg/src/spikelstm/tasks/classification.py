from __future__ import annotations

import logging
from abc import abstractmethod
from typing import ClassVar

import numpy as np

from ..evaluate import accuracy, classification_accuracy
from ..exceptions import DataFormatError
from ..network import LossMode, LossResult, SpikingNetwork
from ..numerics import RngStream
from .base_task import AbstractTask, Batch, Stream

logger = logging.getLogger(__name__)


def holdout_split(x: np.ndarray, y: np.ndarray, eval_fraction: float):
    """Hold out the last `eval_fraction` of the samples."""
    n_eval = int(round(len(x) * eval_fraction))
    if n_eval < 1 or n_eval >= len(x):
        raise DataFormatError(f'cannot hold out {eval_fraction:.0%} of {len(x)} samples')
    return x[:-n_eval], y[:-n_eval], x[-n_eval:], y[-n_eval:]


class ClassificationTask(AbstractTask):
    """Sequence classification decided from the output at the last step.

    Subclasses load `train_x`, `train_y`, `eval_x` and `eval_y` and define
    how raw samples are rate coded.
    """
    head_kind = 'softmax'
    metric_name = 'accuracy'
    default_loss_mode: ClassVar[LossMode] = 'final'
    default_batch_size = 128

    train_x: np.ndarray
    train_y: np.ndarray
    eval_x: np.ndarray
    eval_y: np.ndarray

    @abstractmethod
    def encode(self, raw: np.ndarray, rng: RngStream) -> np.ndarray:
        """Spike inputs (T, batch, features) for raw samples (batch, ...)."""
        pass

    def _check_labels(self, n_classes: int):
        for labels in (self.train_y, self.eval_y):
            if len(labels) and labels.max() >= n_classes:
                raise DataFormatError(
                    f'label {labels.max()} out of range for {n_classes} classes')

    def _limit_eval(self):
        limit = self.options.eval_limit
        if limit is not None:
            self.eval_x, self.eval_y = self.eval_x[:limit], self.eval_y[:limit]

    def encode_indices(self, idx: np.ndarray, rng: RngStream) -> np.ndarray:
        raw = self.train_x[idx]
        if self.cfg.training.resample:
            return self.encode(raw, rng)

        fixed = self.root.spawn(Stream.FIXED_ENCODING)
        return np.concatenate(
            [self.encode(raw[k:k + 1], fixed.spawn(int(i))) for k, i in enumerate(idx)], axis=1)

    def sample_batch(self, rng: RngStream, batch_size: int) -> Batch:
        self.prepare()
        idx = rng.choice(len(self.train_x), size=batch_size)
        inputs = self.encode_indices(idx, rng)
        targets = np.broadcast_to(self.train_y[idx], (len(inputs), batch_size)).copy()
        return Batch(inputs, targets)

    def batch_metric(self, result: LossResult, batch: Batch) -> float:
        return accuracy(result.outputs[-1], batch.targets[-1])

    def evaluate(self, network: SpikingNetwork, rng: RngStream) -> float:
        self.prepare()
        chunk = self.cfg.training.eval_batch_size
        batches = ((self.encode(self.eval_x[start:start + chunk], rng),
                    self.eval_y[start:start + chunk])
                   for start in range(0, len(self.eval_x), chunk))
        return classification_accuracy(network, batches)

    def first_sample(self, rng: RngStream) -> np.ndarray:
        self.prepare()
        return self.encode_indices(np.array([0]), rng)[:, 0, :]
