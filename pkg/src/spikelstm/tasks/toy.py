from __future__ import annotations

import logging
import math

import numpy as np
from scipy.stats import pearsonr

from ..encode_data import sinusoid_dataset
from ..lstm_snn import forward_states
from ..network import LossResult, SpikingNetwork
from ..numerics import RngStream
from .base_task import AbstractTask, Batch, Stream

logger = logging.getLogger(__name__)


def correlation(prediction: np.ndarray, target: np.ndarray) -> float:
    """Pearson correlation, NaN when either sequence is constant."""
    prediction = np.asarray(prediction, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if np.ptp(prediction) == 0 or np.ptp(target) == 0:
        return math.nan
    return float(pearsonr(prediction, target)[0])


class ToyTask(AbstractTask):
    """Regression of the toy signal from its spike encoding."""
    head_kind = 'linear'
    metric_name = 'correlation'
    default_loss_mode = 'every'
    default_batch_size = 1

    def _load(self):
        _, self.target = sinusoid_dataset(self.options.steps,
                                          self.options.input_size,
                                          rng=self.root.spawn(Stream.FIXED_ENCODING))

    @property
    def input_size(self) -> int:
        return self.options.input_size

    @property
    def output_size(self) -> int:
        return 1

    def _encode(self, rng: RngStream, batch_size: int) -> np.ndarray:
        if not self.cfg.training.resample:
            rng = self.root.spawn(Stream.FIXED_ENCODING)
        trains = [
            sinusoid_dataset(self.options.steps, self.options.input_size, rng=rng)[0].data
            for _ in range(batch_size)
        ]
        return np.concatenate(trains, axis=1)

    def sample_batch(self, rng: RngStream, batch_size: int) -> Batch:
        self.prepare()
        inputs = self._encode(rng, batch_size)
        targets = np.broadcast_to(self.target[:, None, None],
                                  (len(self.target), batch_size, 1)).copy()
        return Batch(inputs, targets)

    def batch_metric(self, result: LossResult, batch: Batch) -> float:
        return correlation(result.outputs[:, 0, 0], batch.targets[:, 0, 0])

    def predict(self, network: SpikingNetwork, rng: RngStream) -> np.ndarray:
        """Predicted signal for one fresh encoding, shape (steps,)."""
        self.prepare()
        spikes, _ = sinusoid_dataset(self.options.steps, self.options.input_size, rng=rng)
        hidden, _, _ = forward_states(network.layer, network.surrogate, spikes)
        return network.head.forward(hidden)[:, 0, 0]

    def evaluate(self, network: SpikingNetwork, rng: RngStream) -> float:
        return correlation(self.predict(network, rng), self.target)

    def first_sample(self, rng: RngStream) -> np.ndarray:
        self.prepare()
        return self._encode(rng, 1)[:, 0, :]
