from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import TYPE_CHECKING, ClassVar, Optional

import numpy as np

from ..exceptions import DimensionMismatchError
from ..network import LossMode, LossResult, SpikingNetwork
from ..numerics import RngStream

if TYPE_CHECKING:
    from ..config import Config

logger = logging.getLogger(__name__)


class Stream(IntEnum):
    """Child streams of the root seed."""
    INIT = 0
    DATA = 1
    EVAL = 2
    FIXED_ENCODING = 3
    EMBEDDINGS = 4
    GENERATE = 5


@dataclass
class Batch:
    """Time-major inputs (T, batch, features) with their targets.

    `targets` holds labels (T, batch) for softmax tasks and values
    (T, batch, output) for regression tasks. `labels` holds the observed
    next-symbol ids of language modelling batches.
    """
    inputs: np.ndarray
    targets: np.ndarray
    labels: Optional[np.ndarray] = None


class AbstractTask(ABC):
    """One experiment: its data, encoding, loss setup and metric."""

    head_kind: ClassVar[str]
    metric_name: ClassVar[str]
    default_loss_mode: ClassVar[LossMode]
    default_batch_size: ClassVar[int]

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.options = cfg.task
        self.root = RngStream(cfg.training.seed)
        self._prepared = False

    def prepare(self) -> AbstractTask:
        """Load the data once."""
        if not self._prepared:
            self._load()
            self._prepared = True
        return self

    @abstractmethod
    def _load(self) -> None:
        pass

    @property
    @abstractmethod
    def input_size(self) -> int:
        pass

    @property
    @abstractmethod
    def output_size(self) -> int:
        pass

    @property
    def loss_mode(self) -> LossMode:
        return self.cfg.training.loss_mode or self.default_loss_mode

    @property
    def batch_size(self) -> int:
        return self.cfg.training.batch_size or self.default_batch_size

    @abstractmethod
    def sample_batch(self, rng: RngStream, batch_size: int) -> Batch:
        """Draw a training batch, encoding it with `rng`."""
        pass

    @abstractmethod
    def batch_metric(self, result: LossResult, batch: Batch) -> float:
        """Metric of a training batch from its forward pass."""
        pass

    @abstractmethod
    def evaluate(self, network: SpikingNetwork, rng: RngStream) -> float:
        """Metric on held-out data."""
        pass

    @abstractmethod
    def first_sample(self, rng: RngStream) -> np.ndarray:
        """Encoded input of the first training sample, shape (T, features)."""
        pass

    def save_artifacts(self) -> None:
        """Write task-specific files next to the checkpoint."""

    def build_network(self, rng: RngStream) -> SpikingNetwork:
        self.prepare()
        return SpikingNetwork.initialize(input_size=self.input_size,
                                         hidden_size=self.cfg.network.hidden_size,
                                         output_size=self.output_size,
                                         head=self.head_kind,
                                         surrogate=self.cfg.surrogate,
                                         rng=rng,
                                         head_init_scale=self.cfg.network.head_init_scale)

    def check_network(self, network: SpikingNetwork) -> None:
        """Raise if a loaded network does not fit this task."""
        self.prepare()
        expected = (self.input_size, self.output_size, self.head_kind)
        found = (network.input_size, network.output_size, network.head.kind)
        if expected != found:
            raise DimensionMismatchError(
                f'checkpoint has input={found[0]}, output={found[1]}, head={found[2]}; '
                f'task `{self.options.name}` needs input={expected[0]}, '
                f'output={expected[1]}, head={expected[2]}')
        if network.hidden_size != self.cfg.network.hidden_size:
            logger.warning('checkpoint has %i hidden units, config says %i',
                           network.hidden_size, self.cfg.network.hidden_size)
