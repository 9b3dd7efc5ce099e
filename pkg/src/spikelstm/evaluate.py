"""Evaluation of trained networks."""
from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Iterable

import numpy as np

from ._logging_utils import snnlog_screen
from .lstm_snn import forward_states
from .network import SpikingNetwork

if TYPE_CHECKING:
    from ._types import PathLike
    from .config import Config

logger = logging.getLogger(__name__)


def final_step_outputs(network: SpikingNetwork, inputs) -> np.ndarray:
    """Head output at the last step, for inputs of shape (T, batch, features)."""
    _, h_T, _ = forward_states(network.layer, network.surrogate, inputs)
    return network.head.forward(h_T)


def accuracy(outputs: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax equals the label."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return math.nan
    return float(np.mean(np.argmax(outputs, axis=-1) == labels))


def classification_accuracy(network: SpikingNetwork,
                            batches: Iterable[tuple[np.ndarray, np.ndarray]]) -> float:
    """Accuracy of the final-step decision.

    Parameters
    ----------
    network : SpikingNetwork
        Network with a softmax head.
    batches : Iterable[tuple[np.ndarray, np.ndarray]]
        Encoded inputs (T, batch, features) with their labels (batch,).
        Consumed one batch at a time.
    """
    correct = 0
    total = 0
    for inputs, labels in batches:
        out = final_step_outputs(network, inputs)
        correct += int(np.sum(np.argmax(out, axis=-1) == np.asarray(labels)))
        total += len(labels)

    return correct / total if total else math.nan


def evaluate(*, cfg: Config, checkpoint: PathLike, **kwargs) -> float:
    """Load `checkpoint` and report the task metric on held-out data.

    Returns
    -------
    float
        Accuracy, perplexity or correlation, depending on the task.
    """
    from .checkpoint import load_checkpoint
    from .tasks import Stream, get_task

    task = get_task(cfg).prepare()
    network, _ = load_checkpoint(checkpoint, cfg.surrogate)
    task.check_network(network)

    value = task.evaluate(network, task.root.spawn(Stream.EVAL))
    snnlog_screen.info(f'{task.metric_name}: {value:.6g}')
    return value
