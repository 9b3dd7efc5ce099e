"""Autoregressive text generation from a language model checkpoint."""
from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from ._logging_utils import snnlog_screen
from .exceptions import ConfigError, DataFormatError, DomainError
from .heads import softmax
from .lstm_snn import forward_states, forward_step
from .network import SpikingNetwork
from .numerics import RngStream

if TYPE_CHECKING:
    from ._types import PathLike
    from .config import Config
    from .tasks.language import LanguageModelTask

logger = logging.getLogger(__name__)


def sample_index(logits: np.ndarray, temperature: float, rng: RngStream) -> int:
    """Draw an index from `softmax(logits / temperature)`.

    A temperature of 0 picks the argmax without touching `rng`.
    """
    if temperature < 0:
        raise DomainError(f'temperature must be >= 0, got {temperature}')
    if temperature == 0:
        return int(np.argmax(logits))

    cdf = np.cumsum(softmax(logits, temperature))
    u = rng.uniform(1)[0] * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side='right'), len(cdf) - 1))


def generate(network: SpikingNetwork,
             task: LanguageModelTask,
             seed_text: str,
             length: int,
             temperature: float = 1.0,
             *,
             rng: RngStream) -> str:
    """Continue `seed_text` by `length` symbols.

    The seed is read through the network symbol by symbol. Every further
    symbol is drawn from the predicted next-symbol distribution and fed
    back as the next input.

    Parameters
    ----------
    network : SpikingNetwork
        Trained language model.
    task : LanguageModelTask
        Provides the vocabulary and the symbol encoding.
    seed_text : str
        Text to continue, must only contain known symbols.
    length : int
        Number of symbols to generate.
    temperature : float
        Sampling temperature, 0 for greedy decoding.
    rng : RngStream
        Source of the sampling draws.

    Returns
    -------
    str
        The seed text followed by the generated symbols.
    """
    if length < 0:
        raise DomainError(f'length must be >= 0, got {length}')

    task.prepare()
    tokens = task.tokenize(seed_text)
    if not tokens:
        raise DataFormatError('seed text contains no symbols')
    ids = task.vocab.encode(tokens)

    if length == 0:
        return seed_text

    _, h, c = forward_states(network.layer, network.surrogate, task.symbol_inputs(ids))

    new = []
    for _ in range(length):
        idx = sample_index(task.next_logits(network, h), temperature, rng)
        new.append(idx)
        x_t = task.symbol_inputs(np.array([idx]))[0]
        cache = forward_step(network.layer, network.surrogate, x_t, h, c)
        h, c = cache.h_t, cache.c_t

    continuation = task.detokenize(task.vocab.decode(new))
    return task.separator.join((seed_text, continuation))


def generate_text(*, cfg: Config, checkpoint: PathLike, seed_text: str, length: int,
                  temperature: float, **kwargs) -> str:
    """Load `checkpoint`, generate and print the text."""
    from .checkpoint import load_checkpoint
    from .tasks import Stream, get_task
    from .tasks.language import LanguageModelTask

    task = get_task(cfg)
    if not isinstance(task, LanguageModelTask):
        raise ConfigError(f'task `{cfg.task.name}` is not a language model')

    network, _ = load_checkpoint(checkpoint, cfg.surrogate)
    task.check_network(network)

    text = generate(network,
                    task,
                    seed_text,
                    length,
                    temperature,
                    rng=task.root.spawn(Stream.GENERATE))
    snnlog_screen.info(text)
    return text
