"""Word embeddings: pretraining and nearest-neighbour decoding.

Embeddings come from a predictive network with a single linear hidden
layer: the mean one-hot vector of the words around a position is mapped
to `dim` hidden units, followed by a softmax over the vocabulary that
predicts the word at the position. The rows of the input-to-hidden
weight matrix are the word vectors.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .._types import PathLike
from ..exceptions import DataFormatError, ShapeError
from ..heads import softmax
from ..numerics import RngStream
from ..optim import AdamState, adam_step
from ._text import Vocab

logger = logging.getLogger(__name__)


@dataclass
class EmbeddingTable:
    """One vector per vocabulary entry."""
    vocab: Vocab
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.shape[0] != self.vocab.size or self.vectors.ndim != 2:
            raise ShapeError(f'{self.vectors.shape} embedding matrix for a vocabulary '
                             f'of {self.vocab.size}')
        if not np.all(np.isfinite(self.vectors)):
            raise DataFormatError('embedding table contains non-finite values')

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def lookup(self, ids) -> np.ndarray:
        return self.vectors[np.asarray(ids, dtype=np.int64)]

    def scores(self, y: np.ndarray) -> np.ndarray:
        """`-1/2 ||y - e_w||^2` for every word `w`, shape `(*y.shape[:-1], size)`."""
        y = np.asarray(y, dtype=np.float64)
        diff = y[..., None, :] - self.vectors
        return -0.5 * np.sum(diff * diff, axis=-1)

    def probabilities(self, y: np.ndarray, temperature: float = 1.0) -> np.ndarray:
        """Distribution over the vocabulary for a predicted embedding `y`."""
        return softmax(self.scores(y), temperature=temperature)

    def nearest(self, y: np.ndarray) -> np.ndarray:
        """Id of the closest embedding."""
        return np.argmax(self.scores(y), axis=-1)

    def save(self, path: PathLike) -> None:
        np.savez(path, symbols=np.array(self.vocab.symbols, dtype=str), vectors=self.vectors)

    @classmethod
    def load(cls, path: PathLike) -> EmbeddingTable:
        path = Path(path)
        try:
            with np.load(path) as data:
                symbols = [str(sym) for sym in data['symbols']]
                vectors = data['vectors']
        except (OSError, KeyError, ValueError) as e:
            raise DataFormatError(f'cannot read embeddings from {path}: {e}') from e
        return cls(Vocab(symbols), vectors)


def context_matrix(ids: np.ndarray, positions: np.ndarray, window: int, size: int) -> np.ndarray:
    """Mean one-hot vector of the `window` words on either side of each
    position, clipped at the corpus boundaries."""
    n = len(ids)
    ctx = np.zeros((len(positions), size))
    for row, pos in enumerate(positions):
        lo, hi = max(0, pos - window), min(n, pos + window + 1)
        neighbours = np.concatenate((ids[lo:pos], ids[pos + 1:hi]))
        np.add.at(ctx[row], neighbours, 1.0 / len(neighbours))
    return ctx


def train_word_embeddings(ids,
                          vocab: Vocab,
                          *,
                          window: int = 5,
                          dim: int = 100,
                          epochs: int = 5,
                          batch_size: int = 128,
                          lr: float = 0.01,
                          rng: RngStream) -> EmbeddingTable:
    """Learn word vectors by predicting each word from its context.

    Parameters
    ----------
    ids : array_like
        Token ids of the training corpus.
    vocab : Vocab
        Vocabulary the ids refer to.
    window : int
        Number of context words on either side.
    dim : int
        Number of hidden units, the embedding size.
    epochs : int
        Passes over the corpus.
    rng : RngStream
        Initialization uses `rng.spawn(0)`, shuffling `rng.spawn(1)`.

    Raises
    ------
    DataFormatError
        When the vocabulary has fewer than two words.
    """
    ids = np.asarray(ids, dtype=np.int64)
    V = vocab.size
    if V < 2:
        raise DataFormatError(f'need at least two distinct words, got {V}')
    if len(ids) < 2:
        raise DataFormatError('corpus needs at least two tokens')

    init = rng.spawn(0)
    params = {
        'w_in': 0.1 * init.standard_normal(V * dim).reshape(V, dim),
        'w_out': 0.1 * init.standard_normal(V * dim).reshape(V, dim),
        'b_out': np.zeros(V),
    }
    state = AdamState(lr=lr)
    shuffle = rng.spawn(1)

    for epoch in range(epochs):
        order = shuffle.permutation(len(ids))
        total = 0.0
        for start in range(0, len(order), batch_size):
            positions = order[start:start + batch_size]
            ctx = context_matrix(ids, positions, window, V)
            centre = ids[positions]
            B = len(positions)

            hidden = ctx @ params['w_in']
            p = softmax(hidden @ params['w_out'].T + params['b_out'])
            total += float(-np.log(np.maximum(p[np.arange(B), centre], 1e-12)).sum())

            d_logits = p
            d_logits[np.arange(B), centre] -= 1.0
            d_logits /= B

            grads = {
                'w_out': d_logits.T @ hidden,
                'b_out': d_logits.sum(axis=0),
                'w_in': ctx.T @ (d_logits @ params['w_out']),
            }
            params, state = adam_step(state, params, grads, inplace=True)

        logger.info('embedding epoch %i/%i: mean loss %.4f', epoch + 1, epochs, total / len(ids))

    return EmbeddingTable(vocab, params['w_in'])
