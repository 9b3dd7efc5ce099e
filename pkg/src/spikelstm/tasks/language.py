from __future__ import annotations

import logging
from abc import abstractmethod
from pathlib import Path
from typing import ClassVar, Hashable, Sequence

import numpy as np

from ..encode_data import (
    EmbeddingTable,
    Vocab,
    one_hot_sequence,
    read_text,
    split_stream,
    tokenize_words,
    train_word_embeddings,
)
from ..exceptions import DataFormatError
from ..heads import perplexity, softmax
from ..lstm_snn import forward_states
from ..network import LossResult, SpikingNetwork
from ..numerics import RngStream
from .base_task import AbstractTask, Batch, Stream

logger = logging.getLogger(__name__)


class LanguageModelTask(AbstractTask):
    """Next-symbol prediction over a symbol stream.

    The stream is lowercased, cut to `corpus_limit` characters, and
    tokenized. The vocabulary covers the training and held-out text so
    that every held-out symbol is known.
    """
    metric_name = 'perplexity'
    default_loss_mode = 'every'
    default_batch_size = 32
    separator: ClassVar[str]

    vocab: Vocab
    train_ids: np.ndarray
    eval_ids: np.ndarray

    @abstractmethod
    def tokenize(self, text: str) -> list[Hashable]:
        pass

    def detokenize(self, symbols: Sequence[Hashable]) -> str:
        return self.separator.join(str(s) for s in symbols)

    @abstractmethod
    def symbol_inputs(self, ids: np.ndarray) -> np.ndarray:
        """Layer inputs for symbol ids of any shape, features last."""
        pass

    @abstractmethod
    def symbol_targets(self, ids: np.ndarray) -> np.ndarray:
        """Loss targets for the next-symbol ids (T, batch)."""
        pass

    @abstractmethod
    def next_logits(self, network: SpikingNetwork, hidden: np.ndarray) -> np.ndarray:
        """Unnormalized log-probabilities of the next symbol."""
        pass

    def _load(self):
        opts = self.options
        limit = opts.corpus_limit
        train_tokens = self.tokenize(read_text(opts.corpus, limit))
        eval_tokens = (self.tokenize(read_text(opts.eval_corpus, limit))
                       if opts.eval_corpus is not None else [])

        if not train_tokens:
            raise DataFormatError(f'corpus {opts.corpus} contains no symbols')

        self.vocab = Vocab.from_sequence([*train_tokens, *eval_tokens])
        ids = self.vocab.encode(train_tokens)

        if opts.eval_corpus is not None:
            self.train_ids, self.eval_ids = ids, self.vocab.encode(eval_tokens)
        else:
            self.train_ids, self.eval_ids = split_stream(ids, opts.eval_fraction)

        if opts.eval_limit is not None:
            self.eval_ids = self.eval_ids[:opts.eval_limit + 1]

        if len(self.train_ids) <= opts.steps:
            raise DataFormatError(f'training stream of {len(self.train_ids)} symbols is too '
                                  f'short for sequences of {opts.steps}')

        logger.info('vocabulary of %i symbols, %i training and %i held-out symbols',
                    self.vocab.size, len(self.train_ids), len(self.eval_ids))

    def sample_batch(self, rng: RngStream, batch_size: int) -> Batch:
        self.prepare()
        steps = self.options.steps
        # symbol encodings are deterministic, `resample` does not apply
        starts = rng.choice(len(self.train_ids) - steps, size=batch_size)
        windows = np.stack([self.train_ids[s:s + steps + 1] for s in starts], axis=1)

        current, following = windows[:-1], windows[1:]
        return Batch(inputs=self.symbol_inputs(current),
                     targets=self.symbol_targets(following),
                     labels=following)

    def probabilities(self, network: SpikingNetwork, hidden: np.ndarray) -> np.ndarray:
        return softmax(self.next_logits(network, hidden))

    def _observed(self, probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
        return np.take_along_axis(probs, labels[..., None], axis=-1)[..., 0]

    def batch_metric(self, result: LossResult, batch: Batch) -> float:
        probs = self.probabilities_from_outputs(result.outputs)
        return perplexity(self._observed(probs, batch.labels))

    def probabilities_from_outputs(self, outputs: np.ndarray) -> np.ndarray:
        """Next-symbol distribution from head outputs."""
        return outputs

    def evaluate(self, network: SpikingNetwork, rng: RngStream) -> float:
        """Perplexity of the held-out stream, read as one sequence."""
        self.prepare()
        inputs = self.symbol_inputs(self.eval_ids[:-1])[:, None, :]
        hidden, _, _ = forward_states(network.layer, network.surrogate, inputs)
        probs = self.probabilities(network, hidden[:, 0, :])
        return perplexity(self._observed(probs, self.eval_ids[1:]))

    def first_sample(self, rng: RngStream) -> np.ndarray:
        self.prepare()
        return self.symbol_inputs(self.train_ids[:self.options.steps])


class CharLMTask(LanguageModelTask):
    """Characters as one-hot spike vectors, softmax output."""
    head_kind = 'softmax'
    separator = ''

    def tokenize(self, text: str) -> list[Hashable]:
        return list(text.lower())

    @property
    def input_size(self) -> int:
        self.prepare()
        return self.vocab.size

    @property
    def output_size(self) -> int:
        return self.input_size

    def symbol_inputs(self, ids: np.ndarray) -> np.ndarray:
        return one_hot_sequence(ids, self.vocab.size)

    def symbol_targets(self, ids: np.ndarray) -> np.ndarray:
        return ids

    def next_logits(self, network: SpikingNetwork, hidden: np.ndarray) -> np.ndarray:
        return network.head.logits(hidden)


class WordLMTask(LanguageModelTask):
    """Words as real-valued embedding vectors. A linear head regresses the
    embedding of the next word; the probability of word `w` is
    `softmax(-1/2 ||y - e_w||^2)`."""
    head_kind = 'linear'
    separator = ' '

    embeddings: EmbeddingTable

    def tokenize(self, text: str) -> list[Hashable]:
        return list(tokenize_words(text))

    def _load(self):
        super()._load()
        path = Path(self.cfg.outputs.embeddings)
        opts = self.options

        self._trained_embeddings = False
        if path.exists():
            table = EmbeddingTable.load(path)
            if table.vocab.symbols == self.vocab.symbols and table.dim == opts.embedding_dim:
                logger.info('Using word embeddings from %s', path)
                self.embeddings = table
                return
            logger.warning('%s does not match the corpus vocabulary, retraining', path)

        self.embeddings = train_word_embeddings(self.train_ids,
                                                self.vocab,
                                                window=opts.embedding_window,
                                                dim=opts.embedding_dim,
                                                epochs=opts.embedding_epochs,
                                                lr=opts.embedding_lr,
                                                rng=self.root.spawn(Stream.EMBEDDINGS))
        self._trained_embeddings = True

    def save_artifacts(self) -> None:
        if self._trained_embeddings:
            self.embeddings.save(self.cfg.outputs.embeddings)
            logger.info('Word embeddings written to %s', self.cfg.outputs.embeddings)

    @property
    def input_size(self) -> int:
        return self.options.embedding_dim

    @property
    def output_size(self) -> int:
        return self.options.embedding_dim

    def symbol_inputs(self, ids: np.ndarray) -> np.ndarray:
        return self.embeddings.lookup(ids)

    def symbol_targets(self, ids: np.ndarray) -> np.ndarray:
        return self.embeddings.lookup(ids)

    def next_logits(self, network: SpikingNetwork, hidden: np.ndarray) -> np.ndarray:
        return self.embeddings.scores(network.head.forward(hidden))

    def probabilities_from_outputs(self, outputs: np.ndarray) -> np.ndarray:
        return self.embeddings.probabilities(outputs)
