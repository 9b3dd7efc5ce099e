"""Data ingestion and spike encoding."""
from __future__ import annotations

from ._embeddings import EmbeddingTable, train_word_embeddings
from ._features import chunk_features, load_feature_csv, minmax_normalize
from ._idx import load_idx, read_idx, write_idx
from ._spikes import (
    SpikeTrain,
    bernoulli_spike_encode,
    encode_image_rows,
    one_hot_encode,
    one_hot_sequence,
    pixel_probabilities,
)
from ._text import Vocab, char_corpus, read_text, split_stream, tokenize_words, word_corpus
from ._toy import sinusoid_dataset, toy_signal

__all__ = [
    'EmbeddingTable',
    'SpikeTrain',
    'Vocab',
    'bernoulli_spike_encode',
    'char_corpus',
    'chunk_features',
    'encode_image_rows',
    'load_feature_csv',
    'load_idx',
    'minmax_normalize',
    'one_hot_encode',
    'one_hot_sequence',
    'pixel_probabilities',
    'read_idx',
    'read_text',
    'sinusoid_dataset',
    'split_stream',
    'tokenize_words',
    'toy_signal',
    'train_word_embeddings',
    'word_corpus',
]
