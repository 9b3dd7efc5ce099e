from __future__ import annotations

import logging

import numpy as np

from ..encode_data import (
    bernoulli_spike_encode,
    chunk_features,
    load_feature_csv,
    minmax_normalize,
)
from ..numerics import RngStream
from .classification import ClassificationTask, holdout_split

logger = logging.getLogger(__name__)


class ChunkTask(ClassificationTask):
    """Feature vectors split into consecutive chunks, one chunk per step.

    Features are min-max normalized with the training set bounds and rate
    coded at every presentation.
    """
    default_batch_size = 32

    def _load(self):
        opts = self.options
        vectors, labels = load_feature_csv(opts.features, normalize=False)

        if opts.test_features is not None:
            train_x, train_y = vectors, labels
            eval_x, eval_y = load_feature_csv(opts.test_features, normalize=False)
        else:
            train_x, train_y, eval_x, eval_y = holdout_split(vectors, labels, opts.eval_fraction)

        train_x, bounds = minmax_normalize(train_x)
        eval_x, _ = minmax_normalize(eval_x, bounds)

        # validates the vector length against chunk x chunks
        chunk_features(train_x[:1], opts.chunk, opts.chunks)

        self.train_x, self.train_y = train_x, train_y
        self.eval_x, self.eval_y = eval_x, eval_y
        self._limit_eval()

        self.num_classes = opts.num_classes or int(max(train_y.max(), eval_y.max())) + 1
        self._check_labels(self.num_classes)

    @property
    def input_size(self) -> int:
        return self.options.chunk

    @property
    def output_size(self) -> int:
        self.prepare()
        return self.num_classes

    def encode(self, raw: np.ndarray, rng: RngStream) -> np.ndarray:
        p = chunk_features(raw, self.options.chunk, self.options.chunks)
        return bernoulli_spike_encode(p, self.options.chunks, rng).data
