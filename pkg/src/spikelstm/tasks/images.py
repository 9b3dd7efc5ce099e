from __future__ import annotations

import logging

import numpy as np

from ..encode_data import encode_image_rows, load_idx
from ..numerics import RngStream
from .classification import ClassificationTask, holdout_split

logger = logging.getLogger(__name__)


class SeqImageTask(ClassificationTask):
    """Sequential MNIST/EMNIST: one image row per time step."""

    def _load(self):
        opts = self.options
        images, labels = load_idx(opts.images, opts.labels, transpose=opts.transpose)
        if opts.train_limit is not None:
            images, labels = images[:opts.train_limit], labels[:opts.train_limit]

        if opts.test_images is not None:
            self.train_x, self.train_y = images, labels
            self.eval_x, self.eval_y = load_idx(opts.test_images,
                                                opts.test_labels,
                                                transpose=opts.transpose)
        else:
            self.train_x, self.train_y, self.eval_x, self.eval_y = holdout_split(
                images, labels, opts.eval_fraction)

        self.train_y = self.train_y.astype(np.int64)
        self.eval_y = self.eval_y.astype(np.int64)
        self._limit_eval()
        self._check_labels(opts.num_classes)

        logger.info('%i training and %i evaluation images', len(self.train_x), len(self.eval_x))

    @property
    def input_size(self) -> int:
        self.prepare()
        return self.train_x.shape[2]

    @property
    def output_size(self) -> int:
        return self.options.num_classes

    def encode(self, raw: np.ndarray, rng: RngStream) -> np.ndarray:
        return encode_image_rows(raw, rng).data
