"""Precomputed feature vectors in CSV form.

The file has a header row, a `label` column with integer class labels
and feature columns `f0 .. fN` in order.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np
import pandas as pd

from .._types import PathLike
from ..exceptions import DataFormatError, ShapeError

logger = logging.getLogger(__name__)


def minmax_normalize(
        vectors: np.ndarray,
        bounds: Optional[tuple[np.ndarray,
                               np.ndarray]] = None) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Map every feature to [0, 1] using per-column minimum and maximum.

    Constant columns map to 0. With `bounds` from another data set, values
    are clipped to [0, 1].
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    lo, hi = bounds if bounds is not None else (vectors.min(axis=0), vectors.max(axis=0))
    span = np.where(hi > lo, hi - lo, 1.0)
    return np.clip((vectors - lo) / span, 0.0, 1.0), (lo, hi)


def load_feature_csv(path: PathLike, normalize: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Read labelled feature vectors.

    Parameters
    ----------
    path : PathLike
        CSV file.
    normalize : bool
        Min-max normalize every feature column to [0, 1].

    Returns
    -------
    vectors : np.ndarray
        Shape (n, features).
    labels : np.ndarray
        Integer labels, shape (n,).

    Raises
    ------
    DataFormatError
        On ragged rows, missing or non-numeric cells, or a malformed header.
    """
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFormatError(f'cannot parse {path}: {e}') from e

    if 'label' not in df.columns:
        raise DataFormatError(f'{path}: no `label` column')

    features = [col for col in df.columns if col != 'label']
    expected = [f'f{i}' for i in range(len(features))]
    if not features or features != expected:
        raise DataFormatError(f'{path}: feature columns must be f0 .. fN in order')

    if df.isna().any().any():
        raise DataFormatError(f'{path}: ragged rows or empty cells')

    try:
        vectors = df[features].to_numpy(dtype=np.float64)
        raw_labels = df['label'].to_numpy()
        labels = raw_labels.astype(np.int64)
    except (TypeError, ValueError) as e:
        raise DataFormatError(f'{path}: non-numeric cell ({e})') from e

    if np.any(labels != raw_labels) or np.any(labels < 0):
        raise DataFormatError(f'{path}: labels must be non-negative integers')

    logger.info('%i vectors of %i features loaded from %s', *vectors.shape, path)

    if normalize:
        vectors, _ = minmax_normalize(vectors)

    return vectors, labels


def chunk_features(vector, chunk: int = 48, chunks: int = 8) -> np.ndarray:
    """Zero-pad a vector to `chunk * chunks` values and split it into
    `chunks` consecutive inputs of size `chunk`.

    Accepts a single vector (returns shape (chunks, chunk)) or a batch of
    vectors (returns shape (chunks, batch, chunk)).
    """
    arr = np.asarray(vector, dtype=np.float64)
    length = arr.shape[-1]
    if length > chunk * chunks:
        raise ShapeError(f'vector of length {length} does not fit {chunks} chunks of {chunk}')

    padded = np.zeros((*arr.shape[:-1], chunk * chunks))
    padded[..., :length] = arr
    split = padded.reshape(*arr.shape[:-1], chunks, chunk)
    return np.moveaxis(split, -2, 0)
