"""Reader and writer for the IDX container used by MNIST and EMNIST.

```
[offset] [type]          [value]
0000     32 bit integer  0x00000803 (images) or 0x00000801 (labels)
0004     32 bit integer  number of items
0008     32 bit integer  number of rows        (images only)
0012     32 bit integer  number of columns     (images only)
....     unsigned byte   pixels / labels, row-major
```

All integers are big-endian. Files ending in `.gz` are decompressed.
"""
from __future__ import annotations

import gzip
import logging
import struct
from pathlib import Path

import numpy as np

from .._types import PathLike
from ..exceptions import DataFormatError

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    try:
        if path.suffix == '.gz':
            with gzip.open(path, 'rb') as f:
                return f.read()
        return path.read_bytes()
    except OSError as e:
        raise DataFormatError(f'cannot read {path}: {e}') from e


def read_idx(path: PathLike, magic: int) -> np.ndarray:
    """Parse an unsigned-byte IDX file.

    Raises
    ------
    DataFormatError
        On a wrong magic number, a truncated file, or trailing bytes.
    """
    data = _read_bytes(path)
    ndim = magic & 0xFF

    if len(data) < 4 * (ndim + 1):
        raise DataFormatError(f'{path}: truncated header ({len(data)} bytes)')

    (found, ) = struct.unpack('>I', data[:4])
    if found != magic:
        raise DataFormatError(f'{path}: bad magic number 0x{found:08x}, expected 0x{magic:08x}')

    dims = struct.unpack(f'>{ndim}I', data[4:4 * (ndim + 1)])
    payload = data[4 * (ndim + 1):]
    expected = int(np.prod(dims, dtype=np.int64))

    if len(payload) < expected:
        raise DataFormatError(
            f'{path}: truncated, header announces {expected} bytes, found {len(payload)}')
    if len(payload) > expected:
        raise DataFormatError(
            f'{path}: {len(payload) - expected} bytes beyond the announced dimensions {dims}')

    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx(images_path: PathLike,
             labels_path: PathLike,
             transpose: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Load an image file and its label file.

    Parameters
    ----------
    images_path, labels_path : PathLike
        IDX files, optionally gzipped.
    transpose : bool
        Swap rows and columns of every image (EMNIST stores images
        transposed).

    Returns
    -------
    images : np.ndarray
        uint8, shape (n, rows, cols).
    labels : np.ndarray
        uint8, shape (n,).
    """
    images = read_idx(images_path, IMAGE_MAGIC)
    labels = read_idx(labels_path, LABEL_MAGIC)

    if len(images) != len(labels):
        raise DataFormatError(f'{images_path} holds {len(images)} images but '
                              f'{labels_path} holds {len(labels)} labels')

    if transpose:
        images = images.transpose(0, 2, 1)

    logger.info('%i images of %ix%i loaded from %s', *images.shape, images_path)

    return np.ascontiguousarray(images), labels


def write_idx(path: PathLike, array) -> None:
    """Write a uint8 array of 1 or 3 dimensions as an IDX file."""
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise DataFormatError(f'only uint8 data can be written, got {array.dtype}')
    if array.ndim not in (1, 3):
        raise DataFormatError(f'expected labels (n,) or images (n, rows, cols), got {array.shape}')

    magic = 0x00000800 | array.ndim
    data = struct.pack(f'>I{array.ndim}I', magic, *array.shape) + array.tobytes()

    path = Path(path)
    if path.suffix == '.gz':
        with gzip.open(path, 'wb') as f:
            f.write(data)
    else:
        path.write_bytes(data)
