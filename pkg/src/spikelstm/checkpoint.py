"""Binary checkpoint format.

All values little-endian:

```
offset  type       value
0       8 bytes    magic b'SLSTMCKP'
8       uint32     format version (1)
12      uint32     input size
16      uint32     hidden size
20      uint32     output size
24      uint32     head kind (0 softmax, 1 linear)
28      uint32     1 if an optimizer section follows, else 0
32      float64[]  w_fh w_fx b_fh b_fx  w_ih ... b_ox  w_y b_y   (row-major)
        -- optional optimizer section --
        uint64     step
        float64    lr, beta1, beta2, eps
        float64[]  first moments, same table order
        float64[]  second moments, same table order
```
"""
from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from ._types import PathLike
from .exceptions import DataFormatError
from .heads import HEADS
from .lstm_snn import LayerParams, layer_table_names
from .network import SpikingNetwork
from .optim import AdamState
from .spike_core import SurrogateConfig

logger = logging.getLogger(__name__)

MAGIC = b'SLSTMCKP'
VERSION = 1
HEAD_CODES = {'softmax': 0, 'linear': 1}

_HEADER = struct.Struct('<8s6I')
_OPTIM_HEADER = struct.Struct('<Q4d')


def table_order() -> list[str]:
    return [*layer_table_names(), 'w_y', 'b_y']


def _table_shapes(input_size: int, hidden_size: int, output_size: int):
    shapes = LayerParams.table_shapes(input_size, hidden_size)
    shapes['w_y'] = (output_size, hidden_size)
    shapes['b_y'] = (output_size, )
    return shapes


def checkpoint_bytes(network: SpikingNetwork, optimizer: Optional[AdamState] = None) -> bytes:
    """Serialize `network` (and optionally `optimizer`) to bytes."""
    tables = network.tables()
    chunks = [
        _HEADER.pack(MAGIC, VERSION, network.input_size, network.hidden_size,
                     network.output_size, HEAD_CODES[network.head.kind],
                     int(optimizer is not None))
    ]
    chunks += [tables[name].astype('<f8').tobytes() for name in table_order()]

    if optimizer is not None:
        chunks.append(
            _OPTIM_HEADER.pack(optimizer.step, optimizer.lr, optimizer.beta1,
                               optimizer.beta2, optimizer.eps))
        for moments in (optimizer.m, optimizer.v):
            for name in table_order():
                arr = moments.get(name, np.zeros_like(tables[name]))
                chunks.append(arr.astype('<f8').tobytes())

    return b''.join(chunks)


def save_checkpoint(path: PathLike,
                    network: SpikingNetwork,
                    optimizer: Optional[AdamState] = None) -> None:
    """Write a checkpoint to `path`."""
    data = checkpoint_bytes(network, optimizer)
    Path(path).write_bytes(data)
    logger.debug('Wrote %i bytes to %s', len(data), path)


class _Reader:

    def __init__(self, data: bytes, path: PathLike):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise DataFormatError(f'{self.path}: checkpoint truncated at byte {self.offset}')
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def array(self, shape: tuple[int, ...]) -> np.ndarray:
        n = int(np.prod(shape))
        buf = self.take(8 * n)
        return np.frombuffer(buf, dtype='<f8').astype(np.float64).reshape(shape)


def load_checkpoint(
        path: PathLike,
        surrogate: Optional[SurrogateConfig] = None
) -> tuple[SpikingNetwork, Optional[AdamState]]:
    """Read a checkpoint written by `save_checkpoint`.

    Parameters
    ----------
    path : PathLike
        Checkpoint file.
    surrogate : SurrogateConfig, optional
        Surrogate settings for the restored network, defaults if omitted.

    Returns
    -------
    network, optimizer
        The optimizer state is None if the file has no optimizer section.

    Raises
    ------
    DataFormatError
        On a bad magic number, unknown version, or truncated file.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise DataFormatError(f'cannot read checkpoint {path}: {e}') from e

    reader = _Reader(data, path)

    magic, version, n_in, n_hidden, n_out, head_code, has_optim = _HEADER.unpack(
        reader.take(_HEADER.size))

    if magic != MAGIC:
        raise DataFormatError(f'{path}: not a spikelstm checkpoint (magic {magic!r})')
    if version != VERSION:
        raise DataFormatError(f'{path}: unsupported checkpoint version {version}')

    kinds = {code: kind for kind, code in HEAD_CODES.items()}
    if head_code not in kinds:
        raise DataFormatError(f'{path}: unknown head code {head_code}')

    shapes = _table_shapes(n_in, n_hidden, n_out)
    tables = {name: reader.array(shapes[name]) for name in table_order()}

    layer = LayerParams(n_in, n_hidden, {name: tables[name] for name in layer_table_names()})
    head = HEADS[kinds[head_code]](tables['w_y'], tables['b_y'])
    network = SpikingNetwork(layer=layer, head=head, surrogate=surrogate or SurrogateConfig())

    optimizer = None
    if has_optim:
        step, lr, beta1, beta2, eps = _OPTIM_HEADER.unpack(reader.take(_OPTIM_HEADER.size))
        m = {name: reader.array(shapes[name]) for name in table_order()}
        v = {name: reader.array(shapes[name]) for name in table_order()}
        optimizer = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=step, m=m, v=v)

    if reader.offset != len(reader.data):
        raise DataFormatError(f'{path}: {len(reader.data) - reader.offset} trailing bytes')

    return network, optimizer
