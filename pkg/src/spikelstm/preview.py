from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np
import pandas as pd

from ._logging_utils import snnlog_screen
from .operations import add_to_op_queue

if TYPE_CHECKING:
    from ._types import PathLike
    from .config import Config

logger = logging.getLogger(__name__)

SPIKE = '|'
SILENCE = '.'


def spike_raster(sample: np.ndarray) -> str:
    """Text raster of one encoded sample of shape (T, features).

    One line per feature, one character per time step. Non-binary inputs
    (embeddings) are drawn as spikes where they are positive.
    """
    sample = np.asarray(sample)
    return '\n'.join(''.join(SPIKE if v > 0 else SILENCE for v in row) for row in sample.T)


def raster_frame(sample: np.ndarray) -> pd.DataFrame:
    """Sample as features x time steps frame."""
    sample = np.asarray(sample)
    return pd.DataFrame(sample.T,
                        index=pd.Index(range(sample.shape[1]), name='feature'),
                        columns=[f't{t}' for t in range(sample.shape[0])])


@add_to_op_queue('Writing spike raster', '{path}')
def _write_csv(frame: pd.DataFrame, path: PathLike):
    frame.to_csv(path)


def encode_preview(*, cfg: Config, output: Optional[PathLike] = None, **kwargs) -> str:
    """Print the encoding of the first training sample.

    Parameters
    ----------
    cfg : Config
        Experiment configuration.
    output : PathLike, optional
        Also write the raster as CSV to this path.
    """
    from .tasks import Stream, get_task

    task = get_task(cfg).prepare()
    sample = task.first_sample(task.root.spawn(Stream.DATA))

    raster = spike_raster(sample)
    snnlog_screen.info(raster)
    logger.info('Encoded sample: %i steps, %i features, spike rate %.3f', sample.shape[0],
                sample.shape[1], float(np.mean(sample > 0)))

    if output is not None:
        _write_csv(raster_frame(sample), path=output)

    return raster
