from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import TYPE_CHECKING

from .operations import op_queue

if TYPE_CHECKING:
    from .config import Config

logger = logging.getLogger(__name__)


def remove_files(*filenames: Path):
    for filename in filenames:
        try:
            os.unlink(filename)
        except FileNotFoundError:
            pass


def cleanup(*, cfg: Config, embeddings: bool, **kwargs):
    """Remove the files written by training.

    Parameters
    ----------
    cfg : Config
        Experiment config, `outputs` names the files.
    embeddings : bool
        Also remove the pretrained word embeddings.
    """
    outputs = cfg.outputs

    targets = [Path(outputs.checkpoint), Path(outputs.metrics)]
    if embeddings:
        targets.append(Path(outputs.embeddings))
    elif Path(outputs.embeddings).exists():
        op_queue.add_no_op(description='NOT Removing', extra_description=f'{outputs.embeddings}')

    for target in targets:
        if not target.exists():
            logger.debug('%s does not exist', target)
            continue
        op_queue.add(action=remove_files,
                     args=(target, ),
                     description='Removing',
                     extra_description=f'{target}')
