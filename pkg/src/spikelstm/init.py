from __future__ import annotations

import logging
import shutil
import sys
from pathlib import Path

from .exceptions import ConfigError
from .operations import op_queue

if sys.version_info < (3, 10):
    from importlib_resources import files
else:
    from importlib.resources import files

logger = logging.getLogger(__name__)

BUNDLED_CONFIGS = {
    'toy': 'toy.yaml',
    'smnist': 'smnist.yaml',
    'semnist': 'semnist.yaml',
    'char-lm': 'char_lm.yaml',
    'word-lm': 'word_lm.yaml',
    'speech': 'speech.yaml',
}


def bundled_config(name: str):
    """Path of the packaged config for experiment `name`."""
    try:
        filename = BUNDLED_CONFIGS[name]
    except KeyError:
        raise ConfigError(f'no bundled config `{name}`, choose from '
                          f'{", ".join(BUNDLED_CONFIGS)}') from None
    return files('spikelstm.data') / filename


def init(*, task: str, out_file: str, force: bool, **kwargs):
    """Initialize a config file from one of the bundled experiments.

    Parameters
    ----------
    task : str
        Name of the bundled experiment, see `BUNDLED_CONFIGS`.
    out_file : str
        Filename of the config.
    force : bool
        Overwrite config if it already exists.
    **kwargs
        Unused.

    Raises
    ------
    ConfigError
        When the config already exists.
    """
    src = bundled_config(task)

    config_filepath = Path(out_file)

    if config_filepath.exists() and not force:
        raise ConfigError(f'Refusing to overwrite existing CONFIG, {config_filepath}, '
                          'use --force if you really want to')

    logger.debug('Copying %s config from %s to %s', task, src, config_filepath)

    op_queue.add(action=shutil.copy,
                 kwargs={
                     'src': src,
                     'dst': config_filepath,
                 },
                 description=f'Copying {task} config to',
                 extra_description=f'{config_filepath}')
