__author__ = 'spikelstm developers'
__version__ = '0.1.0'

import warnings  # noqa

warnings.filterwarnings(
    'ignore',
    'Explicit custom root behavior not yet implemented for pydantic_yaml')
