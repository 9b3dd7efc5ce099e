from __future__ import annotations

import os
from pathlib import Path

import pytest


def pytest_configure():
    pytest.TEST_DATA = Path(__file__).parent / 'test_data'
    pytest.MNIST_DIR = os.environ.get('SPIKELSTM_MNIST_DIR')
