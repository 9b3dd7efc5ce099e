from __future__ import annotations

from ._config import CFG, DEFAULT_CONFIG, Config, apply_overrides, load_config

__all__ = [
    'CFG',
    'Config',
    'DEFAULT_CONFIG',
    'apply_overrides',
    'load_config',
]
