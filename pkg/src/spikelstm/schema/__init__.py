from __future__ import annotations

from ._basemodel import BaseModel
from ._ranges import ARange, LinSpace, ValueList, expand_values

__all__ = [
    'ARange',
    'BaseModel',
    'LinSpace',
    'ValueList',
    'expand_values',
]
