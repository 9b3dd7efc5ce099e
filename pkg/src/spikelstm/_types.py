from __future__ import annotations

import os
from typing import Literal, TypeVar, Union

PathLike = Union[str, os.PathLike]

TaskName = Literal['toy', 'seq-image-classify', 'char-lm', 'word-lm', 'chunk-classify']

T = TypeVar('T')
