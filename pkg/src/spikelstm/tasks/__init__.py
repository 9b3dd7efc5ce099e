"""Adapters for the experiments the harness can run."""
from __future__ import annotations

from typing import TYPE_CHECKING, Any

from .base_task import Batch, Stream

if TYPE_CHECKING:
    from ..config import Config
    from .base_task import AbstractTask

__all__ = ['Batch', 'Stream', 'get_task']


def get_task(cfg: Config) -> AbstractTask:
    """Get the task adapter for the configured experiment."""
    Task: Any = None

    if cfg.task.name == 'toy':
        from .toy import ToyTask
        Task = ToyTask

    elif cfg.task.name == 'seq-image-classify':
        from .images import SeqImageTask
        Task = SeqImageTask

    elif cfg.task.name == 'char-lm':
        from .language import CharLMTask
        Task = CharLMTask

    elif cfg.task.name == 'word-lm':
        from .language import WordLMTask
        Task = WordLMTask

    elif cfg.task.name == 'chunk-classify':
        from .chunks import ChunkTask
        Task = ChunkTask

    else:
        raise NotImplementedError(f'task {cfg.task.name} is not implemented')

    return Task(cfg=cfg)
