"""Delayed filesystem operations.

Commands that create or delete files outside the training loop (`init`,
`clean`) put their actions in the `op_queue`. Inside `op_queue_context`
the actions are listed, confirmed and then applied; outside of it they
run immediately.
"""
from __future__ import annotations

import atexit
import logging
from collections import deque
from contextlib import contextmanager
from inspect import signature
from typing import Any, Callable, Optional, Sequence

import click
from pydantic import Field, field_validator

from ._logging_utils import snnlog_screen
from .schema import BaseModel

logger = logging.getLogger(__name__)

OP_STYLE = {'fg': 'green'}
NO_OP_STYLE = {'fg': 'red', 'bold': True}
HEADER_STYLE = {'fg': 'red', 'bold': True}

loginfo = snnlog_screen.info
logwarning = snnlog_screen.warning
style = click.style


class Operation(BaseModel):
    """A described, deferred call."""
    description: str = Field(description='What the operation does.')
    extra_description: Optional[str] = Field(None, description='Usually the target path.')
    style: dict[str, Any] = Field(OP_STYLE, description='Styling for the description.')
    quiet: bool = Field(False, description='Do not list this operation on screen.')
    action: Optional[Callable] = Field(None, description='Callable to execute, None for no-op.')
    args: Optional[Sequence] = Field(None, validate_default=True)
    kwargs: Optional[dict] = Field(None, validate_default=True)

    @property
    def long_description(self) -> str:
        description = style(self.description, **self.style)
        if self.extra_description:
            description = f'{description} : {self.extra_description}'
        return description

    @field_validator('args')
    def validate_args(cls, v):
        return () if v is None else v

    @field_validator('kwargs')
    def validate_kwargs(cls, v):
        return {} if v is None else v

    def __call__(self) -> Operation:
        if self.action:
            logger.debug(self.long_description)
            self.action(*self.args, **self.kwargs)  # type: ignore
        return self


class Operations(deque):
    """Singleton queue of pending operations."""

    _instance = None
    yes = False  # apply without asking
    enabled = False  # queue instead of executing directly
    dry_run = False  # list, never apply

    def __new__(cls, *args, **kwargs):
        if not Operations._instance:
            Operations._instance = super().__new__(cls)
        return Operations._instance

    @property
    def n_actions(self) -> int:
        return sum(op.action is not None for op in self)

    def add(self, **kwargs) -> None:
        self.append(Operation(**kwargs))

    def add_no_op(self, description: str, extra_description: Optional[str] = None):
        """Record that something will deliberately not be done."""
        self.add(action=None,
                 description=description,
                 extra_description=extra_description,
                 style=NO_OP_STYLE)

    def put(self, item: Operation):
        self.append(item)

    def append(self, item: Operation):  # type: ignore
        if self.enabled:
            logger.debug('Queued %s', item.description)
            super().append(item)
        else:
            loginfo('- ' + item.long_description)
            item()

    def apply(self) -> Operation:
        """Apply the next operation and remove it from the queue."""
        op = self.popleft()
        op()
        return op

    def apply_all(self) -> None:
        from tqdm import tqdm

        loginfo(style('Applying operations', **HEADER_STYLE))  # type: ignore
        with tqdm(total=self.n_actions, disable=not snnlog_screen.handlers) as pbar:
            while self:
                op = self.apply()
                if op.action:
                    pbar.update()

    def confirm_apply_all(self) -> bool:
        """List the queue, ask for confirmation and apply.

        Returns
        -------
        bool
            True if the operations were applied.
        """
        loginfo('')
        loginfo(style('Operations in the queue:', **HEADER_STYLE))  # type: ignore
        for op in self:
            if not op.quiet:
                loginfo('- ' + op.long_description)

        if self.dry_run:
            loginfo('Dry run enabled, not applying op_queue')
            return False

        if self.n_actions == 0:
            loginfo('\nNo actions to execute.')
            return False

        is_confirmed = self.yes or click.confirm(
            f'\nDo you want to apply all {self.n_actions} operations?', default=False)

        if is_confirmed:
            self.apply_all()

        return is_confirmed

    def check_unconfirmed_operations(self):
        if self:
            logwarning(
                style(f'There are still {self.n_actions} operations in the queue at exit!',
                      **HEADER_STYLE))


op_queue = Operations()


def add_to_op_queue(op_desc: str, extra_desc: Optional[str] = None, quiet: bool = False):
    """Decorator that queues the call instead of running it. The descriptions
    may be format strings over the function arguments.

    ```python
    @add_to_op_queue('Writing config', '{path}')
    def write_config(cfg, path):
        ...
    ```
    """

    def decorator(func: Callable):

        def wrapper(*args, **kwargs) -> None:
            fkwargs = dict(zip(signature(func).parameters, args))
            fkwargs.update(kwargs)

            op_queue.add(action=func,
                         args=args,
                         kwargs=kwargs,
                         description=op_desc.format(**fkwargs),
                         extra_description=extra_desc.format(
                             **fkwargs) if extra_desc else None,
                         quiet=quiet)

        return wrapper

    return decorator


atexit.register(op_queue.check_unconfirmed_operations)


@contextmanager
def op_queue_context():
    """Enable the queue, then confirm and apply it on exit."""
    if op_queue.enabled:
        raise RuntimeError('op_queue already enabled')
    try:
        op_queue.enabled = True
        yield
        op_queue.confirm_apply_all()
    finally:
        op_queue.clear()
        op_queue.enabled = False
