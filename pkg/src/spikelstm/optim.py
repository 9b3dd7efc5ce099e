"""Adam optimizer with bias correction.

One optimizer state owns the moment buffers of every parameter table,
layer and head alike. Tables are updated in sorted-name order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from pydantic import Field

from .exceptions import NumericalError, ShapeError
from .lstm_snn import GradientSet
from .schema import BaseModel

logger = logging.getLogger(__name__)


class AdamConfig(BaseModel):
    """Optimizer settings."""
    lr: float = Field(0.001, gt=0, description='Learning rate.')
    beta1: float = Field(0.9, ge=0, lt=1, description='Decay of the first moment.')
    beta2: float = Field(0.999, ge=0, lt=1, description='Decay of the second moment.')
    eps: float = Field(1e-8, gt=0, description='Denominator offset.')


@dataclass
class AdamState:
    """Moment buffers and hyperparameters."""
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_config(cls, cfg: AdamConfig) -> AdamState:
        return cls(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)

    def copy(self) -> AdamState:
        return AdamState(lr=self.lr,
                         beta1=self.beta1,
                         beta2=self.beta2,
                         eps=self.eps,
                         step=self.step,
                         m={k: arr.copy() for k, arr in self.m.items()},
                         v={k: arr.copy() for k, arr in self.v.items()})


def adam_step(state: AdamState,
              params: Mapping[str, np.ndarray],
              grads: Union[GradientSet, Mapping[str, np.ndarray]],
              inplace: bool = False) -> tuple[dict[str, np.ndarray], AdamState]:
    """Apply one Adam update.

    Parameters
    ----------
    state : AdamState
        Optimizer state, missing buffers are created as zeros.
    params : Mapping[str, np.ndarray]
        Parameter tables by name.
    grads : GradientSet | Mapping[str, np.ndarray]
        Gradients with exactly the keys and shapes of `params`.
    inplace : bool
        Update `params` and `state` in place instead of returning copies.

    Returns
    -------
    params, state
        Updated parameters and optimizer state.

    Raises
    ------
    ShapeError
        When gradient and parameter layouts differ.
    NumericalError
        When a gradient table contains non-finite values.
    """
    g_tables = grads.tables if isinstance(grads, GradientSet) else grads

    if set(g_tables) != set(params):
        raise ShapeError(f'gradient tables {sorted(g_tables)} do not match '
                         f'parameters {sorted(params)}')

    for name in sorted(params):
        if g_tables[name].shape != params[name].shape:
            raise ShapeError(f'gradient `{name}` has shape {g_tables[name].shape}, '
                             f'parameter has {params[name].shape}')
        if not np.all(np.isfinite(g_tables[name])):
            raise NumericalError(f'non-finite gradient in table `{name}`')

    if not inplace:
        state = state.copy()
        params = {name: arr.copy() for name, arr in params.items()}

    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t

    for name in sorted(params):
        g = g_tables[name]
        m = state.m.setdefault(name, np.zeros_like(params[name]))
        v = state.v.setdefault(name, np.zeros_like(params[name]))

        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        m_hat = m / bc1
        v_hat = v / bc2
        params[name] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)

    logger.debug('Adam step %i applied to %i tables', t, len(params))

    return dict(params), state
