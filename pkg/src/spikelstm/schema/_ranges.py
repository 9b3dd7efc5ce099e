from __future__ import annotations

from typing import Union

import numpy as np
from pydantic import Field

from ._basemodel import BaseModel


class LinSpace(BaseModel):
    """Evenly spaced values over a closed interval, see [numpy.linspace][].

    ```yaml
    alpha1:
      start: 0.5
      stop: 4.0
      num: 8
    ```
    """
    start: float = Field(description='First value.')
    stop: float = Field(description='Last value.')
    num: int = Field(ge=1, description='Number of values.')

    @property
    def values(self) -> list[float]:
        # `val.item()` converts to native python types
        return [val.item() for val in np.linspace(self.start, self.stop, self.num)]


class ARange(BaseModel):
    """Evenly spaced values in a half-open interval, see [numpy.arange][]."""

    start: float = Field(description='Start of the interval, included.')
    stop: float = Field(description='End of the interval, excluded.')
    step: float = Field(gt=0, description='Spacing between values.')

    @property
    def values(self) -> list[float]:
        return [val.item() for val in np.arange(self.start, self.stop, self.step)]


ValueList = Union[list[float], LinSpace, ARange]


def expand_values(values: ValueList) -> list[float]:
    """Return the plain list of floats described by `values`."""
    if isinstance(values, (LinSpace, ARange)):
        return values.values
    return [float(val) for val in values]
