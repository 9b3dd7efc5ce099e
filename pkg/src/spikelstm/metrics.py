"""Append-only metrics file.

```
iter,wall_ms,train_loss,train_metric,eval_metric
50,1234,0.6931,0.52,0.55
```

Every row is flushed as soon as it is written, so the file stays
parseable if training is interrupted. Missing or undefined values are
written as `nan`.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Optional

import pandas as pd

from ._types import PathLike
from .exceptions import InvariantError

logger = logging.getLogger(__name__)


@dataclass
class MetricsRow:
    iter: int
    wall_ms: int
    train_loss: float
    train_metric: float
    eval_metric: float

    def to_line(self) -> str:
        values = [str(self.iter), str(self.wall_ms)]
        values += [repr(float(v)) for v in astuple(self)[2:]]
        return ','.join(values)


HEADER = ','.join(f.name for f in fields(MetricsRow))


class MetricsWriter:
    """Write `MetricsRow`s to a CSV file.

    Parameters
    ----------
    path : PathLike
        Output file, truncated on open.
    wall_time : bool
        Record elapsed milliseconds, otherwise write 0.
    """

    def __init__(self, path: PathLike, wall_time: bool = True):
        self.path = Path(path)
        self.wall_time = wall_time
        self._start = time.perf_counter()
        self._last_iter: Optional[int] = None
        self._file = open(self.path, 'w', newline='')
        self._file.write(HEADER + '\n')
        self._file.flush()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def elapsed_ms(self) -> int:
        if not self.wall_time:
            return 0
        return int(round(1000 * (time.perf_counter() - self._start)))

    def write(self, iteration: int, train_loss: float, train_metric: float,
              eval_metric: float) -> MetricsRow:
        if self._last_iter is not None and iteration <= self._last_iter:
            raise InvariantError(
                f'metrics iteration {iteration} does not follow {self._last_iter}')
        self._last_iter = iteration

        row = MetricsRow(iteration, self.elapsed_ms(), train_loss, train_metric, eval_metric)
        self._file.write(row.to_line() + '\n')
        self._file.flush()
        return row

    def close(self):
        if not self._file.closed:
            self._file.close()


def read_metrics(path: PathLike) -> pd.DataFrame:
    """Metrics file as a data frame indexed by iteration."""
    df = pd.read_csv(path)
    return df.set_index('iter')


def window_mean(values: list[float]) -> float:
    """Mean of the finite values, NaN if there are none."""
    finite = [v for v in values if math.isfinite(v)]
    return math.fsum(finite) / len(finite) if finite else math.nan
