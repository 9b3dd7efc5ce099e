"""Convergence curves for a grid of surrogate widths.

One model is trained per `(alpha1, alpha2)` pair, all on the same seed.
Each pair writes its own metrics file to the sweep directory,
`alpha1=<a1>_alpha2=<a2>.csv`, and the curves are combined into a single
long-format table `alpha_sweep.csv`:

```
alpha1,alpha2,iter,wall_ms,train_loss,train_metric,eval_metric
```
"""
from __future__ import annotations

import logging
from itertools import product
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

import pandas as pd
import xarray as xr

from ._logging_utils import snnlog_screen
from .config import apply_overrides
from .exceptions import ConfigError
from .metrics import read_metrics
from .schema import expand_values
from .train import TrainManager
from .utils import format_float

if TYPE_CHECKING:
    from .config import Config

logger = logging.getLogger(__name__)

SWEEP_CSV = 'alpha_sweep.csv'


def pair_stem(alpha1: float, alpha2: float) -> str:
    return f'alpha1={format_float(alpha1)}_alpha2={format_float(alpha2)}'


def combine_curves(curves: dict[tuple[float, float], pd.DataFrame]) -> xr.Dataset:
    """Stack per-pair metrics (indexed by `iter`) on `alpha1` and `alpha2`
    dimensions."""
    datasets = []
    for (alpha1, alpha2), df in curves.items():
        ds = df.to_xarray().expand_dims(alpha1=[alpha1], alpha2=[alpha2])
        datasets.append(ds)
    return xr.combine_by_coords(datasets)


def sweep_alpha(*,
                cfg: Config,
                alpha1: Optional[Sequence[float]] = None,
                alpha2: Optional[Sequence[float]] = None,
                **kwargs) -> pd.DataFrame:
    """Train one model per `(alpha1, alpha2)` pair.

    Parameters
    ----------
    cfg : Config
        Base configuration, `sweep` supplies the defaults.
    alpha1, alpha2 : Sequence[float], optional
        Grid values, taken from `cfg.sweep` when omitted or empty.

    Returns
    -------
    pd.DataFrame
        Combined curves, as written to `alpha_sweep.csv`.
    """
    values1 = list(alpha1) if alpha1 else expand_values(cfg.sweep.alpha1)
    values2 = list(alpha2) if alpha2 else expand_values(cfg.sweep.alpha2)

    if not values1 or not values2:
        raise ConfigError('alpha sweep needs at least one value of alpha1 and of alpha2')

    out_dir = Path(cfg.sweep.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pairs = list(product(values1, values2))
    logger.info('Sweeping %i surrogate width pairs into %s', len(pairs), out_dir)

    curves = {}
    for a1, a2 in pairs:
        stem = pair_stem(a1, a2)
        run_cfg = apply_overrides(cfg,
                                  alpha1=a1,
                                  alpha2=a2,
                                  checkpoint=out_dir / f'{stem}.ckpt',
                                  metrics=out_dir / f'{stem}.csv')
        snnlog_screen.info(f'alpha1={a1:g}, alpha2={a2:g}')
        TrainManager(run_cfg).run()
        curves[(a1, a2)] = read_metrics(run_cfg.outputs.metrics)

    ds = combine_curves(curves)
    df = ds.to_dataframe().reset_index()
    df = df.dropna(subset=['train_loss']).sort_values(['alpha1', 'alpha2', 'iter'])

    out_file = out_dir / SWEEP_CSV
    df.to_csv(out_file, index=False)
    snnlog_screen.info(f'Curves written to {out_file}')

    return df
