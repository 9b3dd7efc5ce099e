from __future__ import annotations

import logging
import math
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Optional

import numpy as np

from ._logging_utils import snnlog_screen
from .checkpoint import save_checkpoint
from .config import apply_overrides
from .exceptions import ConfigError, NumericalError
from .metrics import MetricsRow, MetricsWriter, window_mean
from .network import SpikingNetwork
from .numerics import RngStream
from .optim import AdamState, adam_step
from .tasks import Batch, Stream, get_task

if TYPE_CHECKING:
    from .config import Config
    from .tasks.base_task import AbstractTask

logger = logging.getLogger(__name__)

_DONE = object()


@dataclass
class TrainResult:
    network: SpikingNetwork
    optimizer: AdamState
    iterations: int
    final_eval: float
    rows: list[MetricsRow] = field(default_factory=list)


class _Prefetcher:
    """Single producer thread filling a bounded queue with batches.

    The producer owns the data stream, so batches come out in the same
    order as when they are drawn inline.
    """

    def __init__(self, task: AbstractTask, rng: RngStream, batch_size: int, count: int,
                 depth: int):
        self._queue: queue.Queue = queue.Queue(maxsize=depth)
        self._stop = threading.Event()
        self._done = False
        self._thread = threading.Thread(target=self._produce,
                                        args=(task, rng, batch_size, count),
                                        daemon=True)
        self._thread.start()

    def _put(self, item) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _produce(self, task, rng, batch_size, count):
        try:
            for _ in range(count):
                if not self._put(task.sample_batch(rng, batch_size)):
                    return
            self._put(_DONE)
        except BaseException as exc:
            self._put(exc)

    def __iter__(self) -> Iterator[Batch]:
        return self

    def __next__(self) -> Batch:
        if self._done:
            raise StopIteration
        item = self._queue.get()
        if item is _DONE:
            self._done = True
            self._thread.join()
            raise StopIteration
        if isinstance(item, BaseException):
            raise item
        return item

    def close(self):
        self._stop.set()
        self._thread.join()


class TrainManager:
    """Runs the encode, forward, loss, backward and update loop for one
    config.

    Parameters
    ----------
    cfg : Config
        Experiment configuration.
    task : AbstractTask, optional
        Prepared task adapter, created from `cfg` if omitted.
    """

    def __init__(self, cfg: Config, task: Optional[AbstractTask] = None):
        self.cfg = cfg
        self.options = cfg.training
        self.task = (task or get_task(cfg)).prepare()

        self.checkpoint = Path(cfg.outputs.checkpoint)
        self.metrics = Path(cfg.outputs.metrics)

    def _batches(self, rng: RngStream, count: int):
        batch_size = self.task.batch_size
        if self.options.prefetch > 0:
            return _Prefetcher(self.task, rng, batch_size, count, self.options.prefetch)
        return (self.task.sample_batch(rng, batch_size) for _ in range(count))

    def _abort(self, network: SpikingNetwork, optimizer: AdamState, iteration: int,
               reason: str):
        save_checkpoint(self.checkpoint, network, optimizer)
        logger.error('%s at iteration %i, last good checkpoint written to %s', reason,
                     iteration, self.checkpoint)
        raise NumericalError(f'{reason} at iteration {iteration}; last good checkpoint '
                             f'in {self.checkpoint}')

    def evaluate(self, network: SpikingNetwork) -> float:
        # a fresh stream each time, so every evaluation sees the same encoding
        return self.task.evaluate(network, self.task.root.spawn(Stream.EVAL))

    def run(self) -> TrainResult:
        """Train, write metrics and checkpoints, and return the result."""
        from tqdm import tqdm

        task = self.task
        opts = self.options
        root = task.root

        network = task.build_network(root.spawn(Stream.INIT))
        optimizer = AdamState.from_config(self.cfg.optimizer)

        n_iter = opts.iterations
        logger.info('Training `%s` for %i iterations, batch size %i, loss mode `%s`',
                    self.cfg.task.name, n_iter, task.batch_size, task.loss_mode)

        losses: list[float] = []
        metrics: list[float] = []
        rows: list[MetricsRow] = []
        final_eval = math.nan

        batches = self._batches(root.spawn(Stream.DATA), n_iter)

        try:
            with MetricsWriter(self.metrics, wall_time=opts.metrics_wall_time) as writer, \
                    tqdm(total=n_iter, disable=self.cfg.quiet, desc='train') as pbar:
                for iteration, batch in enumerate(batches, start=1):
                    result = network.loss_and_grads(batch.inputs, batch.targets,
                                                    task.loss_mode)

                    if not math.isfinite(result.loss):
                        self._abort(network, optimizer, iteration, 'non-finite loss')

                    try:
                        adam_step(optimizer, network.tables(), result.grads, inplace=True)
                    except NumericalError:
                        self._abort(network, optimizer, iteration, 'non-finite gradient')

                    losses.append(result.loss)
                    metrics.append(task.batch_metric(result, batch))
                    logger.debug('iteration %i, loss %.6g', iteration, result.loss)

                    pbar.update()
                    pbar.set_postfix(loss=f'{result.loss:.4g}')

                    if iteration % opts.eval_every == 0 or iteration == n_iter:
                        final_eval = self.evaluate(network)
                        row = writer.write(iteration, window_mean(losses),
                                           window_mean(metrics), final_eval)
                        rows.append(row)
                        losses.clear()
                        metrics.clear()
                        logger.info('iteration %i: train loss %.6g, train %s %.6g, eval %s %.6g',
                                    iteration, row.train_loss, task.metric_name,
                                    row.train_metric, task.metric_name, final_eval)

                    if opts.checkpoint_every and iteration % opts.checkpoint_every == 0:
                        save_checkpoint(self.checkpoint, network, optimizer)
        finally:
            if isinstance(batches, _Prefetcher):
                batches.close()

        if n_iter == 0:
            final_eval = self.evaluate(network)

        save_checkpoint(self.checkpoint, network, optimizer)
        task.save_artifacts()
        logger.info('Checkpoint written to %s, metrics to %s', self.checkpoint, self.metrics)

        return TrainResult(network=network,
                           optimizer=optimizer,
                           iterations=n_iter,
                           final_eval=final_eval,
                           rows=rows)


def _suffixed(path: Path, suffix: str) -> Path:
    return path.with_name(f'{path.stem}{suffix}{path.suffix}')


def train(*, cfg: Config, repeats: int = 1, **kwargs) -> list[TrainResult]:
    """Train `repeats` models with seeds `seed .. seed + repeats - 1`.

    With more than one repeat, the output files get a `.seed<n>` suffix and
    the mean and standard deviation of the final evaluation are reported.
    """
    if repeats < 1:
        raise ConfigError(f'--repeats must be at least 1, got {repeats}')

    results = []
    for k in range(repeats):
        run_cfg = cfg
        if repeats > 1:
            seed = cfg.training.seed + k
            run_cfg = apply_overrides(
                cfg,
                seed=seed,
                checkpoint=_suffixed(cfg.outputs.checkpoint, f'.seed{seed}'),
                metrics=_suffixed(cfg.outputs.metrics, f'.seed{seed}'),
            )
            logger.info('Repeat %i of %i, seed %i', k + 1, repeats, seed)

        manager = TrainManager(run_cfg)
        result = manager.run()
        results.append(result)

        snnlog_screen.info(f'seed {run_cfg.training.seed}: '
                           f'{manager.task.metric_name} {result.final_eval:.6g}')

    if repeats > 1:
        values = np.array([r.final_eval for r in results])
        snnlog_screen.info(f'{manager.task.metric_name}: {values.mean():.6g} '
                           f'± {values.std(ddof=1):.2g} (n={repeats})')

    return results
