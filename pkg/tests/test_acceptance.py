"""End-to-end training runs, too slow for every commit.

Run with `pytest -m slow`. The MNIST runs also need the four IDX files in
the directory named by `SPIKELSTM_MNIST_DIR`.
"""
from __future__ import annotations

from pathlib import Path

import pytest
from pytest import MNIST_DIR

from spikelstm.config import Config, apply_overrides, load_config
from spikelstm.generate import generate
from spikelstm.init import bundled_config
from spikelstm.metrics import read_metrics
from spikelstm.numerics import RngStream
from spikelstm.tasks import Stream, get_task
from spikelstm.train import TrainManager
from spikelstm.utils import work_directory

pytestmark = pytest.mark.slow

needs_mnist = pytest.mark.skipif(MNIST_DIR is None, reason='SPIKELSTM_MNIST_DIR not set')


def periodic_lm_config(path: Path, **training) -> Config:
    (path / 'abc.txt').write_text('abc' * 3334)
    return Config.from_dict({
        'task': {
            'name': 'char-lm',
            'corpus': str(path / 'abc.txt'),
            'steps': 20,
        },
        'network': {
            'hidden_size': 32,
            'head_init_scale': 0.01,
        },
        'optimizer': {
            'lr': 0.005
        },
        'training': {
            'iterations': 400,
            'batch_size': 16,
            'eval_every': 100,
            **training
        },
        'outputs': {
            'checkpoint': 'abc.ckpt',
            'metrics': 'abc.csv'
        },
    })


def mnist_config(**overrides) -> Config:
    cfg = load_config(bundled_config('smnist'))
    root = Path(MNIST_DIR)
    data = cfg.model_dump()
    for key in ('images', 'labels', 'test_images', 'test_labels'):
        data['task'][key] = root / Path(data['task'][key]).name
    cfg = Config.from_dict(data)
    return apply_overrides(cfg, **overrides)


def test_toy_correlation(tmp_path):
    cfg = load_config(bundled_config('toy'))
    with work_directory(tmp_path):
        result = TrainManager(cfg).run()
    assert result.final_eval >= 0.9


def test_toy_loss_decreases(tmp_path):
    cfg = apply_overrides(load_config(bundled_config('toy')), iterations=200)
    with work_directory(tmp_path):
        result = TrainManager(cfg).run()
    assert result.rows[-1].train_loss < result.rows[0].train_loss


def test_untrained_char_lm_is_uniform(tmp_path):
    cfg = periodic_lm_config(tmp_path, iterations=0)
    with work_directory(tmp_path):
        result = TrainManager(cfg).run()
    assert result.final_eval == pytest.approx(3.0, rel=0.05)


def test_periodic_char_lm(tmp_path):
    cfg = periodic_lm_config(tmp_path)
    with work_directory(tmp_path):
        manager = TrainManager(cfg)
        result = manager.run()

    assert result.final_eval <= 1.2

    task = get_task(cfg).prepare()
    text = generate(result.network,
                    task,
                    'abc',
                    300,
                    temperature=0.0,
                    rng=task.root.spawn(Stream.GENERATE))
    continuation = text[3:]
    hits = sum(ch == 'abc'[k % 3] for k, ch in enumerate(continuation))
    assert hits / len(continuation) >= 0.95


def test_fixed_seed_generation_repeats(tmp_path):
    cfg = periodic_lm_config(tmp_path, iterations=50)
    with work_directory(tmp_path):
        network = TrainManager(cfg).run().network

    task = get_task(cfg).prepare()
    a = generate(network, task, 'ab', 50, rng=RngStream(8))
    b = generate(network, task, 'ab', 50, rng=RngStream(8))
    assert a == b


@needs_mnist
def test_mnist_accuracy(tmp_path):
    with work_directory(tmp_path):
        result = TrainManager(mnist_config()).run()
    assert result.final_eval >= 0.90


@needs_mnist
def test_alpha_sweep_direction(tmp_path):
    losses = {}
    with work_directory(tmp_path):
        for alpha1, alpha2 in ((4.0, 0.3), (0.5, 0.05)):
            metrics = Path(f'alpha1={alpha1}_alpha2={alpha2}.csv')
            cfg = mnist_config(iterations=500, alpha1=alpha1, alpha2=alpha2, metrics=metrics)
            TrainManager(cfg).run()
            losses[alpha1, alpha2] = read_metrics(metrics).loc[500, 'train_loss']

    assert losses[4.0, 0.3] < losses[0.5, 0.05]
