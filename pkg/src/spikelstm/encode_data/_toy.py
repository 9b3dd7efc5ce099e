"""The sinusoid regression toy problem."""
from __future__ import annotations

import numpy as np

from ..numerics import RngStream
from ._spikes import SpikeTrain, bernoulli_spike_encode

SIGNAL_MAX = 2.0


def toy_signal(x) -> np.ndarray:
    """`0.5 sin(3x) + 0.5 sin(6x) + 1`, which lies within [0, 2]."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * np.sin(3 * x) + 0.5 * np.sin(6 * x) + 1.0


def toy_grid(steps: int) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, steps)


def sinusoid_dataset(steps: int = 100,
                     input_size: int = 20,
                     *,
                     rng: RngStream) -> tuple[SpikeTrain, np.ndarray]:
    """Spike-encoded toy signal.

    The signal is sampled on a uniform grid over [0, 2 pi], divided by its
    upper bound 2 and rate coded into `input_size` identical channels.

    Returns
    -------
    spikes : SpikeTrain
        Shape (steps, 1, input_size).
    target : np.ndarray
        The raw signal, shape (steps,).
    """
    target = toy_signal(toy_grid(steps))
    p = np.clip(target / SIGNAL_MAX, 0.0, 1.0)

    channels = np.broadcast_to(p[:, None, None], (steps, 1, input_size))
    spikes = bernoulli_spike_encode(channels, steps, rng)

    return spikes, target
