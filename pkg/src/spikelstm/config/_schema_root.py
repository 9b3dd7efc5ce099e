from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import Field, PrivateAttr

from ..optim import AdamConfig
from ..schema import BaseModel, ValueList
from ..spike_core import SurrogateConfig
from ..tasks._schema import (
    CharLMTaskModel,
    ChunkTaskModel,
    SeqImageTaskModel,
    ToyTaskModel,
    WordLMTaskModel,
)
from ..utils import formatter as f

TaskConfig = Union[ToyTaskModel, SeqImageTaskModel, CharLMTaskModel, WordLMTaskModel,
                   ChunkTaskModel]


class NetworkConfig(BaseModel):
    """Size of the recurrent layer and scale of the output head."""
    hidden_size: int = Field(100, ge=1, description='Number of LSTM spiking units.')
    head_init_scale: float = Field(1.0,
                                   gt=0,
                                   description=f("""
        Output weights are initialized as this factor times standard normal
        draws. 1 gives the plain standard normal initialization."""))


class TrainingConfig(BaseModel):
    """Options of the training loop."""
    seed: int = Field(0, ge=0, lt=2**64, description='Seed of all random streams.')
    iterations: int = Field(2000, ge=0, description='Number of optimizer updates.')
    batch_size: Optional[int] = Field(None,
                                      ge=1,
                                      description='Samples per update, task default if unset.')
    eval_every: int = Field(50, ge=1, description='Evaluate every n iterations.')
    eval_batch_size: int = Field(500, ge=1, description='Samples per evaluation forward pass.')
    loss_mode: Optional[Literal['final', 'every']] = Field(None,
                                                           description=f("""
        Score only the final step or every step. Defaults to `final` for
        classification and `every` for language modelling and the toy task."""))
    resample: bool = Field(True,
                           description=f("""
        Draw fresh input spikes at every presentation. If false, every
        sample keeps one fixed spike encoding."""))
    prefetch: int = Field(0,
                          ge=0,
                          description=f("""
        Number of batches prepared ahead of time in a background thread,
        0 prepares batches inline."""))
    checkpoint_every: int = Field(0,
                                  ge=0,
                                  description='Also write a checkpoint every n iterations.')
    metrics_wall_time: bool = Field(True,
                                    description=f("""
        Record elapsed wall time in the metrics file. Set to false to make
        metrics files byte-identical between reruns."""))


class OutputsConfig(BaseModel):
    """Files written by training."""
    checkpoint: Path = Field(Path('model.ckpt'), description='Final checkpoint.')
    metrics: Path = Field(Path('metrics.csv'), description='Metrics CSV.')
    embeddings: Path = Field(Path('embeddings.npz'),
                             description='Word embeddings (word-level tasks only).')


class SweepConfig(BaseModel):
    """Grid of surrogate widths for `spikelstm sweep-alpha`."""
    alpha1: ValueList = Field([4.0], description='Values of alpha1.')
    alpha2: ValueList = Field([0.3], description='Values of alpha2.')
    out_dir: Path = Field(Path('alpha_sweep'), description='Directory for the curves.')


class ConfigModel(BaseModel):
    """The options for the CLI are defined by this model."""
    task: TaskConfig = Field(ToyTaskModel(),
                             description='Experiment to run.',
                             discriminator='name')
    network: NetworkConfig = NetworkConfig()
    surrogate: SurrogateConfig = SurrogateConfig()
    optimizer: AdamConfig = AdamConfig()
    training: TrainingConfig = TrainingConfig()
    outputs: OutputsConfig = OutputsConfig()
    sweep: SweepConfig = SweepConfig()

    quiet: bool = Field(False, description='If true, do not output to stdout.')

    _path: Union[Path, str, None] = PrivateAttr(None)
