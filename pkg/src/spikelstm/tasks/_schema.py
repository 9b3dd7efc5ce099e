from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional

from pydantic import Field, model_validator

from ..schema import BaseModel
from ..utils import formatter as f


class TaskModel(BaseModel):
    """Base of all task sections, selected by `name`."""


class _HeldOutModel(TaskModel):
    eval_fraction: float = Field(0.1,
                                 gt=0,
                                 lt=1,
                                 description=f("""
        Fraction of the training data held out for evaluation when no
        separate evaluation file is given."""))
    eval_limit: Optional[int] = Field(
        None, ge=1, description='Evaluate on at most this many held-out samples.')


class ToyTaskModel(TaskModel):
    """Regress the toy signal `0.5 sin(3x) + 0.5 sin(6x) + 1` from its rate
    coded spikes."""
    name: Literal['toy'] = 'toy'
    steps: int = Field(100, ge=1, description='Number of grid points (time steps).')
    input_size: int = Field(20, ge=1, description='Number of parallel spike channels.')


class SeqImageTaskModel(_HeldOutModel):
    """Classify images presented one row per time step."""
    name: Literal['seq-image-classify'] = 'seq-image-classify'
    images: Path = Field(description='IDX file with training images.')
    labels: Path = Field(description='IDX file with training labels.')
    test_images: Optional[Path] = Field(None, description='IDX file with test images.')
    test_labels: Optional[Path] = Field(None, description='IDX file with test labels.')
    train_limit: Optional[int] = Field(None,
                                       ge=1,
                                       description='Use only the first n training images.')
    transpose: bool = Field(False,
                            description='Transpose every image (EMNIST stores them transposed).')
    num_classes: int = Field(10, ge=2, description='Number of classes.')

    @model_validator(mode='after')
    def check_test_pair(self):
        if (self.test_images is None) != (self.test_labels is None):
            raise ValueError('`test_images` and `test_labels` must be given together')
        return self


class _CorpusModel(_HeldOutModel):
    corpus: Path = Field(description='UTF-8 training text.')
    eval_corpus: Optional[Path] = Field(None, description='UTF-8 held-out text.')
    corpus_limit: Optional[int] = Field(52000,
                                        ge=1,
                                        description='Keep only the first n characters.')
    steps: int = Field(100, ge=1, description='Sequence length of a training sample.')


class CharLMTaskModel(_CorpusModel):
    """Next-character prediction on one-hot spike inputs."""
    name: Literal['char-lm'] = 'char-lm'


class WordLMTaskModel(_CorpusModel):
    """Next-word prediction on pretrained word embeddings."""
    name: Literal['word-lm'] = 'word-lm'
    embedding_dim: int = Field(100, ge=1, description='Size of the word vectors.')
    embedding_window: int = Field(5, ge=1, description='Context words on either side.')
    embedding_epochs: int = Field(5, ge=1, description='Pretraining passes over the corpus.')
    embedding_lr: float = Field(0.01, gt=0, description='Pretraining learning rate.')


class ChunkTaskModel(_HeldOutModel):
    """Classify precomputed feature vectors fed in consecutive chunks."""
    name: Literal['chunk-classify'] = 'chunk-classify'
    features: Path = Field(description='Feature CSV with `label` and `f0 .. fN` columns.')
    test_features: Optional[Path] = Field(None, description='Held-out feature CSV.')
    chunk: int = Field(48, ge=1, description='Inputs per time step.')
    chunks: int = Field(8, ge=1, description='Number of time steps.')
    num_classes: Optional[int] = Field(None,
                                       ge=2,
                                       description='Number of classes, inferred if omitted.')
