"""Text corpora and symbol vocabularies."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from .._types import PathLike
from ..exceptions import DataFormatError

logger = logging.getLogger(__name__)

WORD_PATTERN = re.compile(r"[a-z0-9']+|[^\sa-z0-9']")


@dataclass
class Vocab:
    """Bijection between symbols and dense ids `0 .. size-1`."""
    symbols: list[Hashable]
    _index: dict[Hashable, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {sym: i for i, sym in enumerate(self.symbols)}
        if len(self._index) != len(self.symbols):
            raise DataFormatError('vocabulary symbols must be unique')

    @classmethod
    def from_sequence(cls, symbols: Iterable[Hashable]) -> Vocab:
        """Ids are assigned in order of first occurrence."""
        return cls(list(dict.fromkeys(symbols)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return self.size

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def id_of(self, symbol: Hashable) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise DataFormatError(f'unknown symbol {symbol!r}') from None

    def encode(self, symbols: Iterable[Hashable]) -> np.ndarray:
        return np.array([self.id_of(sym) for sym in symbols], dtype=np.int64)

    def decode(self, ids: Iterable[int]) -> list[Hashable]:
        return [self.symbols[int(i)] for i in ids]


def read_text(path: PathLike, limit: Optional[int] = None) -> str:
    """Lowercased UTF-8 text, cut to the first `limit` characters."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise DataFormatError(f'cannot read corpus {path}: {e}') from e

    text = text.lower()
    if limit is not None:
        text = text[:limit]

    if not text:
        raise DataFormatError(f'corpus {path} is empty')

    return text


def tokenize_words(text: str) -> list[str]:
    """Lowercased words; punctuation marks are tokens of their own."""
    return WORD_PATTERN.findall(text.lower())


def char_corpus(path: PathLike,
                limit: Optional[int] = None,
                vocab: Optional[Vocab] = None) -> tuple[Vocab, np.ndarray]:
    """Character stream of a text file.

    Parameters
    ----------
    path : PathLike
        UTF-8 text file.
    limit : int, optional
        Keep only the first `limit` characters.
    vocab : Vocab, optional
        Vocabulary to encode with, built from the text if omitted.

    Returns
    -------
    vocab, ids
    """
    text = read_text(path, limit)
    vocab = vocab or Vocab.from_sequence(text)
    logger.debug('%s: %i characters, %i distinct', path, len(text), vocab.size)
    return vocab, vocab.encode(text)


def word_corpus(path: PathLike,
                limit: Optional[int] = None,
                vocab: Optional[Vocab] = None) -> tuple[Vocab, np.ndarray]:
    """Word token stream of a text file, `limit` counts characters."""
    tokens = tokenize_words(read_text(path, limit))
    if not tokens:
        raise DataFormatError(f'corpus {path} contains no words')
    vocab = vocab or Vocab.from_sequence(tokens)
    logger.debug('%s: %i words, %i distinct', path, len(tokens), vocab.size)
    return vocab, vocab.encode(tokens)


def split_stream(ids: Sequence[int], eval_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a symbol stream into a training head and a held-out tail."""
    ids = np.asarray(ids)
    n_eval = int(round(len(ids) * eval_fraction))
    if n_eval < 2 or len(ids) - n_eval < 2:
        raise DataFormatError(
            f'cannot hold out {eval_fraction:.0%} of a stream of {len(ids)} symbols')
    return ids[:-n_eval], ids[-n_eval:]
