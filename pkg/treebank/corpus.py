"""
Corpus-level helpers: deterministic train/test splits and per-sentence
fan-out across worker processes.
"""
import logging
from multiprocessing import Pool
from typing import Callable, Sequence, TypeVar

import numpy as np

from .model import AnnotatedSentence

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def split_corpus(
    corpus: Sequence[AnnotatedSentence],
    test_size: int,
    seed: int = 42,
) -> tuple[list[AnnotatedSentence], list[AnnotatedSentence]]:
    """
    Hold out `test_size` sentences chosen by a seeded permutation.

    Both halves keep the original corpus order.
    """
    if not 0 <= test_size <= len(corpus):
        raise ValueError(f"test size {test_size} out of range for {len(corpus)} sentences")
    order = np.random.default_rng(seed).permutation(len(corpus))
    held_out = set(int(i) for i in order[:test_size])
    train = [s for i, s in enumerate(corpus) if i not in held_out]
    test = [s for i, s in enumerate(corpus) if i in held_out]
    return train, test


def map_sentences(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """
    Apply `fn` to every item, in a process pool when jobs > 1.

    Results come back in input order either way; `fn` must be picklable.
    """
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    log.debug("fanning out %d items over %d workers", len(items), jobs)
    chunksize = max(1, len(items) // (jobs * 4))
    with Pool(jobs) as pool:
        return pool.map(fn, items, chunksize=chunksize)
