"""Deterministic random streams.

Every sampler and experiment in this package draws from a RandomStream, a
(seed, stream_id) pair.  The same pair always yields the same draws, on any
machine and regardless of how many worker threads are in use: parallel code
never shares a generator, it derives one child generator per trial block
from the stream's spawn key.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    """A named, reproducible source of randomness.

    seed is the experiment-level seed; stream_id distinguishes independent
    streams under the same seed (trial index, grid index, ...).
    """

    seed: int
    stream_id: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        """A fresh numpy Generator for this stream, or a child of it.

        Extra integers select independent child streams; generator(i) and
        generator(j) are independent for i != j.  Calls are cheap and each
        returns a new Generator, so concurrent use is safe.
        """
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *path)
        )
        return np.random.default_rng(seq)

    def child(self, index: int) -> "RandomStream":
        """A derived stream, for handing a whole sub-experiment its own stream."""
        mixed = int(
            np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id, index)
            ).generate_state(1, np.uint64)[0]
        )
        return RandomStream(seed=mixed, stream_id=0)


def as_generator(rng: "RandomStream | np.random.Generator") -> np.random.Generator:
    """Accept a RandomStream or an already-built Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


def blocked_mc(total: int, block_size: int, rng: RandomStream, path_offset: int = 0):
    """Yield (block_index, n_in_block, generator) covering `total` trials.

    Results accumulated in block order are bitwise identical no matter how
    many workers computed the blocks.
    """
    start = 0
    index = 0
    while start < total:
        size = min(block_size, total - start)
        yield index, size, rng.generator(path_offset, index)
        start += size
        index += 1
