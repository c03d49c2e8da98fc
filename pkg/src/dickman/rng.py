"""Reproducible, counter-based random substreams.

Every stream is a Philox generator keyed by hashing ``(master_seed, domain...,
stream_index)`` through :class:`numpy.random.SeedSequence`. Streams never
share state, so splitting work across processes by stream index cannot
change any draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

_U64 = 2**64

# Domain tags keep unrelated consumers of one master seed apart.
TAG_SAMPLER = 1
TAG_SIMULATION = 2
TAG_REFERENCE = 3
TAG_INVERSIONS = 4
TAG_ORACLE = 5


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0
    domain: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise ParameterDomainError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.stream_index) < 0:
            raise ParameterDomainError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            int(self.master_seed), spawn_key=(*self.domain, int(self.stream_index))
        )
        return np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "RngStream":
        """Substream nested under this one; ``index`` becomes the new stream index."""
        return RngStream(self.master_seed, index, (*self.domain, int(self.stream_index)))

    def with_domain(self, *tags: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index, (*self.domain, *tags))
