"""Reproducible random streams.

Every trial draws from its own generator, derived from
``(master_seed, stream_id, trial_index)``, so results do not depend on how
trials are split across workers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def rng(self, trial_index: int) -> np.random.Generator:
        return trial_rng(self, trial_index)

    def substream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)


def trial_rng(seed: SeedSpec, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed.master_seed, seed.stream_id, int(trial_index)])
    return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        return SeedSpec()
    return SeedSpec(int(seed))


def worker_count(requested: int | None = None) -> int:
    """Number of worker threads, capped by ``CLIQUELAB_THREADS``."""
    cap = os.environ.get("CLIQUELAB_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)
