"""Acceptance probabilities of circuits under the test distributions."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .circuits import MonotoneCircuit, evaluate_batch, evaluate_inputs
from .distributions import exact_probability, sample_batch
from .errors import ParameterError
from .seeding import SeedSpec, as_seed, worker_count
from .stats import Estimate, bernoulli_estimate

CHUNK = 256


def _check_dist(c, dist):
    if c.n_vertices != dist.n:
        raise ParameterError(f"circuit is over {c.n_vertices} vertices, distribution over {dist.n}")


def count_accepting(c: MonotoneCircuit, dist, trials: int, seed, workers: int | None = None) -> int:
    """Number of accepted samples among trials ``0 .. trials-1``."""
    seed = as_seed(seed)

    def run(start):
        edges = sample_batch(dist, seed, start, min(CHUNK, trials - start))
        return int(evaluate_batch(c, edges).sum())

    starts = range(0, trials, CHUNK)
    nw = worker_count(workers)
    if nw == 1 or len(starts) == 1:
        return sum(map(run, starts))
    with ThreadPoolExecutor(nw) as pool:
        return sum(pool.map(run, starts))


def estimate_acceptance(c: MonotoneCircuit, dist, trials: int, seed: SeedSpec | int | None = None,
                        workers: int | None = None) -> Estimate:
    """Monte-Carlo acceptance rate with a 99% half-width."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    _check_dist(c, dist)
    return bernoulli_estimate(count_accepting(c, dist, trials, seed, workers), trials)


def exact_acceptance(c: MonotoneCircuit, dist):
    """Exact acceptance probability by weighted enumeration of the input slots."""
    _check_dist(c, dist)
    return exact_probability(dist, c.input_slots, lambda bits: evaluate_inputs(c, bits))
