"""The two test distributions and exact clique-inclusion probabilities.

``NegDistParams`` is the Erdos-Renyi distribution G(n, p) with
``p = n**(-2/(alpha-1))``; ``PosDistParams`` is a uniformly placed
``beta``-clique with all other vertices isolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import CapacityError, ParameterError
from .graphs import Graph, edge_pairs, num_slots
from .seeding import SeedSpec, as_seed

EXACT_EDGE_CAP = 24


def edge_probability(n: int, alpha: int) -> float:
    if alpha < 4 or alpha > n:
        raise ParameterError(f"need 4 <= alpha <= n, got alpha={alpha}, n={n}")
    return float(n) ** (-2.0 / (alpha - 1))


@dataclass(frozen=True)
class NegDistParams:
    """G(n, p). Pass ``alpha`` for the calibrated p, or ``p`` directly (test hook)."""

    n: int
    alpha: int | None = None
    p: float | Fraction | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("n must be >= 2")
        if self.p is None:
            if self.alpha is None:
                raise ParameterError("either alpha or p is required")
            object.__setattr__(self, "p", edge_probability(self.n, self.alpha))
        elif not 0 <= self.p <= 1:
            raise ParameterError("p must lie in [0, 1]")

    kind = "negative"

    def sample_edges(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(num_slots(self.n)) < float(self.p)


@dataclass(frozen=True)
class PosDistParams:
    n: int
    beta: int

    def __post_init__(self):
        if not 2 <= self.beta <= self.n:
            raise ParameterError(f"need 2 <= beta <= n, got beta={self.beta}, n={self.n}")

    kind = "positive"

    def sample_support(self, rng: np.random.Generator) -> np.ndarray:
        return np.sort(rng.choice(self.n, size=self.beta, replace=False))

    def sample_edges(self, rng: np.random.Generator) -> np.ndarray:
        inside = np.zeros(self.n, dtype=bool)
        inside[self.sample_support(rng)] = True
        pairs = edge_pairs(self.n)
        return inside[pairs[:, 0]] & inside[pairs[:, 1]]


def sample_negative(params: NegDistParams, seed: SeedSpec | int | None = None, trial: int = 0) -> Graph:
    return Graph(params.n, params.sample_edges(as_seed(seed).rng(trial)))


def sample_positive(params: PosDistParams, seed: SeedSpec | int | None = None, trial: int = 0) -> Graph:
    return Graph(params.n, params.sample_edges(as_seed(seed).rng(trial)))


def negative_uniforms(n: int, seed: SeedSpec | int | None = None, trial: int = 0) -> np.ndarray:
    """The uniforms behind ``sample_negative``; thresholding them at p gives the graph.

    Thresholding the same uniforms at two values of p couples the samples
    monotonically.
    """
    return as_seed(seed).rng(trial).random(num_slots(n))


def graph_from_uniforms(n: int, uniforms: np.ndarray, p: float) -> Graph:
    return Graph(n, uniforms < float(p))


def sample_batch(dist, seed: SeedSpec | int | None, start: int, count: int) -> np.ndarray:
    """Edge matrix ``(count, C(n,2))`` for trials ``start .. start+count-1``."""
    seed = as_seed(seed)
    out = np.empty((count, num_slots(dist.n)), dtype=bool)
    for i in range(count):
        out[i] = dist.sample_edges(seed.rng(start + i))
    return out


def clique_prob_positive(n: int, beta: int, ell: int) -> Fraction:
    """Pr over the planted beta-clique that a fixed ell-set lies inside it."""
    if not 2 <= ell <= beta <= n:
        raise ParameterError("need 2 <= ell <= beta <= n")
    return Fraction(comb(n - ell, beta - ell), comb(n, beta))


def clique_prob_negative(p, ell: int):
    if ell < 2:
        raise ParameterError("ell must be >= 2")
    if not 0 <= p <= 1:
        raise ParameterError("p must lie in [0, 1]")
    return p ** comb(ell, 2)


def _bit_matrix(values: np.ndarray, r: int) -> np.ndarray:
    return ((values[:, None] >> np.arange(r, dtype=np.int64)) & 1).astype(bool)


def exact_probability(dist, slots, predicate, chunk: int = 1 << 16):
    """Exact ``Pr[predicate]`` where ``predicate`` only reads the given edge slots.

    ``predicate`` maps a boolean matrix ``(N, len(slots))`` to a boolean
    vector of length N. The result is a ``Fraction`` whenever the
    distribution's probabilities are rational, else a float.
    """
    slots = np.asarray(sorted(set(int(s) for s in slots)), dtype=np.int64)
    r = len(slots)
    if isinstance(dist, NegDistParams):
        if r > EXACT_EDGE_CAP:
            raise CapacityError(f"{r} relevant edges exceed the exact cap of {EXACT_EDGE_CAP}")
        counts = np.zeros(r + 1, dtype=np.int64)
        total = 1 << r
        for lo in range(0, total, chunk):
            vals = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
            bits = _bit_matrix(vals, r)
            ok = np.asarray(predicate(bits), dtype=bool)
            counts += np.bincount(bits[ok].sum(axis=1), minlength=r + 1)
        p = dist.p
        if isinstance(p, (int, Fraction)):
            p = Fraction(p)
        zero = Fraction(0) if isinstance(p, Fraction) else 0.0
        return sum((int(c) * p**k * (1 - p) ** (r - k) for k, c in enumerate(counts) if c), zero)
    if isinstance(dist, PosDistParams):
        return _exact_positive(dist, slots, predicate, chunk)
    raise TypeError(f"unknown distribution {dist!r}")


def _exact_positive(dist: PosDistParams, slots, predicate, chunk):
    n, beta = dist.n, dist.beta
    pairs = edge_pairs(n)[slots] if len(slots) else np.zeros((0, 2), dtype=np.int64)
    relevant = sorted(set(pairs.ravel().tolist()))
    R = len(relevant)
    pos = {v: i for i, v in enumerate(relevant)}
    local = np.array([[pos[u], pos[v]] for u, v in pairs], dtype=np.int64).reshape(-1, 2)
    t_lo, t_hi = max(0, beta - (n - R)), min(beta, R)
    n_patterns = sum(comb(R, t) for t in range(t_lo, t_hi + 1))
    if n_patterns > 1 << EXACT_EDGE_CAP:
        raise CapacityError(f"{n_patterns} planted-clique patterns exceed the exact cap")
    accepted = 0
    for t in range(t_lo, t_hi + 1):
        weight = comb(n - R, beta - t)
        it = combinations(range(R), t)
        while True:
            block = [c for _, c in zip(range(chunk), it)]
            if not block:
                break
            inside = np.zeros((len(block), R), dtype=bool)
            if t:
                idx = np.array(block, dtype=np.int64)
                inside[np.arange(len(block))[:, None], idx] = True
            bits = inside[:, local[:, 0]] & inside[:, local[:, 1]]
            ok = np.asarray(predicate(bits), dtype=bool)
            accepted += int(ok.sum()) * weight
    return Fraction(accepted, comb(n, beta))


def log_clique_prob_negative(p: float, ell: int) -> float:
    return comb(ell, 2) * math.log(p)
