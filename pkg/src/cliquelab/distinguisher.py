"""Explicit monotone circuit separating G(n, p) from a planted beta-clique.

The circuit tests ``m`` clique indicators on independently uniform
``ell``-subsets and feeds them to a threshold gate built from a Batcher
sorting network. Parameters come from three rules:

* ``ell`` is the least size with ``(beta/n)**ell >= 5 * p**C(ell, 2)``;
* ``m = ceil(K / (q * delta))`` with ``q = (beta/n)**ell``;
* ``tau = ceil(4 * p_ind * m) + 1`` with ``p_ind = p**C(ell, 2)``, i.e. just
  above the Markov line on the negative side.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .acceptance import estimate_acceptance
from .circuits import CircuitBuilder, MonotoneCircuit, build_sorting_network, threshold_wiring
from .distributions import NegDistParams, PosDistParams, edge_probability, sample_batch
from .errors import CapacityError, InfeasibleError, ParameterError
from .graphs import clique_slots
from .seeding import SeedSpec, as_seed
from .stats import Estimate

FEASIBILITY_FACTOR = 5.0
DEFAULT_DELTA = 0.1
DEFAULT_K = 8.0
ELL_CAP = 64
MAX_M = 10**7
SUCCESS_BAR = 2 / 3


@dataclass(frozen=True)
class CliqueSizeChoice:
    ell: int
    gamma: float
    q: float
    p_ind: float

    @property
    def ratio(self) -> float:
        return self.q / (FEASIBILITY_FACTOR * self.p_ind)


def _log_ratio(n, beta, p, ell):
    return ell * math.log(beta / n) - (math.log(FEASIBILITY_FACTOR) + comb(ell, 2) * math.log(p))


def select_clique_size(n: int, alpha: int, beta: int, ell_cap: int = ELL_CAP) -> CliqueSizeChoice:
    """Smallest ``ell`` in ``[2, ell_cap]`` with ``(beta/n)^ell >= 5 p^C(ell,2)``."""
    if not 4 <= alpha <= beta <= n:
        raise ParameterError(f"need 4 <= alpha <= beta <= n, got {alpha}, {beta}, {n}")
    p = edge_probability(n, alpha)
    gamma = (alpha - 1) / 2 * math.log(n / beta) / math.log(n)
    best = -math.inf
    for ell in range(2, min(ell_cap, beta) + 1):
        lr = _log_ratio(n, beta, p, ell)
        best = max(best, lr)
        if lr >= 0:
            q = math.exp(ell * math.log(beta / n))
            p_ind = math.exp(comb(ell, 2) * math.log(p))
            return CliqueSizeChoice(ell, gamma, q, p_ind)
    raise InfeasibleError(
        f"no feasible clique size up to {min(ell_cap, beta)} (best q/(5 p_ind) = {math.exp(best):.3g})",
        best_ratio=math.exp(best),
    )


def choose_trial_count(q: float, delta: float = DEFAULT_DELTA, K: float = DEFAULT_K, max_m: int = MAX_M) -> int:
    """Number of indicators ``m = ceil(K / (q * delta))``."""
    if not 0 < q <= 1:
        raise ParameterError("q must lie in (0, 1]")
    if not 0 < delta <= 1:
        raise ParameterError("delta must lie in (0, 1]")
    # the tiny slack keeps exact products like 8/(0.1*0.1) from rounding up
    m = math.ceil(K / (q * delta) * (1 - 1e-12))
    if m > max_m:
        raise CapacityError(f"m = {m} indicators exceeds the desk-scale cap {max_m}")
    return m


def default_threshold(p_ind: float, m: int) -> int:
    return min(m, math.ceil(4 * p_ind * m) + 1)


@dataclass(frozen=True)
class DistinguisherParams:
    n: int
    alpha: int
    beta: int
    ell: int
    m: int
    tau: int
    seed: SeedSpec = field(default_factory=SeedSpec)

    def __post_init__(self):
        if not 2 <= self.ell <= self.beta <= self.n:
            raise ParameterError("need 2 <= ell <= beta <= n")
        if not 1 <= self.tau <= self.m:
            raise ParameterError("need 1 <= tau <= m")
        if not 4 <= self.alpha <= self.n:
            raise ParameterError("need 4 <= alpha <= n")
        object.__setattr__(self, "seed", as_seed(self.seed))

    @property
    def p(self) -> float:
        return edge_probability(self.n, self.alpha)

    @property
    def p_ind(self) -> float:
        return self.p ** comb(self.ell, 2)

    @property
    def q(self) -> float:
        return (self.beta / self.n) ** self.ell

    @property
    def certificate(self) -> dict:
        """Feasibility record: ``q >= 5 p_ind`` and where tau sits."""
        return {
            "q": self.q,
            "p_ind": self.p_ind,
            "feasible": self.q >= FEASIBILITY_FACTOR * self.p_ind,
            "markov_line": 4 * self.p_ind * self.m,
            "positive_mean": comb(self.beta, self.ell) / comb(self.n, self.ell) * self.m,
        }

    def negative(self) -> NegDistParams:
        return NegDistParams(self.n, self.alpha)

    def positive(self) -> PosDistParams:
        return PosDistParams(self.n, self.beta)

    def stream(self, k: int) -> SeedSpec:
        # 0: construction, 1: negative trials, 2: positive trials
        return SeedSpec(self.seed.master_seed, 3 * self.seed.stream_id + k)


def plan_distinguisher(n: int, alpha: int, beta: int, delta: float = DEFAULT_DELTA, K: float = DEFAULT_K,
                       seed=None, ell_cap: int = ELL_CAP) -> DistinguisherParams:
    choice = select_clique_size(n, alpha, beta, ell_cap)
    m = choose_trial_count(choice.q, delta, K)
    return DistinguisherParams(n, alpha, beta, choice.ell, m, default_threshold(choice.p_ind, m), as_seed(seed))


def indicator_sets(params: DistinguisherParams) -> np.ndarray:
    """``(m, ell)`` array of the random vertex sets, each sorted."""
    rng = params.stream(0).rng(0)
    keys = rng.random((params.m, params.n))
    return np.sort(np.argsort(keys, axis=1)[:, : params.ell], axis=1)


def build_distinguisher(params: DistinguisherParams) -> MonotoneCircuit:
    bld = CircuitBuilder(params.n)
    outs = [bld.clique_indicator(s) for s in indicator_sets(params)]
    return bld.build(threshold_wiring(bld, outs, params.tau))


def expected_size(params: DistinguisherParams) -> int:
    return params.m * max(0, comb(params.ell, 2) - 1) + 2 * len(build_sorting_network(params.m))


def indicator_counts(params: DistinguisherParams, dist, trials: int, seed=None) -> np.ndarray:
    """Number of satisfied indicators on each of ``trials`` samples of ``dist``."""
    seed = as_seed(seed) if seed is not None else params.stream(1 if dist.kind == "negative" else 2)
    slots = np.array([clique_slots(s, params.n) for s in indicator_sets(params)], dtype=np.int64)
    out = np.empty(trials, dtype=np.int64)
    for lo in range(0, trials, 256):
        edges = sample_batch(dist, seed, lo, min(256, trials - lo))
        out[lo:lo + len(edges)] = edges[:, slots].all(axis=2).sum(axis=1)
    return out


@dataclass
class SuccessReport:
    params: DistinguisherParams
    accept_rate_pos: Estimate
    reject_rate_neg: Estimate
    trials: int
    circuit_size: int

    @property
    def passed(self) -> bool:
        return self.accept_rate_pos.value >= SUCCESS_BAR and self.reject_rate_neg.value >= SUCCESS_BAR

    def to_dict(self) -> dict:
        p = self.params
        return {
            "n": p.n,
            "alpha": p.alpha,
            "beta": p.beta,
            "ell": p.ell,
            "m": p.m,
            "tau": p.tau,
            "trials": self.trials,
            "accept_pos": self.accept_rate_pos.value,
            "ci_pos": list(self.accept_rate_pos.wilson()),
            "reject_neg": self.reject_rate_neg.value,
            "ci_neg": list(self.reject_rate_neg.wilson()),
            "circuit_size": self.circuit_size,
            "seed": p.seed.master_seed,
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def measure_success(params: DistinguisherParams, trials: int, circuit: MonotoneCircuit | None = None,
                    workers: int | None = None) -> SuccessReport:
    if trials < 100:
        raise ParameterError("measure_success needs at least 100 trials")
    circuit = circuit if circuit is not None else build_distinguisher(params)
    neg = estimate_acceptance(circuit, params.negative(), trials, params.stream(1), workers)
    pos = estimate_acceptance(circuit, params.positive(), trials, params.stream(2), workers)
    reject = Estimate(1.0 - neg.value, neg.half_width, trials)
    return SuccessReport(params, pos, reject, trials, circuit.size)
