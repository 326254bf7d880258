"""Approximators (DNFs of clique indicators) and the compression pipeline.

An approximator over ``[n]`` is an antichain of vertex sets ``A_i`` read as
the function ``OR_i K_{A_i}``. The empty family is constant 0; a term of
size at most 1 is an empty conjunction, so any such term makes the
approximator constant 1.

Compression is ``trim_c`` after ``closure``: the closure repeatedly swaps a
robust clique sunflower for its core, the trim drops terms above size c.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .circuits import AND, CONST, INPUT, OR, MonotoneCircuit
from .distributions import NegDistParams, PosDistParams, exact_probability, sample_batch
from .errors import ParameterError
from .graphs import clique_slots, edge_pairs, mask_of, members
from .seeding import as_seed
from .stats import Estimate, bernoulli_estimate
from .sunflowers import SetFamily, find_robust_clique_sunflower, minimize_robust


def absorb(masks) -> frozenset:
    """Minimal elements of a set system (drops duplicates and strict supersets)."""
    out: list[int] = []
    for m in sorted(set(masks), key=lambda x: (x.bit_count(), x)):
        if not any(s & m == s for s in out):
            out.append(m)
    return frozenset(out)


class Approximator:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=()):
        self.n = int(n)
        masks = [t if isinstance(t, int) else mask_of(t) for t in terms]
        if any(m >> self.n for m in masks):
            raise ParameterError("term outside [n]")
        self.terms = absorb(masks)

    @classmethod
    def zero(cls, n):
        return cls(n, ())

    @classmethod
    def one(cls, n):
        return cls(n, [0])

    @classmethod
    def from_family(cls, f: SetFamily) -> "Approximator":
        return cls(f.n, f.masks)

    def to_family(self) -> SetFamily:
        return SetFamily(self.n, self.sorted_terms())

    def sorted_terms(self) -> list[int]:
        return sorted(self.terms, key=lambda m: (m.bit_count(), m))

    def sets(self) -> list[frozenset]:
        return [frozenset(members(m)) for m in self.sorted_terms()]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return any(t.bit_count() <= 1 for t in self.terms)

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(t.bit_count() for t in self.terms).items()))

    def slots(self) -> set[int]:
        out: set[int] = set()
        for t in self.terms:
            out.update(clique_slots(members(t), self.n))
        return out

    def evaluate_columns(self, x: np.ndarray, slot_pos: dict) -> np.ndarray:
        """Evaluate on ``(N, r)`` edge values whose columns are given by ``slot_pos``."""
        out = np.zeros(x.shape[0], dtype=bool)
        for t in self.terms:
            cols = [slot_pos[s] for s in clique_slots(members(t), self.n)]
            out |= x[:, cols].all(axis=1) if cols else True
        return out

    def evaluate_batch(self, edges: np.ndarray) -> np.ndarray:
        return self.evaluate_columns(edges, _identity_pos(self.n))

    def evaluate(self, g) -> int:
        return int(self.evaluate_batch(g.edges[None, :])[0])

    def __eq__(self, other):
        if not isinstance(other, Approximator):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, self.terms))

    def __repr__(self):
        body = ", ".join("{" + ",".join(map(str, members(m))) + "}" for m in self.sorted_terms())
        return f"Approximator(n={self.n}, [{body}])"


class _IdentityPos(dict):
    def __missing__(self, key):
        return key


def _identity_pos(n):
    return _IdentityPos()


@dataclass(frozen=True)
class CompressionParams:
    p: object
    eps: object
    c: int
    mc_trials: int = 20_000
    seed: int = 0
    minimize: bool = False

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ParameterError("need 0 < p < 1")
        if not 0 < self.eps < 1:
            raise ParameterError("need 0 < eps < 1")
        if self.c < 2:
            raise ParameterError("need c >= 2")


@dataclass
class Replacement:
    subfamily: tuple  # vertex masks replaced
    core: int
    coverage: Estimate

    def to_dict(self):
        return {
            "subfamily": [members(m) for m in self.subfamily],
            "core": members(self.core),
            "coverage": str(self.coverage.value) if self.coverage.exact else float(self.coverage.value),
            "exact": self.coverage.exact,
        }


def closure(a: Approximator, p, eps, mc_trials: int = 20_000, seed=0, minimize: bool = False):
    """Replace robust clique sunflowers by their cores until none is left.

    Returns the closed approximator and the list of replacements in order.
    Each core is inserted at most once.
    """
    terms = set(a.terms)
    log: list[Replacement] = []
    used: set[int] = set()
    while len(terms) > 1:
        fam = SetFamily(a.n, sorted(terms, key=lambda m: (m.bit_count(), m)))
        found = find_robust_clique_sunflower(fam, p, eps, mc_trials=mc_trials, seed=seed, skip=used)
        if found is None:
            break
        sub = minimize_robust(found.members, found.core, a.n, p, eps) if minimize else found.members
        used.add(found.core)
        log.append(Replacement(sub, found.core, found.coverage))
        terms = set(absorb(list(terms) + [found.core]))
    return Approximator(a.n, terms), log


def trim(a: Approximator, c: int) -> Approximator:
    if c < 2:
        raise ParameterError("need c >= 2")
    return Approximator(a.n, [t for t in a.terms if t.bit_count() <= c])


def _compress(raw: Approximator, params: CompressionParams | None):
    if params is None:
        return raw, raw, [], []
    closed, log = closure(raw, params.p, params.eps, params.mc_trials, params.seed, params.minimize)
    result = trim(closed, params.c)
    trimmed = sorted(closed.terms - result.terms)
    return closed, result, log, trimmed


def _check_pair(a, b):
    if a.n != b.n:
        raise ParameterError("approximators over different universes")


def and_raw(a: Approximator, b: Approximator) -> Approximator:
    _check_pair(a, b)
    return Approximator(a.n, [x | y for x in a.terms for y in b.terms])


def or_raw(a: Approximator, b: Approximator) -> Approximator:
    _check_pair(a, b)
    return Approximator(a.n, list(a.terms) + list(b.terms))


def approx_and(a: Approximator, b: Approximator, params: CompressionParams | None = None) -> Approximator:
    """Pairwise unions of terms, absorbed, then compressed (``params=None`` is the identity)."""
    return _compress(and_raw(a, b), params)[1]


def approx_or(a: Approximator, b: Approximator, params: CompressionParams | None = None) -> Approximator:
    return _compress(or_raw(a, b), params)[1]


@dataclass
class GateRecord:
    gate_id: int
    op: str
    left: Approximator | None = None
    right: Approximator | None = None
    raw: Approximator | None = None
    closed: Approximator | None = None
    result: Approximator | None = None
    replacements: list = field(default_factory=list)
    trimmed: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def fam(x):
            return None if x is None else [members(m) for m in x.sorted_terms()]

        return {
            "gate": self.gate_id,
            "op": self.op,
            "raw": fam(self.raw),
            "result": fam(self.result),
            "replacements": [r.to_dict() for r in self.replacements],
            "trimmed": [members(m) for m in self.trimmed],
            "histogram": {str(k): v for k, v in self.result.histogram().items()},
        }


@dataclass
class ApproxTrace:
    n: int
    records: list = field(default_factory=list)

    def gates(self, ops=("AND", "OR")):
        return [r for r in self.records if r.op in ops]

    @property
    def replacement_count(self) -> int:
        return sum(len(r.replacements) for r in self.records)

    def to_json_lines(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.records)


def approximate_circuit(c: MonotoneCircuit, params: CompressionParams | None = None):
    """Gate-by-gate approximation; returns the output approximator and a full trace."""
    pairs = edge_pairs(c.n_vertices)
    vals: list[Approximator] = []
    trace = ApproxTrace(c.n_vertices)
    for i in range(len(c)):
        k = int(c.kinds[i])
        if k == INPUT:
            u, v = pairs[c.a[i]]
            res = Approximator(c.n_vertices, [(1 << int(u)) | (1 << int(v))])
            trace.records.append(GateRecord(i, "INPUT", result=res, raw=res, closed=res))
        elif k == CONST:
            res = Approximator.one(c.n_vertices) if c.a[i] else Approximator.zero(c.n_vertices)
            trace.records.append(GateRecord(i, "CONST", result=res, raw=res, closed=res))
        else:
            left, right = vals[c.a[i]], vals[c.b[i]]
            raw = and_raw(left, right) if k == AND else or_raw(left, right)
            closed, res, log, trimmed = _compress(raw, params)
            trace.records.append(
                GateRecord(i, "AND" if k == AND else "OR", left, right, raw, closed, res, log, trimmed)
            )
        vals.append(res)
    return vals[c.output], trace


# ------------------------------------------------------------ error accounting

def _slot_positions(approxs):
    slots: set[int] = set()
    for a in approxs:
        slots |= a.slots()
    slots = sorted(slots)
    return slots, {s: i for i, s in enumerate(slots)}


def _gate_truth(rec: GateRecord, x, pos):
    l = rec.left.evaluate_columns(x, pos)
    r = rec.right.evaluate_columns(x, pos)
    return l & r if rec.op == "AND" else l | r


@dataclass
class StepError:
    gate_id: int
    op: str
    zeta_plus: Estimate
    zeta_minus: Estimate

    def to_dict(self):
        def v(e):
            return str(e.value) if isinstance(e.value, Fraction) else float(e.value)

        return {"gate": self.gate_id, "op": self.op, "zeta_plus": v(self.zeta_plus),
                "zeta_minus": v(self.zeta_minus), "exact": self.zeta_plus.exact}


def estimate_step_errors(trace: ApproxTrace, c: MonotoneCircuit | None, dists, trials: int = 10_000,
                         seed=None, mode: str = "mc") -> list[StepError]:
    """Per-gate one-step errors.

    ``zeta_plus`` is Pr_pos[left op right = 1 and compressed = 0];
    ``zeta_minus`` is Pr_neg[left op right = 0 and compressed = 1].
    ``dists`` is ``(negative, positive)``.
    """
    neg, pos = dists
    if c is not None and c.n_vertices != trace.n:
        raise ParameterError("trace and circuit disagree on n")
    recs = trace.gates()
    out = []
    if mode == "exact":
        for rec in recs:
            slots, spos = _slot_positions([rec.left, rec.right, rec.result])

            def plus(x, rec=rec, spos=spos):
                return _gate_truth(rec, x, spos) & ~rec.result.evaluate_columns(x, spos)

            def minus(x, rec=rec, spos=spos):
                return ~_gate_truth(rec, x, spos) & rec.result.evaluate_columns(x, spos)

            zp = exact_probability(pos, slots, plus)
            zm = exact_probability(neg, slots, minus)
            out.append(StepError(rec.gate_id, rec.op, Estimate(zp), Estimate(zm)))
        return out
    if mode != "mc":
        raise ParameterError(f"unknown mode {mode!r}")
    seed = as_seed(seed)
    xp = sample_batch(pos, seed.substream(2 * seed.stream_id + 1), 0, trials)
    xn = sample_batch(neg, seed.substream(2 * seed.stream_id), 0, trials)
    ident = _identity_pos(trace.n)
    for rec in recs:
        plus = _gate_truth(rec, xp, ident) & ~rec.result.evaluate_columns(xp, ident)
        minus = ~_gate_truth(rec, xn, ident) & rec.result.evaluate_columns(xn, ident)
        out.append(StepError(rec.gate_id, rec.op, bernoulli_estimate(int(plus.sum()), trials),
                             bernoulli_estimate(int(minus.sum()), trials)))
    return out


def replacement_negative_error(before: Approximator, after: Approximator, p):
    """Exact Pr_{G(n,p)}[before(G) = 0 and after(G) = 1]."""
    slots, spos = _slot_positions([before, after])
    dist = NegDistParams(before.n, p=p)
    return exact_probability(
        dist, slots, lambda x: ~before.evaluate_columns(x, spos) & after.evaluate_columns(x, spos)
    )


def closure_steps(a: Approximator, log) -> list[tuple[Approximator, Approximator]]:
    """Replay a closure log as consecutive (before, after) approximators."""
    steps = []
    cur = a
    for rep in log:
        nxt = Approximator(a.n, list(cur.terms) + [rep.core])
        steps.append((cur, nxt))
        cur = nxt
    return steps


@dataclass
class AuditReport:
    histogram: dict
    bound: Fraction
    acceptance: object
    constant_one: bool

    @property
    def ok(self) -> bool:
        return self.constant_one or self.acceptance <= self.bound

    def to_dict(self):
        return {"histogram": {str(k): v for k, v in self.histogram.items()}, "bound": str(self.bound),
                "acceptance": str(self.acceptance), "constant_one": self.constant_one, "ok": self.ok}


def audit_simple_approximator(a: Approximator, beta: int, n: int | None = None) -> AuditReport:
    """Compare exact planted-clique acceptance with the union bound sum_l (beta/n)^l M_l."""
    n = a.n if n is None else n
    if n != a.n:
        raise ParameterError("n does not match the approximator")
    hist = a.histogram()
    if a.is_one:
        return AuditReport(hist, Fraction(1), Fraction(1), True)
    bound = sum((Fraction(beta, n) ** size * count for size, count in hist.items()), Fraction(0))
    slots, spos = _slot_positions([a])
    acc = exact_probability(PosDistParams(n, beta), slots, lambda x: a.evaluate_columns(x, spos))
    return AuditReport(hist, bound, acc, False)
