"""Sunflowers, robust sunflowers and robust clique sunflowers.

Sets are subsets of ``[n]`` held as integer bitmasks internally. Coverage
probabilities are computed exactly by enumerating the relevant universe
(points outside the core, or edges outside the core clique) or estimated by
Monte Carlo. Exact results are ``Fraction`` whenever ``p`` is rational
(ints and Fractions; floats are treated as the exact binary rational they
denote).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial

import numpy as np

from .errors import CapacityError, FormatError, InconclusiveError, ParameterError
from .graphs import mask_of, members
from .seeding import SeedSpec, as_seed
from .stats import Estimate, Z99, bernoulli_estimate

EXACT_CAP = 24
MAX_SEARCH_SETS = 512


class SetFamily:
    """Family of distinct subsets of ``[n]``, optionally ``uniformity``-uniform."""

    __slots__ = ("n", "masks", "uniformity")

    def __init__(self, n: int, sets=(), uniformity: int | None = None):
        self.n = int(n)
        masks = []
        seen = set()
        for s in sets:
            m = s if isinstance(s, int) else mask_of(s)
            if m >> self.n:
                raise ParameterError(f"set {members(m)} not inside [{n}]")
            if m in seen:
                raise ParameterError(f"duplicate set {members(m)}")
            if uniformity is not None and m.bit_count() != uniformity:
                raise ParameterError(f"set {members(m)} does not have size {uniformity}")
            seen.add(m)
            masks.append(m)
        self.masks = tuple(masks)
        self.uniformity = uniformity

    @property
    def sets(self) -> list[frozenset]:
        return [frozenset(members(m)) for m in self.masks]

    def __len__(self):
        return len(self.masks)

    def __iter__(self):
        return iter(self.sets)

    def __eq__(self, other):
        if not isinstance(other, SetFamily):
            return NotImplemented
        return self.n == other.n and self.masks == other.masks

    def __repr__(self):
        body = ", ".join("{" + ",".join(map(str, members(m))) + "}" for m in self.masks)
        return f"SetFamily(n={self.n}, [{body}])"

    def core_mask(self) -> int:
        if not self.masks:
            return 0
        out = self.masks[0]
        for m in self.masks[1:]:
            out &= m
        return out

    def core(self) -> frozenset:
        return frozenset(members(self.core_mask()))

    def union_mask(self) -> int:
        out = 0
        for m in self.masks:
            out |= m
        return out

    def subfamily(self, indices) -> "SetFamily":
        return SetFamily(self.n, [self.masks[i] for i in indices], self.uniformity)

    def with_set(self, s) -> "SetFamily":
        return SetFamily(self.n, list(self.masks) + [s if isinstance(s, int) else mask_of(s)])

    def to_text(self) -> str:
        lines = [f"FAMILY n={self.n}"]
        for m in self.masks:
            lines.append("S: " + " ".join(str(v + 1) for v in members(m)))
        return "\n".join(lines) + "\n"


def parse_family(text: str) -> SetFamily:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("FAMILY n="):
        raise FormatError("expected header 'FAMILY n=<n>'", 1)
    try:
        n = int(lines[0][len("FAMILY n="):].strip())
    except ValueError:
        raise FormatError("bad universe size", 1) from None
    masks = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            break
        if not line.startswith("S:"):
            raise FormatError("expected 'S: v1 v2 ...'", lineno)
        try:
            vs = [int(t) - 1 for t in line[2:].split()]
        except ValueError:
            raise FormatError("non-integer element", lineno) from None
        if vs != sorted(set(vs)):
            raise FormatError("elements must be strictly ascending", lineno)
        if any(not 0 <= v < n for v in vs):
            raise FormatError("element out of range", lineno)
        m = mask_of(vs)
        if m in masks:
            raise FormatError("duplicate set", lineno)
        masks.append(m)
    return SetFamily(n, masks)


# ----------------------------------------------------------- k-sunflowers

@dataclass(frozen=True)
class SunflowerWitness:
    petal_indices: tuple
    core: frozenset


def _disjoint_pack(residues: list[int], k: int) -> list[int] | None:
    """Indices of ``k`` pairwise-disjoint residues, or None."""
    order = sorted(range(len(residues)), key=lambda i: residues[i].bit_count())

    def rec(cands, used, need, chosen):
        if need == 0:
            return chosen
        if len(cands) < need:
            return None
        for pos, i in enumerate(cands):
            if len(cands) - pos < need:
                break
            rest = [j for j in cands[pos + 1:] if not residues[j] & (used | residues[i])]
            got = rec(rest, used | residues[i], need - 1, chosen + [i])
            if got is not None:
                return got
        return None

    return rec(order, 0, k, [])


def find_k_sunflower(f: SetFamily, k: int, max_sets: int = MAX_SEARCH_SETS) -> SunflowerWitness | None:
    """Any ``k`` members whose pairwise intersections all equal one core."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if len(f) > max_sets:
        raise CapacityError(f"family of {len(f)} sets exceeds exact search cap {max_sets}")
    masks = f.masks
    if len(masks) < k:
        return None
    if k == 1:
        return SunflowerWitness((0,), frozenset(members(masks[0])))
    cores = sorted({a & b for a, b in combinations(masks, 2)}, key=lambda c: (c.bit_count(), c))
    for core in cores:
        idx = [i for i, m in enumerate(masks) if m & core == core]
        if len(idx) < k:
            continue
        got = _disjoint_pack([masks[i] & ~core for i in idx], k)
        if got is not None:
            return SunflowerWitness(tuple(sorted(idx[j] for j in got)), frozenset(members(core)))
    return None


def is_sunflower(f: SetFamily, indices, core) -> bool:
    core = core if isinstance(core, int) else mask_of(core)
    return all(f.masks[i] & f.masks[j] == core for i, j in combinations(indices, 2))


def erdos_rado_bound(ell: int, k: int) -> int:
    """Family size forcing a k-sunflower in any ell-uniform family."""
    return factorial(ell) * (k - 1) ** ell


def random_uniform_family(n: int, ell: int, size: int, rng: np.random.Generator) -> SetFamily:
    if size > comb(n, ell):
        raise ParameterError("not enough ell-subsets of [n]")
    picked: set[int] = set()
    while len(picked) < size:
        picked.add(mask_of(rng.choice(n, ell, replace=False).tolist()))
    return SetFamily(n, sorted(picked), uniformity=ell)


@dataclass
class ErdosRadoReport:
    ell: int
    k: int
    bound: int
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_erdos_rado(ell: int, k: int, families) -> ErdosRadoReport:
    """Check that every supplied ell-uniform family of the bound's size has a k-sunflower."""
    rep = ErdosRadoReport(ell, k, erdos_rado_bound(ell, k))
    for fam in families:
        if len(fam) < rep.bound or any(m.bit_count() != ell for m in fam.masks):
            raise ParameterError("families must be ell-uniform and of at least the bound's size")
        rep.checked += 1
        if find_k_sunflower(fam, k) is None:
            rep.failures.append(fam)
    return rep


def search_sunflower_free(n: int, ell: int, k: int, size: int) -> SetFamily | None:
    """Exhaustive search for an ell-uniform family of ``size`` sets on ``[n]`` with no k-sunflower.

    Sunflower-freeness is hereditary, so partial families are pruned as soon
    as they contain a k-sunflower. Returns None when the search is exhausted.
    """
    universe = [mask_of(c) for c in combinations(range(n), ell)]

    def has_new_sunflower(chosen, new):
        # only sunflowers through the newest set need checking
        fam = SetFamily(n, chosen + [new])
        last = len(chosen)
        for core in {new & m for m in chosen}:
            idx = [i for i in range(last) if fam.masks[i] & core == core]
            residues = [fam.masks[i] & ~core for i in idx]
            others = [r for r in residues if not r & (new & ~core)]
            if _disjoint_pack(others, k - 1) is not None:
                return True
        return False

    def rec(start, chosen):
        if len(chosen) == size:
            return chosen
        for i in range(start, len(universe) - (size - len(chosen)) + 1):
            if k >= 2 and chosen and has_new_sunflower(chosen, universe[i]):
                continue
            got = rec(i + 1, chosen + [universe[i]])
            if got is not None:
                return got
        return None

    if k == 1:
        return None
    got = rec(0, [])
    return None if got is None else SetFamily(n, got, uniformity=ell)


# ----------------------------------------------------------- coverage

def _exactify(p):
    if isinstance(p, (int, Fraction)):
        return Fraction(p)
    if isinstance(p, float):
        # decimal reading: 0.3 means 3/10, not the nearest double
        return Fraction(repr(p))
    return p


def _compact(targets: list[int]) -> tuple[list[int], int]:
    universe = 0
    for t in targets:
        universe |= t
    bits = members(universe)
    pos = {b: i for i, b in enumerate(bits)}
    return [sum(1 << pos[b] for b in members(t)) for t in targets], len(bits)


def _covered(x: np.ndarray, targets: list[int]) -> np.ndarray:
    ok = np.zeros(len(x), dtype=bool)
    for t in targets:
        ok |= (x & t) == t
    return ok


def coverage_exact(targets: list[int], p, cap: int = EXACT_CAP):
    """Exact Pr[some target ⊆ W] for W a p-random subset of the targets' union."""
    targets, r = _compact(targets)
    if not targets:
        return Fraction(0)
    if r > cap:
        raise CapacityError(f"{r} relevant elements exceed the exact cap of {cap}")
    p = _exactify(p)
    if any(t == 0 for t in targets):
        return Fraction(1) if isinstance(p, Fraction) else 1.0
    # drop targets that contain another target
    targets = sorted(set(targets), key=int.bit_count)
    kept: list[int] = []
    for t in targets:
        if not any(s & t == s for s in kept):
            kept.append(t)
    counts = np.zeros(r + 1, dtype=np.int64)
    total = 1 << r
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        x = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        ok = _covered(x, kept)
        pc = np.bitwise_count(x).astype(np.int64)
        counts += np.bincount(pc[ok], minlength=r + 1)
    return sum(int(c) * p**k * (1 - p) ** (r - k) for k, c in enumerate(counts) if c)


def coverage_mc(targets: list[int], p, trials: int, seed=None) -> Estimate:
    targets, r = _compact(targets)
    if not targets:
        return Estimate(0.0, 0.0, trials)
    rng = as_seed(seed).rng(0)
    hits = 0
    weights = (1 << np.arange(r, dtype=np.int64)) if r else np.zeros(0, dtype=np.int64)
    for lo in range(0, trials, 1 << 16):
        cnt = min(1 << 16, trials - lo)
        w = (rng.random((cnt, r)) < float(p)) @ weights if r else np.zeros(cnt, dtype=np.int64)
        hits += int(_covered(np.asarray(w, dtype=np.int64), targets).sum())
    return bernoulli_estimate(hits, trials)


def _core_mask(f: SetFamily, core) -> int:
    if core is None:
        return f.core_mask()
    return core if isinstance(core, int) else mask_of(core)


def clique_edge_mask(vertex_mask: int, n: int) -> int:
    """Bitmask over edge slots (lexicographic order) of the clique on ``vertex_mask``."""
    from .graphs import edge_index

    vs = members(vertex_mask)
    out = 0
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            out |= 1 << edge_index(u, v, n)
    return out


def set_targets(f: SetFamily, core=None) -> list[int]:
    c = _core_mask(f, core)
    return [m & ~c for m in f.masks]


def clique_targets(f: SetFamily, core=None) -> list[int]:
    c = clique_edge_mask(_core_mask(f, core), f.n)
    return [clique_edge_mask(m, f.n) & ~c for m in f.masks]


def _coverage(targets, p, mode, trials, seed):
    if mode == "exact":
        v = coverage_exact(targets, p)
        return Estimate(v, 0.0, None)
    if mode == "mc":
        return coverage_mc(targets, p, trials, seed)
    raise ParameterError(f"unknown mode {mode!r}")


def coverage_prob_set(f: SetFamily, core=None, p=0.5, mode: str = "exact", trials: int = 10_000, seed=None) -> Estimate:
    """Pr_W(some S in f has S ⊆ W ∪ core), W a p-random subset of [n]."""
    return _coverage(set_targets(f, core), p, mode, trials, seed)


def coverage_prob_clique(f: SetFamily, core=None, p=0.5, mode: str = "exact", trials: int = 10_000, seed=None) -> Estimate:
    """Pr_G(some S in f has K_S ⊆ G ∪ K_core), G ~ G(n, p)."""
    return _coverage(clique_targets(f, core), p, mode, trials, seed)


def relevant_size(f: SetFamily, core=None, kind: str = "clique") -> int:
    targets = clique_targets(f, core) if kind == "clique" else set_targets(f, core)
    u = 0
    for t in targets:
        u |= t
    return u.bit_count()


@dataclass(frozen=True)
class RobustnessVerdict:
    kind: str  # "set" or "clique"
    mode: str  # "exact" or "mc"
    probability: Estimate
    threshold: object
    verdict: str  # "pass" | "fail" | "inconclusive"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _decide(prob: Estimate, threshold) -> str:
    if prob.exact:
        return "pass" if prob.value >= threshold else "fail"
    lo, hi = prob.wilson(Z99)
    if lo >= threshold:
        return "pass"
    if hi < threshold:
        return "fail"
    return "inconclusive"


def check_robust(f: SetFamily, core=None, p=0.5, eps=0.1, kind: str = "clique", mode: str = "exact",
                 trials: int = 10_000, seed=None) -> RobustnessVerdict:
    """Compare a coverage probability against ``1 - eps``; Monte-Carlo verdicts use a 99% Wilson interval."""
    if kind == "clique":
        prob = coverage_prob_clique(f, core, p, mode, trials, seed)
    elif kind == "set":
        prob = coverage_prob_set(f, core, p, mode, trials, seed)
    else:
        raise ParameterError(f"unknown kind {kind!r}")
    threshold = 1 - (_exactify(eps) if mode == "exact" else eps)
    return RobustnessVerdict(kind, mode, prob, threshold, _decide(prob, threshold))


# ----------------------------------------------------- robust sunflower search

def intersection_closure(masks) -> list[int]:
    """All intersections of two or more members, smallest first."""
    cur = {a & b for a, b in combinations(masks, 2)}
    frontier = set(cur)
    while frontier:
        new = {a & b for a in frontier for b in cur} - cur
        cur |= new
        frontier = new
    return sorted(cur, key=lambda c: (c.bit_count(), c))


@dataclass(frozen=True)
class RobustFind:
    core: int
    members: tuple  # masks of the subfamily
    coverage: Estimate


def find_robust_clique_sunflower(f: SetFamily, p, eps, mc_trials: int = 20_000, seed=None,
                                 exact_cap: int = EXACT_CAP, skip=()) -> RobustFind | None:
    """First robust clique sunflower, scanning candidate cores by increasing size.

    For a core C that is the intersection of some subfamily, the family of
    all members containing C has intersection exactly C and dominates every
    other subfamily with that core, so it is the only one tested. Cores in
    ``skip`` are ignored. Monte-Carlo checks (used above ``exact_cap``
    relevant edges) raise ``InconclusiveError`` rather than guess.
    """
    for core in intersection_closure(f.masks):
        if core in skip:
            continue
        fam = [m for m in f.masks if m & core == core]
        if len(fam) < 2:
            continue
        sub = SetFamily(f.n, fam)
        if relevant_size(sub, core) <= exact_cap:
            v = check_robust(sub, core, p, eps, mode="exact")
        else:
            v = check_robust(sub, core, p, eps, mode="mc", trials=mc_trials, seed=seed)
            if v.verdict == "inconclusive":
                raise InconclusiveError(
                    f"robustness of core {members(core)} is inconclusive "
                    f"(estimate {float(v.probability.value):.4f} vs threshold {float(v.threshold):.4f})"
                )
        if v.passed:
            return RobustFind(core, tuple(fam), v.probability)
    return None


def minimize_robust(f_masks, core: int, n: int, p, eps) -> tuple:
    """Greedily drop members while the rest stays a robust clique sunflower with the same core."""
    fam = list(f_masks)
    i = 0
    while i < len(fam) and len(fam) > 2:
        trial = fam[:i] + fam[i + 1:]
        sub = SetFamily(n, trial)
        if sub.core_mask() == core and check_robust(sub, core, p, eps, mode="exact").passed:
            fam = trial
        else:
            i += 1
    return tuple(fam)


# ----------------------------------------------------- lemma-level checks

def canonical_sunflower(ell: int, k: int, c: int) -> SetFamily:
    """k petals of size ell sharing the core {0..c-1} and otherwise disjoint."""
    if not 0 <= c <= ell or k < 1:
        raise ParameterError("need 0 <= c <= ell and k >= 1")
    if c == ell and k > 1:
        raise ParameterError("distinct petals need c < ell")
    n = c + k * (ell - c)
    core = list(range(c))
    sets = [core + list(range(c + i * (ell - c), c + (i + 1) * (ell - c))) for i in range(k)]
    return SetFamily(n, sets, uniformity=ell)


@dataclass
class SunflowerRCSReport:
    ell: int
    k: int
    c: int
    p: object
    failure: object
    closed_form: object
    bound: float

    @property
    def ok(self) -> bool:
        return self.failure <= self.bound and self.failure == self.closed_form


def verify_sunflower_is_rcs(ell: int, k: int, c: int, p) -> SunflowerRCSReport:
    """Exact clique-coverage failure of a canonical k-sunflower against exp(-k p^C(ell,2))."""
    fam = canonical_sunflower(ell, k, c)
    p = _exactify(p)
    # the designated core; it equals the intersection whenever k >= 2
    failure = 1 - coverage_exact(clique_targets(fam, (1 << c) - 1), p)
    closed = (1 - p ** (comb(ell, 2) - comb(c, 2))) ** k
    bound = math.exp(-k * float(p) ** comb(ell, 2))
    return SunflowerRCSReport(ell, k, c, p, failure, closed, bound)


@dataclass
class RSImpliesRCSReport:
    n: int
    ell: int
    p: object
    eps: object
    premise_count: int = 0
    attempts: int = 0
    skipped: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def random_planted_family(n: int, ell: int, rng: np.random.Generator, max_sets: int | None = None) -> SetFamily:
    """ell-uniform family around a random planted core (the actual core may be larger)."""
    c = int(rng.integers(0, ell))
    core = rng.choice(n, c, replace=False).tolist()
    rest = [v for v in range(n) if v not in core]
    avail = comb(len(rest), ell - c)
    hi = min(avail, max_sets or avail)
    size = int(rng.integers(1, hi + 1))
    picked: set[int] = set()
    while len(picked) < size:
        picked.add(mask_of(core + rng.choice(rest, ell - c, replace=False).tolist()))
    return SetFamily(n, sorted(picked), uniformity=ell)


def rs_implies_rcs_holds(fam: SetFamily, p, eps) -> tuple[bool, bool]:
    """(premise, conclusion) of: (p^ell, eps/ell^2)-robust sunflower => (p, eps)-robust clique sunflower."""
    ell = fam.uniformity or fam.masks[0].bit_count()
    p, eps = _exactify(p), _exactify(eps)
    premise = coverage_exact(set_targets(fam), p**ell) >= 1 - eps / ell**2
    conclusion = coverage_exact(clique_targets(fam), p) >= 1 - eps
    return premise, conclusion


def verify_rs_implies_rcs(sample_count: int, n: int, ell: int, p, eps, seed=None,
                          max_attempts: int | None = None, max_sets: int | None = 12) -> RSImpliesRCSReport:
    """Random families until ``sample_count`` satisfy the premise; record any failed conclusion."""
    seed = as_seed(seed)
    rep = RSImpliesRCSReport(n, ell, p, eps)
    max_attempts = max_attempts or 200 * sample_count
    while rep.premise_count < sample_count and rep.attempts < max_attempts:
        fam = random_planted_family(n, ell, seed.rng(rep.attempts), max_sets)
        rep.attempts += 1
        if relevant_size(fam, kind="clique") > EXACT_CAP or relevant_size(fam, kind="set") > EXACT_CAP:
            rep.skipped += 1
            continue
        premise, conclusion = rs_implies_rcs_holds(fam, p, eps)
        if premise:
            rep.premise_count += 1
            if not conclusion:
                rep.counterexamples.append(fam)
    return rep
