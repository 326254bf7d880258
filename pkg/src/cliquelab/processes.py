"""Liftings of k-uniform families into the cell grid ``[n] x [n]`` and the
expected suprema of the induced sum processes.

For a lifting ``phi`` and i.i.d. cell variables ``A_ij``, the process is
``Y_S = sum_{(i,j) in phi(S)} A_ij``. The row-aligned lifting
``S -> S x [ell]`` gives the smallest expected supremum among proper
liftings; ``interpolate`` walks from it to any other proper lifting one row
at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm

import numpy as np

from .errors import CapacityError, ParameterError
from .graphs import members
from .seeding import as_seed
from .stats import Estimate, mean_estimate
from .sunflowers import SetFamily, coverage_exact, set_targets

EXACT_CELL_CAP = 22


@dataclass(frozen=True)
class Lifting:
    """``cells[i]`` is the cell set of ``family.masks[i]``."""

    family: SetFamily
    ell: int
    cells: tuple

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def k(self) -> int:
        return self.family.masks[0].bit_count() if len(self.family) else 0

    def image(self, s) -> frozenset:
        from .graphs import mask_of

        m = s if isinstance(s, int) else mask_of(s)
        return self.cells[self.family.masks.index(m)]

    def relevant_cells(self) -> list:
        out: set = set()
        for c in self.cells:
            out |= c
        return sorted(out)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "ell": self.ell,
            "map": [
                {"set": members(m), "cells": sorted([list(c) for c in cells])}
                for m, cells in zip(self.family.masks, self.cells)
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "Lifting":
        obj = json.loads(text)
        fam = SetFamily(obj["n"], [entry["set"] for entry in obj["map"]])
        cells = tuple(frozenset(tuple(c) for c in entry["cells"]) for entry in obj["map"])
        return cls(fam, int(obj["ell"]), cells)


def _uniform_k(f: SetFamily) -> int:
    sizes = {m.bit_count() for m in f.masks}
    if len(sizes) > 1:
        raise ParameterError("family must be uniform")
    return sizes.pop() if sizes else 0


def left_lifting(f: SetFamily, ell: int) -> Lifting:
    """``S -> S x {0..ell-1}``."""
    _uniform_k(f)
    if not 1 <= ell <= f.n:
        raise ParameterError("need 1 <= ell <= n")
    cells = tuple(frozenset((i, j) for i in members(m) for j in range(ell)) for m in f.masks)
    return Lifting(f, ell, cells)


def square_lifting(f: SetFamily, ell: int | None = None) -> Lifting:
    """``S -> S x S``; proper only when ``ell == k``."""
    k = _uniform_k(f)
    if ell is not None and ell != k:
        raise ParameterError(f"square lifting needs ell == k (got ell={ell}, k={k})")
    cells = tuple(frozenset((i, j) for i in members(m) for j in members(m)) for m in f.masks)
    return Lifting(f, k, cells)


def link_lifting(f: SetFamily, core) -> Lifting:
    """``S -> S x (core ∪ S)`` for sets avoiding ``core``; row multiplicity ``|core| + k``."""
    from .graphs import mask_of

    k = _uniform_k(f)
    cm = core if isinstance(core, int) else mask_of(core)
    if any(m & cm for m in f.masks):
        raise ParameterError("link lifting needs every set disjoint from the core")
    cells = tuple(frozenset((i, j) for i in members(m) for j in members(m | cm)) for m in f.masks)
    return Lifting(f, cm.bit_count() + k, cells)


def canonical_liftings(f: SetFamily, ell: int, core=None) -> dict:
    out = {"left": left_lifting(f, ell)}
    k = _uniform_k(f)
    if ell == k:
        out["square"] = square_lifting(f, ell)
    if core is not None:
        out["link"] = link_lifting(f, core)
    return out


def validate_proper(phi: Lifting) -> bool:
    """Every member row of S holds exactly ``ell`` cells and nothing else is hit."""
    n, ell = phi.n, phi.ell
    for m, cells in zip(phi.family.masks, phi.cells):
        rows = members(m)
        if len(cells) != len(rows) * ell:
            return False
        if any(not (0 <= i < n and 0 <= j < n) for i, j in cells):
            return False
        for i in rows:
            if sum(1 for r, _ in cells if r == i) != ell:
                return False
    return True


def interpolate(phi: Lifting, t: int) -> Lifting:
    """Agree with ``phi`` on rows ``< t`` and with ``S x [ell]`` on rows ``>= t``.

    So ``interpolate(phi, 0)`` is the row-aligned lifting and
    ``interpolate(phi, n)`` is ``phi``.
    """
    if not 0 <= t <= phi.n:
        raise ParameterError("need 0 <= t <= n")
    cells = []
    for m, img in zip(phi.family.masks, phi.cells):
        top = {(i, j) for i, j in img if i < t}
        bottom = {(i, j) for i in members(m) if i >= t for j in range(phi.ell)}
        cells.append(frozenset(top | bottom))
    return Lifting(phi.family, phi.ell, tuple(cells))


def random_proper_lifting(f: SetFamily, ell: int, rng: np.random.Generator) -> Lifting:
    _uniform_k(f)
    if not 1 <= ell <= f.n:
        raise ParameterError("need 1 <= ell <= n")
    cells = []
    for m in f.masks:
        cells.append(frozenset((i, int(j)) for i in members(m) for j in rng.choice(f.n, ell, replace=False)))
    return Lifting(f, ell, tuple(cells))


@dataclass(frozen=True)
class CellDistribution:
    """Finite-support distribution of one cell."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ParameterError("values and probs must be non-empty and aligned")
        if any(p < 0 for p in self.probs):
            raise ParameterError("negative probability")
        total = sum(self.probs)
        exact = all(isinstance(p, (int, Fraction)) for p in self.probs)
        if (exact and total != 1) or (not exact and abs(total - 1) > 1e-12):
            raise ParameterError("probabilities must sum to 1")

    @classmethod
    def bernoulli(cls, p) -> "CellDistribution":
        return cls((0, 1), (1 - p, p))

    @property
    def mean(self):
        return sum(v * p for v, p in zip(self.values, self.probs))

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.values + self.probs)


def _membership(phi: Lifting, cells: list) -> np.ndarray:
    pos = {c: i for i, c in enumerate(cells)}
    mat = np.zeros((len(cells), len(phi.cells)), dtype=np.int64)
    for s, img in enumerate(phi.cells):
        for c in img:
            mat[pos[c], s] = 1
    return mat


def expected_sup(phi: Lifting, dist: CellDistribution, mode: str = "exact", trials: int = 20_000,
                 seed=None, extra_cells=()):
    """``E sup_S sum_{phi(S)} A``; exact by enumeration of the relevant cells, or Monte Carlo.

    ``extra_cells`` adds cells outside every image to the enumeration; the
    value must not change.
    """
    if not len(phi.family):
        raise ParameterError("empty family")
    cells = sorted(set(phi.relevant_cells()) | set(extra_cells))
    mat = _membership(phi, cells)
    s, r = len(dist.values), len(cells)
    if mode == "mc":
        rng = as_seed(seed).rng(0)
        vals = np.asarray([float(v) for v in dist.values])
        probs = np.asarray([float(p) for p in dist.probs])
        sups = []
        for lo in range(0, trials, 1 << 14):
            cnt = min(1 << 14, trials - lo)
            draws = vals[rng.choice(s, size=(cnt, r), p=probs)]
            sups.append((draws @ mat).max(axis=1))
        return mean_estimate(np.concatenate(sups))
    if mode != "exact":
        raise ParameterError(f"unknown mode {mode!r}")
    if s**r > 1 << EXACT_CELL_CAP:
        raise CapacityError(f"{s}^{r} cell assignments exceed the exact cap 2^{EXACT_CELL_CAP}")
    values = [Fraction(v) if isinstance(v, (int, Fraction)) else v for v in dist.values]
    if dist.exact:
        scale = lcm(*[v.denominator for v in values])
        ivals = np.array([int(v * scale) for v in values], dtype=np.int64)
    else:
        scale = 1
        ivals = np.array(values, dtype=float)
    total = s**r
    acc: dict = {}
    radix = s ** np.arange(r, dtype=np.int64)
    chunk = 1 << 16
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        digits = (idx[:, None] // radix) % s
        sup = (ivals[digits] @ mat).max(axis=1)
        counts = np.stack([(digits == v).sum(axis=1) for v in range(s)], axis=1)
        keys, mult = np.unique(np.column_stack([sup, counts]), axis=0, return_counts=True)
        for key, c in zip(keys.tolist(), mult.tolist()):
            key = tuple(key)
            acc[key] = acc.get(key, 0) + c
    zero = Fraction(0) if dist.exact else 0.0
    out = zero
    for key, c in acc.items():
        w = c
        for v, cnt in enumerate(key[1:]):
            w = w * dist.probs[v] ** int(cnt)
        out += Fraction(key[0], scale) * w if dist.exact else key[0] * w
    return out


@dataclass
class ChainReport:
    values: list
    lhs: object
    rhs: object

    @property
    def non_decreasing(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    @property
    def comparison_holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def ok(self) -> bool:
        return self.non_decreasing and self.comparison_holds


def verify_comparison_chain(phi: Lifting, dist: CellDistribution) -> ChainReport:
    """Exact E sup along ``interpolate(phi, t)`` for t = 0..n."""
    if not validate_proper(phi):
        raise ParameterError("lifting is not proper")
    vals = [expected_sup(interpolate(phi, t), dist) for t in range(phi.n + 1)]
    lhs = expected_sup(left_lifting(phi.family, phi.ell), dist)
    return ChainReport(vals, lhs, vals[-1])


def claim_sides(pairs, dist: CellDistribution, n: int):
    """Both sides of the single-row exchange inequality, exactly.

    ``pairs`` is a list of ``(S_i, a_i)`` with ``|S_i|`` either 0 or a common
    ``ell``; returns ``(E sup_i (a_i + sum_{S_i} A), E max(b1 + sum_{[ell]} A, b0))``.
    """
    sizes = {len(S) for S, _ in pairs if len(S)}
    if len(sizes) > 1:
        raise ParameterError("non-empty sets must share one size")
    ell = sizes.pop() if sizes else 0
    vals, probs = dist.values, dist.probs
    lhs = Fraction(0) if dist.exact else 0.0
    for assign in product(range(len(vals)), repeat=n):
        w = 1
        for a in assign:
            w = w * probs[a]
        lhs += w * max(a_i + sum(vals[assign[j]] for j in S) for S, a_i in pairs)
    b0 = max((a for S, a in pairs if not S), default=None)
    b1 = max((a for S, a in pairs if S), default=None)
    rhs = Fraction(0) if dist.exact else 0.0
    for assign in product(range(len(vals)), repeat=ell):
        w = 1
        for a in assign:
            w = w * probs[a]
        top = None if b1 is None else b1 + sum(vals[a] for a in assign)
        rhs += w * max(x for x in (top, b0) if x is not None)
    return lhs, rhs


@dataclass
class BridgeReport:
    lhs: object
    rhs: object
    target: object
    p0: object
    eps: object

    @property
    def ok(self) -> bool:
        return self.lhs >= self.target and self.rhs >= self.target and self.p0 <= self.eps


def verify_bridge(f: SetFamily, p, eps) -> BridgeReport:
    """Expected-supremum form of: robust sunflower at (p^ell, eps/ell^2) => robust clique sunflower at (p, eps).

    Works on the petals ``S - core`` with the link lifting
    ``S -> S x (core ∪ S)``; reports both expected suprema, the target
    ``ell*k - eps`` and the all-ones failure probability ``p0``.
    """
    ell = _uniform_k(f)
    core = f.core_mask()
    petals = SetFamily(f.n, [m & ~core for m in f.masks])
    k = ell - core.bit_count()
    if k == 0:
        raise ParameterError("family has a single set; nothing to lift")
    dist = CellDistribution.bernoulli(p)
    left = left_lifting(petals, ell)
    link = link_lifting(petals, core)
    lhs = expected_sup(left, dist)
    rhs = expected_sup(link, dist)
    full = ell * k
    ones = coverage_exact([_cells_mask(c, link) for c in link.cells], p)
    return BridgeReport(lhs, rhs, full - eps, 1 - ones, eps)


def _cells_mask(cells, phi: Lifting) -> int:
    pos = {c: i for i, c in enumerate(phi.relevant_cells())}
    m = 0
    for c in cells:
        m |= 1 << pos[c]
    return m


def premise_holds(f: SetFamily, p, eps) -> bool:
    ell = _uniform_k(f)
    return coverage_exact(set_targets(f), p**ell) >= 1 - eps / ell**2
