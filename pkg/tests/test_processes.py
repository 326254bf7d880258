from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliquelab.errors import CapacityError, ParameterError
from cliquelab.processes import (
    CellDistribution,
    Lifting,
    canonical_liftings,
    claim_sides,
    expected_sup,
    interpolate,
    left_lifting,
    link_lifting,
    random_proper_lifting,
    square_lifting,
    validate_proper,
    verify_bridge,
    verify_comparison_chain,
)
from cliquelab.sunflowers import SetFamily, rs_implies_rcs_holds

from .oracles import brute_expected_sup

HALF = CellDistribution.bernoulli(Fraction(1, 2))


@st.composite
def small_liftings(draw, max_cells=12):
    n = draw(st.integers(2, 5))
    k = draw(st.integers(1, min(2, n)))
    sets = draw(st.lists(st.frozensets(st.integers(0, n - 1), min_size=k, max_size=k), min_size=1, max_size=3, unique=True))
    f = SetFamily(n, [sorted(s) for s in sets])
    ell = draw(st.integers(1, min(2, n)))
    phi = random_proper_lifting(f, ell, np.random.default_rng(draw(st.integers(0, 2**32 - 1))))
    if len(phi.relevant_cells()) > max_cells or len(left_lifting(f, ell).relevant_cells()) > max_cells:
        phi = left_lifting(f, ell)
    return phi


class TestLiftings:
    def test_left(self):
        f = SetFamily(4, [[0, 2], [1, 3]])
        phi = left_lifting(f, 3)
        assert validate_proper(phi)
        for m, cells in zip(f.masks, phi.cells):
            assert len(cells) == 6

    def test_square(self):
        phi = square_lifting(SetFamily(4, [[0, 2]]), 2)
        assert phi.cells[0] == frozenset({(0, 0), (0, 2), (2, 0), (2, 2)})
        assert validate_proper(phi)
        with pytest.raises(ParameterError):
            square_lifting(SetFamily(4, [[0, 2]]), 3)

    def test_link(self):
        phi = link_lifting(SetFamily(4, [[1, 2]]), [0])
        assert phi.ell == 3 and validate_proper(phi)
        assert phi.cells[0] == frozenset((i, j) for i in (1, 2) for j in (0, 1, 2))
        with pytest.raises(ParameterError):
            link_lifting(SetFamily(4, [[0, 2]]), [0])

    def test_canonical_dict(self):
        out = canonical_liftings(SetFamily(5, [[1, 2], [3, 4]]), 2, core=[0])
        assert set(out) == {"left", "square", "link"}
        assert all(validate_proper(v) for v in out.values())

    def test_improper(self):
        phi = left_lifting(SetFamily(4, [[0, 1]]), 2)
        cells = set(phi.cells[0])
        cells.discard((0, 0))
        assert not validate_proper(Lifting(phi.family, 2, (frozenset(cells),)))

    def test_json_roundtrip(self):
        phi = random_proper_lifting(SetFamily(5, [[0, 1], [2, 4]]), 3, np.random.default_rng(1))
        assert Lifting.from_json(phi.to_json()) == phi


class TestInterpolation:
    @given(small_liftings())
    def test_endpoints_and_properness(self, phi):
        assert interpolate(phi, 0) == left_lifting(phi.family, phi.ell)
        assert interpolate(phi, phi.n) == phi
        assert all(validate_proper(interpolate(phi, t)) for t in range(phi.n + 1))

    def test_range(self):
        with pytest.raises(ParameterError):
            interpolate(left_lifting(SetFamily(3, [[0]]), 1), 4)


class TestExpectedSup:
    def test_single_set_linearity(self):
        f = SetFamily(5, [[0, 3]])
        d = CellDistribution((0, 1, 3), (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)))
        phi = random_proper_lifting(f, 3, np.random.default_rng(2))
        assert expected_sup(phi, d) == 2 * 3 * d.mean == expected_sup(left_lifting(f, 3), d)

    def test_disjoint_pairs(self):
        f = SetFamily(4, [[0, 1], [2, 3]])
        left = expected_sup(left_lifting(f, 2), HALF)
        square = expected_sup(square_lifting(f, 2), HALF)
        assert left == square == Fraction(163, 64)

    def test_overlapping_pair(self):
        f = SetFamily(4, [[0, 1], [0, 2]])
        assert len(left_lifting(f, 2).relevant_cells()) == 6
        assert len(square_lifting(f, 2).relevant_cells()) == 7
        assert expected_sup(left_lifting(f, 2), HALF) == Fraction(19, 8)
        assert expected_sup(square_lifting(f, 2), HALF) == Fraction(79, 32)

    @given(small_liftings(max_cells=10), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))
    def test_matches_brute_force(self, phi, p):
        d = CellDistribution.bernoulli(p)
        assert expected_sup(phi, d) == brute_expected_sup(list(phi.cells), d.values, d.probs)

    def test_general_support_matches_brute_force(self):
        d = CellDistribution((-1, 0, 2), (Fraction(1, 5), Fraction(1, 2), Fraction(3, 10)))
        phi = random_proper_lifting(SetFamily(4, [[0, 1], [1, 2], [0, 3]]), 1, np.random.default_rng(4))
        assert expected_sup(phi, d) == brute_expected_sup(list(phi.cells), d.values, d.probs)

    @given(small_liftings(max_cells=10))
    def test_irrelevant_cells_do_not_matter(self, phi):
        extra = [(i, j) for i in range(phi.n) for j in range(phi.n) if (i, j) not in set(phi.relevant_cells())][:3]
        assert expected_sup(phi, HALF, extra_cells=extra) == expected_sup(phi, HALF)

    @given(small_liftings())
    def test_sandwich_and_monotone_in_p(self, phi):
        kl = phi.k * phi.ell
        vals = [expected_sup(phi, CellDistribution.bernoulli(Fraction(i, 8))) for i in range(9)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        for i, v in enumerate(vals):
            assert kl * Fraction(i, 8) <= v <= kl

    def test_mc_agrees(self):
        phi = square_lifting(SetFamily(4, [[0, 1], [0, 2], [1, 3]]), 2)
        ex = expected_sup(phi, HALF)
        mc = expected_sup(phi, HALF, mode="mc", trials=40_000, seed=5)
        assert abs(mc.value - float(ex)) <= mc.half_width * 3 / 2.576 + 1e-9

    def test_capacity(self):
        f = SetFamily(6, [[0, 1, 2], [3, 4, 5]])
        with pytest.raises(CapacityError):
            expected_sup(left_lifting(f, 4), HALF)


class TestComparisonChain:
    def test_square_example(self):
        rep = verify_comparison_chain(square_lifting(SetFamily(4, [[0, 1], [0, 2]]), 2), HALF)
        assert len(rep.values) == 5 and rep.ok
        assert rep.values[0] == Fraction(19, 8) and rep.values[-1] == Fraction(79, 32)

    def test_left_chain_constant(self):
        rep = verify_comparison_chain(left_lifting(SetFamily(4, [[0, 1], [2, 3], [1, 2]]), 2), HALF)
        assert len(set(rep.values)) == 1

    def test_random_n4(self):
        rng = np.random.default_rng(200)
        f = SetFamily(4, [[0, 1], [0, 2], [1, 3]])
        for i in range(200):
            p = Fraction(int(rng.integers(1, 10)), 10)
            phi = random_proper_lifting(f, 2, rng)
            assert verify_comparison_chain(phi, CellDistribution.bernoulli(p)).ok

    @given(small_liftings(max_cells=10), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))
    def test_chain_property(self, phi, p):
        assert verify_comparison_chain(phi, CellDistribution.bernoulli(p)).ok

    def test_rejects_improper(self):
        phi = left_lifting(SetFamily(4, [[0, 1]]), 2)
        bad = Lifting(phi.family, 3, phi.cells)
        with pytest.raises(ParameterError):
            verify_comparison_chain(bad, HALF)


class TestClaimAndBridge:
    @given(st.lists(st.tuples(st.booleans(), st.integers(0, 4)), min_size=1, max_size=4), st.integers(1, 3),
           st.sampled_from([Fraction(1, 3), Fraction(1, 2)]), st.integers(0, 2**32 - 1))
    def test_claim_inequality(self, layout, ell, p, seed):
        rng = np.random.default_rng(seed)
        n = 4
        pairs = [(sorted(rng.choice(n, ell, replace=False).tolist()) if has else [], a) for has, a in layout]
        lhs, rhs = claim_sides(pairs, CellDistribution.bernoulli(p), n)
        assert lhs >= rhs

    def test_bridge_star(self):
        f = SetFamily(6, [[0, 1], [0, 2], [0, 3], [0, 4]], uniformity=2)
        rep = verify_bridge(f, Fraction(7, 10), Fraction(3, 10))
        assert rep.lhs <= rep.rhs
        assert rep.ok

    def test_bridge_on_premise_families(self):
        rng = np.random.default_rng(9)
        seen = 0
        for _ in range(300):
            core = [0]
            petals = rng.choice(np.arange(1, 7), size=int(rng.integers(2, 6)), replace=False)
            f = SetFamily(7, [core + [int(v)] for v in petals], uniformity=2)
            premise, conclusion = rs_implies_rcs_holds(f, Fraction(7, 10), Fraction(3, 10))
            if premise:
                seen += 1
                assert conclusion and verify_bridge(f, Fraction(7, 10), Fraction(3, 10)).ok
        assert seen > 0
