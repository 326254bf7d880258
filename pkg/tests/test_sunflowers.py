from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliquelab.errors import CapacityError, FormatError, ParameterError
from cliquelab.graphs import mask_of
from cliquelab.sunflowers import (
    SetFamily,
    canonical_sunflower,
    check_robust,
    coverage_prob_clique,
    coverage_prob_set,
    erdos_rado_bound,
    find_k_sunflower,
    find_robust_clique_sunflower,
    intersection_closure,
    is_sunflower,
    parse_family,
    random_uniform_family,
    rs_implies_rcs_holds,
    search_sunflower_free,
    verify_erdos_rado,
    verify_rs_implies_rcs,
    verify_sunflower_is_rcs,
)

from .oracles import brute_sunflower, clique_coverage, set_coverage

P_VALUES = [Fraction(1, 4), Fraction(1, 2), Fraction(7, 10)]


@st.composite
def families(draw, n_range=(2, 7), max_sets=6, uniform=None):
    n = draw(st.integers(*n_range))
    size = uniform if uniform is not None else None
    sets = draw(
        st.lists(
            st.frozensets(st.integers(0, n - 1), min_size=size or 1, max_size=size or n),
            min_size=1, max_size=max_sets, unique=True,
        )
    )
    return SetFamily(n, [sorted(s) for s in sets])


class TestSetFamily:
    def test_text_roundtrip(self):
        f = SetFamily(5, [[0, 1], [3, 1]])
        assert f.to_text() == "FAMILY n=5\nS: 1 2\nS: 2 4\n"
        assert parse_family(f.to_text()) == f

    @given(families())
    def test_roundtrip_property(self, f):
        assert parse_family(f.to_text()) == f

    def test_rejects(self):
        with pytest.raises(ParameterError):
            SetFamily(4, [[0, 1], [1, 0]])
        with pytest.raises(ParameterError):
            SetFamily(4, [[0, 1], [1, 2, 3]], uniformity=2)
        with pytest.raises(ParameterError):
            SetFamily(3, [[0, 3]])
        with pytest.raises(FormatError) as exc:
            parse_family("FAMILY n=3\nS: 1 2\nS: 1 9\n")
        assert exc.value.line == 3


class TestKSunflower:
    def test_examples(self):
        w = find_k_sunflower(SetFamily(5, [[0, 1], [0, 2], [0, 3]]), 3)
        assert w.core == frozenset({0})
        w = find_k_sunflower(SetFamily(6, [[0, 1], [2, 3], [4, 5]]), 3)
        assert w.core == frozenset()
        assert find_k_sunflower(SetFamily(3, [[0, 1], [1, 2], [0, 2]]), 3) is None

    @given(families(n_range=(3, 8), max_sets=9), st.integers(2, 4))
    def test_matches_brute_force(self, f, k):
        w = find_k_sunflower(f, k) if len(f) >= k else None
        want = brute_sunflower(f.sets, k) if len(f) >= k else None
        assert (w is None) == (want is None)
        if w is not None:
            assert len(w.petal_indices) == k
            assert is_sunflower(f, w.petal_indices, w.core)
            for i, j in combinations(w.petal_indices, 2):
                assert f.sets[i] & f.sets[j] == w.core

    def test_capacity(self):
        f = random_uniform_family(30, 3, 600, np.random.default_rng(0))
        with pytest.raises(CapacityError):
            find_k_sunflower(f, 3)


class TestErdosRado:
    def test_bound(self):
        assert erdos_rado_bound(2, 3) == 8
        assert erdos_rado_bound(3, 4) == 162

    def test_random_families(self):
        rng = np.random.default_rng(3)
        fams = (random_uniform_family(int(rng.integers(6, 11)), 2, 8, rng) for _ in range(10_000))
        rep = verify_erdos_rado(2, 3, fams)
        assert rep.ok and rep.checked == 10_000

    def test_singletons(self):
        f = SetFamily(6, [[i] for i in range(4)])
        assert find_k_sunflower(f, 4).core == frozenset()

    def test_bound_is_not_vacuous(self):
        # 7 = 8 - 1 sets at n=6: a sunflower-free example exists or the search reports exhaustion
        found = search_sunflower_free(6, 2, 3, 7)
        if found is not None:
            assert len(found) == 7 and find_k_sunflower(found, 3) is None
        six = search_sunflower_free(6, 2, 3, 6)
        assert six is not None and find_k_sunflower(six, 3) is None


class TestCoverage:
    def test_examples(self):
        assert coverage_prob_set(SetFamily(2, [[0], [1]]), [], Fraction(1, 2)).value == Fraction(3, 4)
        f = SetFamily(3, [[0, 1], [0, 2]])
        assert coverage_prob_clique(f, [0], Fraction(1, 2)).value == Fraction(3, 4)
        g = SetFamily(5, [[1, 2, 3]])
        assert coverage_prob_set(g, [1, 2, 3], Fraction(1, 3)).value == 1
        assert coverage_prob_clique(SetFamily(5, [[1, 2, 3], [0, 4, 1]]), [1, 2, 3], Fraction(1, 3)).value == 1

    @given(families(max_sets=5), st.sampled_from(P_VALUES), st.data())
    def test_set_matches_oracle(self, f, p, data):
        core = data.draw(st.sets(st.integers(0, f.n - 1), max_size=2))
        assert coverage_prob_set(f, sorted(core), p).value == set_coverage(f.sets, core, p)

    @given(families(n_range=(2, 5), max_sets=4), st.sampled_from(P_VALUES), st.data())
    def test_clique_matches_oracle(self, f, p, data):
        core = data.draw(st.sets(st.integers(0, f.n - 1), max_size=2))
        assert coverage_prob_clique(f, sorted(core), p).value == clique_coverage(f.sets, core, p)

    @given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2), st.sampled_from(P_VALUES))
    def test_sunflower_closed_form(self, ell, k, c, p):
        c = min(c, ell - 1)
        f = canonical_sunflower(ell, k, c)
        v = coverage_prob_clique(f, list(range(c)), p).value
        assert v == 1 - (1 - p ** (math.comb(ell, 2) - math.comb(c, 2))) ** k

    @given(families(max_sets=5), st.sampled_from(["set", "clique"]))
    def test_monotone_in_p(self, f, kind):
        fn = coverage_prob_set if kind == "set" else coverage_prob_clique
        if kind == "clique" and f.n > 6:
            return
        vals = [fn(f, None, Fraction(i, 10)).value for i in range(11)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    @given(families(n_range=(3, 6), max_sets=4), st.data())
    def test_monotone_in_family(self, f, data):
        extra = data.draw(st.frozensets(st.integers(0, f.n - 1), min_size=1))
        if extra in set(f.sets):
            return
        core = f.core_mask()
        g = f.with_set(sorted(extra))
        for fn in (coverage_prob_set, coverage_prob_clique):
            assert fn(g, core, Fraction(1, 2)).value >= fn(f, core, Fraction(1, 2)).value

    def test_capacity(self):
        f = SetFamily(30, [list(range(0, 13)), list(range(13, 26))])
        with pytest.raises(CapacityError):
            coverage_prob_set(f, [], 0.5)
        assert coverage_prob_set(f, [], 0.5, mode="mc", trials=1000, seed=1).trials == 1000

    def test_float_read_as_decimal(self):
        f = SetFamily(2, [[0], [1]])
        assert coverage_prob_set(f, [], 0.3).value == 1 - Fraction(7, 10) ** 2


class TestCheckRobust:
    def test_examples(self):
        f = SetFamily(2, [[0], [1]])
        assert check_robust(f, [], Fraction(1, 2), Fraction(1, 4), kind="set").verdict == "pass"
        assert check_robust(f, [], 0.5, 0.25, kind="set").verdict == "pass"
        assert check_robust(f, [], Fraction(1, 2), 0.2, kind="set").verdict == "fail"
        assert check_robust(SetFamily(4, [[0, 1], [2, 3]]), [], 0.01, 1, kind="clique").verdict == "pass"

    def test_exact_is_zero_width(self):
        v = check_robust(SetFamily(4, [[0, 1], [0, 2]]), [0], 0.5, 0.3)
        assert v.probability.exact and v.probability.half_width == 0

    def test_inconclusive_only_in_mc(self):
        f = SetFamily(2, [[0], [1]])
        v = check_robust(f, [], 0.5, 0.25, kind="set", mode="mc", trials=2000, seed=1)
        assert v.verdict == "inconclusive"
        lo, hi = v.probability.wilson()
        assert lo < 0.75 <= hi
        assert check_robust(f, [], 0.5, 0.5, kind="set", mode="mc", trials=2000, seed=1).verdict == "pass"
        assert check_robust(f, [], 0.5, 0.05, kind="set", mode="mc", trials=2000, seed=1).verdict == "fail"


class TestRobustSearch:
    def test_intersection_closure(self):
        masks = [mask_of(s) for s in ([0, 1, 2], [0, 1, 3], [0, 4, 5])]
        assert set(intersection_closure(masks)) == {mask_of([0, 1]), mask_of([0])}

    def test_star(self):
        f = SetFamily(6, [[0, 1], [0, 2], [0, 3], [0, 4]])
        found = find_robust_clique_sunflower(f, Fraction(1, 2), Fraction(1, 10))
        assert found.core == mask_of([0]) and found.coverage.value == Fraction(15, 16)

    @given(families(n_range=(3, 6), max_sets=5), st.sampled_from(P_VALUES), st.sampled_from([Fraction(1, 10), Fraction(3, 10)]))
    def test_first_core_is_robust_and_minimal(self, f, p, eps):
        found = find_robust_clique_sunflower(f, p, eps)
        # brute force over all subfamilies of size >= 2: robust ones with core C = their intersection
        best = None
        for r in range(2, len(f) + 1):
            for idx in combinations(range(len(f)), r):
                sub = f.subfamily(idx)
                if clique_coverage(sub.sets, sub.core(), p) >= 1 - eps:
                    key = (len(sub.core()), sub.core_mask())
                    best = key if best is None or key < best else best
        if best is None:
            assert found is None
        else:
            assert found is not None and (found.core.bit_count(), found.core) == best


class TestLemmas:
    def test_sunflower_rcs_examples(self):
        r = verify_sunflower_is_rcs(2, 2, 0, Fraction(1, 2))
        assert r.failure == Fraction(1, 4) and r.ok
        assert r.bound == pytest.approx(math.exp(-1))
        r = verify_sunflower_is_rcs(3, 3, 1, 0.6)
        assert r.failure == (1 - Fraction(3, 5) ** 3) ** 3 and r.ok

    def test_failure_decreases_in_k(self):
        vals = [verify_sunflower_is_rcs(2, k, 0, Fraction(1, 3)).failure for k in range(1, 8)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_rs_implies_rcs_single_set(self):
        assert rs_implies_rcs_holds(SetFamily(5, [[0, 1, 2]], uniformity=3), 0.5, 0.1) == (True, True)

    def test_rs_implies_rcs_small(self):
        rep = verify_rs_implies_rcs(100, 8, 2, 0.7, 0.3, seed=1)
        assert rep.premise_count == 100 and rep.ok
