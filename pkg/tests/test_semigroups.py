import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from linat.automata import matrix_closure
from linat.decomp import composition_factors
from linat.semigroups import (
    FiniteSemigroup,
    NotAGroupError,
    NotAssociativeError,
    NotIdealError,
    SemigroupError,
    adjoin_zero,
    associativity_failures,
    brandt_b2,
    closure,
    composition_series,
    cyclic_group,
    direct_product,
    faithful_quotient_congruence,
    find_isomorphism,
    flip_flop,
    ideals,
    is_completely_zero_simple,
    is_ideal,
    is_simple_group,
    min_ideal_above,
    rectangular_band,
    rees_quotient,
    rees_structure,
    right_zero,
    symmetric_group,
    transformation_compose,
    trivial_semigroup,
    wreath_decode,
    wreath_encode,
    wreath_semigroup,
)


@st.composite
def transformation_semigroups(draw, max_points=4, max_gens=3):
    n = draw(st.integers(1, max_points))
    gens = draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * n), min_size=1, max_size=max_gens))
    return closure(gens, transformation_compose).semigroup


@st.composite
def permutation_groups(draw, max_points=4):
    n = draw(st.integers(1, max_points))
    perm = st.permutations(list(range(n))).map(tuple)
    gens = draw(st.lists(perm, min_size=1, max_size=2))
    return closure(gens, transformation_compose).semigroup.with_marks()


def chain3():
    # e > f > z: ef = fe = f, everything times z is z
    t = [[0, 1, 2], [1, 1, 2], [2, 2, 2]]
    return FiniteSemigroup(t, zero=2)


def null_semigroup(n):
    return FiniteSemigroup(np.zeros((n, n), dtype=int), zero=0)


def group_with_zero(n):
    return adjoin_zero(cyclic_group(n))


def independent_normal_subgroups(g):
    """Unions of conjugacy classes that are closed under the product."""
    inv = g.inverses()
    t = g.table
    classes = {frozenset(int(t[t[inv[x], y], x]) for x in range(g.order)) for y in range(g.order)}
    e = g.find_identity()
    rest = [c for c in classes if e not in c]
    out = []
    for k in range(len(rest) + 1):
        for pick in itertools.combinations(rest, k):
            h = {e}.union(*pick)
            if all(int(t[a, b]) in h for a in h for b in h):
                out.append(frozenset(h))
    return out


class TestConstruction:
    def test_non_associative_reports_triple(self):
        t = [[0, 0], [0, 0]]
        t[1][1] = 0
        t[0][1] = 1  # 0*1 = 1 while the rest is 0
        with pytest.raises(NotAssociativeError) as err:
            FiniteSemigroup(t)
        x, y, z = err.value.triple
        tab = np.array(t)
        assert tab[tab[x, y], z] != tab[x, tab[y, z]]

    def test_bad_marks(self):
        with pytest.raises(SemigroupError):
            FiniteSemigroup([[0, 1], [1, 0]], zero=0)
        with pytest.raises(SemigroupError):
            FiniteSemigroup([[0, 0], [0, 0]], identity=1)
        with pytest.raises(SemigroupError):
            FiniteSemigroup([[0, 2], [0, 0]])

    @given(transformation_semigroups())
    def test_closure_associative(self, s):
        assert associativity_failures(s.table) == []

    def test_closure_examples(self):
        assert closure([(0, 0)], transformation_compose).semigroup.order == 1
        consts = closure([(0, 0), (1, 1)], transformation_compose).semigroup
        assert find_isomorphism(consts, right_zero(2)) is not None
        s, mats, _ = matrix_closure([np.array([[0, 1], [1, 1]])], 2)
        assert s.order == 3
        assert find_isomorphism(s.with_marks(), cyclic_group(3)) is not None

    def test_flip_flop(self):
        s, act = flip_flop(1)
        assert s.order == 1 and act.tolist() == [[0]]
        s, act = flip_flop(2)
        assert s.table.tolist() == [[0, 1], [0, 1]]
        assert act[0, 1] == 1
        s, _ = flip_flop(3)
        assert all(s.mul(x, y) == y for x in range(3) for y in range(3))

    def test_b2(self):
        b = brandt_b2()
        assert b.order == 5 and b.zero == 0
        assert associativity_failures(b.table) == []
        assert sorted(b.idempotents()) == [0, 1, 4]


class TestIdeals:
    def test_group(self):
        assert ideals(cyclic_group(4)) == [frozenset(range(4))]

    def test_group_with_zero(self):
        g0 = group_with_zero(3)
        assert ideals(g0) == [frozenset({3}), frozenset(range(4))]
        assert min_ideal_above(g0, []) == frozenset({3})
        assert min_ideal_above(g0, [3]) == frozenset(range(4))

    def test_right_zero(self):
        # M^r is simple; singletons are left ideals only
        s = right_zero(2)
        assert ideals(s) == [frozenset({0, 1})]
        for u in ([0], [1]):
            assert not is_ideal(s, u)
            assert {s.mul(g, x) for g in range(2) for x in u} <= set(u)

    def test_b2_zero_simple(self):
        assert min_ideal_above(brandt_b2(), [0]) == frozenset(range(5))

    def test_not_ideal(self):
        with pytest.raises(NotIdealError):
            min_ideal_above(chain3(), [1])
        with pytest.raises(NotIdealError):
            rees_quotient(chain3(), [0])

    @given(transformation_semigroups())
    def test_lattice(self, s):
        found = ideals(s)
        assert all(is_ideal(s, i) for i in found)
        fs = set(found)
        for a, b in itertools.combinations(found, 2):
            assert a | b in fs
            if a & b:
                assert a & b in fs

    @given(transformation_semigroups())
    def test_min_ideal_above(self, s):
        for u in [frozenset()] + ideals(s)[:-1]:
            v = min_ideal_above(s, u)
            assert is_ideal(s, v) and u < v
            assert not any(u < w < v for w in ideals(s))


class TestRees:
    def test_quotient_by_zero(self):
        b = brandt_b2()
        q, mapping = rees_quotient(b, [0])
        assert q.order == 5
        assert find_isomorphism(q, b) is not None

    def test_chain(self):
        q, m = rees_quotient(chain3(), [2])
        assert q.order == 3 and q.zero == m[2]
        e, f, z = m[0], m[1], m[2]
        assert q.mul(f, f) == f and q.mul(e, f) == f and q.mul(f, e) == f
        assert q.mul(e, z) == z

    @given(transformation_semigroups())
    def test_quotient_hom(self, s):
        for u in ideals(s):
            q, m = rees_quotient(s, u)
            assert q.zero is not None or len(u) <= 1
            for a in range(s.order):
                for b in range(s.order):
                    assert m[s.mul(a, b)] == q.mul(m[a], m[b])

    def test_completely_zero_simple(self):
        assert is_completely_zero_simple(group_with_zero(3))
        assert not is_completely_zero_simple(null_semigroup(2))
        assert not is_completely_zero_simple(null_semigroup(3))
        assert is_completely_zero_simple(brandt_b2())
        assert not is_completely_zero_simple(chain3())

    def test_structure_group_with_zero(self):
        r = rees_structure(group_with_zero(3))
        assert len(r.X) == len(r.Y) == 1
        assert r.group.order == 3
        assert r.sandwich == [[r.group.identity]]

    def test_structure_b2(self):
        r = rees_structure(brandt_b2())
        assert len(r.X) == len(r.Y) == 2
        assert r.group.order == 1
        entries = [[v is not None for v in row] for row in r.sandwich]
        assert sorted(map(sorted, entries)) == [[False, True], [False, True]]
        assert sum(map(sum, entries)) == 2

    def test_structure_rectangular_band_with_zero(self):
        s = adjoin_zero(rectangular_band(2, 2))
        r = rees_structure(s)
        assert r.group.order == 1
        assert all(v == 0 for row in r.sandwich for v in row)

    @pytest.mark.parametrize(
        "s",
        [brandt_b2(), group_with_zero(4), adjoin_zero(rectangular_band(2, 3)), adjoin_zero(symmetric_group(3)[0])],
        ids=["b2", "c4zero", "band23", "s3zero"],
    )
    def test_reconstruction(self, s):
        r = rees_structure(s)
        assert np.array_equal(r.reconstructed_table(), s.table)
        assert all(any(v is not None for v in row) for row in r.sandwich)
        assert all(any(row[x] is not None for row in r.sandwich) for x in range(len(r.X)))

    def test_rejects_non_simple(self):
        with pytest.raises(SemigroupError):
            rees_structure(chain3())


class TestGroups:
    def test_series_examples(self):
        assert len(composition_series(cyclic_group(3))) == 2
        s3, _ = symmetric_group(3)
        series = composition_series(s3)
        assert [len(n) for n in series] == [6, 3, 1]
        assert sorted(f.order for f in composition_factors(s3, series)) == [2, 3]
        c4 = composition_series(cyclic_group(4))
        assert [len(n) for n in c4] == [4, 2, 1]
        assert [f.order for f in composition_factors(cyclic_group(4), c4)] == [2, 2]

    def test_non_group_rejected(self):
        with pytest.raises(NotAGroupError):
            composition_series(right_zero(2))

    @given(permutation_groups())
    def test_factors_simple(self, g):
        series = composition_series(g)
        assert len(series[-1]) == 1
        for f in composition_factors(g, series):
            assert len(independent_normal_subgroups(f)) == 2
            assert is_simple_group(f)
        assert np.prod([len(a) // len(b) for a, b in zip(series, series[1:])]) == g.order

    def test_s4(self):
        s4, _ = symmetric_group(4)
        orders = [f.order for f in composition_factors(s4, composition_series(s4))]
        assert orders == [2, 3, 2, 2]


class TestWreath:
    def test_trivial_base(self):
        _, act = flip_flop(2)
        w = wreath_semigroup(trivial_semigroup(), act, right_zero(2))
        assert find_isomorphism(w, right_zero(2)) is not None

    def test_flip_flops(self):
        _, act = flip_flop(2)
        assert wreath_semigroup(right_zero(2), act, right_zero(2)).order == 8

    def test_singleton_carrier(self):
        act = np.zeros((1, 2), dtype=int)
        w = wreath_semigroup(cyclic_group(2), act, cyclic_group(2))
        assert find_isomorphism(w, direct_product(cyclic_group(2), cyclic_group(2))) is not None

    @given(transformation_semigroups(max_points=2), transformation_semigroups(max_points=3, max_gens=2))
    def test_order_formula(self, g1, g2):
        # g2 acts on itself by right multiplication
        assume(g1.order**g2.order * g2.order <= 2000)
        w = wreath_semigroup(g1, g2.table, g2)
        assert w.order == g1.order**g2.order * g2.order
        assert associativity_failures(w.table, limit=1) == []

    @given(st.integers(1, 4), st.integers(0, 3), st.integers(1, 4), st.data())
    def test_code_roundtrip(self, n1, k, n2, data):
        idx = data.draw(st.integers(0, n1**k * n2 - 1))
        f, s = wreath_decode(n1, k, n2, idx)
        assert wreath_encode(n1, f, n2, s) == idx


class TestCongruence:
    def test_examples(self):
        c4 = cyclic_group(4)
        discrete = faithful_quotient_congruence(c4, [0, 1, 2, 3])
        assert len(discrete.classes) == 4
        one = faithful_quotient_congruence(c4, [0] * 4)
        assert one.quotient(c4).order == 1
        parity = faithful_quotient_congruence(c4, [x % 2 for x in range(4)])
        assert parity.is_compatible(c4)
        assert parity.quotient(c4).order == 2

    def test_incompatible_detected(self):
        c4 = cyclic_group(4)
        bad = faithful_quotient_congruence(c4, [0, 0, 1, 1])
        assert not bad.is_compatible(c4)
