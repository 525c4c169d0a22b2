import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linat.automata import (
    LinearAutomaton,
    LinearRepresentation,
    PureAutomaton,
    check_linear_axioms,
    check_pure_axioms,
    flip_flop_automaton,
    representation_from_generators,
    universal_linear,
)
from linat.divisor import REFUTED
from linat.products import (
    CascadeError,
    CascadeTriple,
    EmbeddingWitness,
    cascade_linear_pure,
    cascade_pure,
    check_mixed_laws,
    embed_cascade_in_wreath,
    embed_linear_cascade,
    law2_check,
    law2_witness,
    law3_witness,
    parallel_triple,
    tri_automata,
    tri_reps,
    verify_embedding,
    wreath_linear_pure,
    wreath_pure,
    wreath_triple_linear,
)
from linat.samples import random_cascade_triple
from linat.semigroups import cyclic_group, find_isomorphism, trivial_semigroup


def lam1():
    """GF(2)^1 under the trivial semigroup."""
    return LinearAutomaton(2, 1, 0, trivial_semigroup(), [[[1]]])


def regular(n):
    g = cyclic_group(n)
    return PureAutomaton(g, g.table)


def point():
    return PureAutomaton(trivial_semigroup(), [[0]])


def trivial_rep(p, d):
    return LinearRepresentation(p, d, trivial_semigroup(), [np.eye(d, dtype=int)])


def matrix_set(a):
    return {m.tobytes() for m in a.mats}


class TestCascadePure:
    def test_parallel(self):
        a1, a2 = flip_flop_automaton(2), regular(3)
        t = parallel_triple(a1.gamma, a2.gamma, a2.n_a)
        c = cascade_pure(a1, a2, t)
        assert check_pure_axioms(c).valid
        n2 = a2.gamma.order
        for s in range(c.n_a):
            for g in range(c.gamma.order):
                s1, s2 = divmod(s, a2.n_a)
                expect = a1.act(s1, g // n2) * a2.n_a + a2.act(s2, g % n2)
                assert c.act(s, g) == expect

    def test_wreath_triple_roundtrip(self):
        a1, a2 = flip_flop_automaton(2), regular(2)
        w, t = wreath_pure(a1, a2)
        assert cascade_pure(a1, a2, t) == w

    def test_corrupted_alpha(self):
        a1, a2 = regular(2), regular(2)
        _, t = wreath_pure(a1, a2)
        alpha = t.alpha.copy()
        alpha[5, 1] = 1 - alpha[5, 1]
        with pytest.raises(CascadeError) as err:
            cascade_pure(a1, a2, CascadeTriple(t.gamma, alpha, t.beta))
        assert err.value.instance[0] == "alpha"
        assert len(err.value.instance) == 4

    def test_corrupted_beta(self):
        a1, a2 = regular(2), regular(2)
        _, t = wreath_pure(a1, a2)
        beta = t.beta.copy()
        beta[0] = 1 - beta[0]
        with pytest.raises(CascadeError) as err:
            cascade_pure(a1, a2, CascadeTriple(t.gamma, t.alpha, beta))
        assert err.value.instance[0] == "beta"


class TestWreathPure:
    def test_single_driving_state(self):
        a1, a2 = regular(2), regular(3)
        a2 = PureAutomaton(a2.gamma, np.zeros((1, 3), dtype=int))
        w, _ = wreath_pure(a1, a2)
        assert w.gamma.order == 6 and w.n_a == 2

    def test_flip_flops(self):
        w, t = wreath_pure(flip_flop_automaton(2), flip_flop_automaton(2))
        assert w.n_a == 4 and w.gamma.order == 8
        assert check_pure_axioms(w).valid

    def test_trivial_base(self):
        a2 = regular(3)
        w, _ = wreath_pure(point(), a2)
        assert w.n_a == 3
        assert find_isomorphism(w.gamma, a2.gamma) is not None
        assert np.array_equal(w.circ, a2.circ)

    def test_outputs(self):
        a1 = PureAutomaton(cyclic_group(2), [[0, 1], [1, 0]], [[0, 1], [1, 0]])
        a2 = PureAutomaton(cyclic_group(2), [[0, 1], [1, 0]], [[1, 0], [0, 1]])
        assert check_pure_axioms(a1).valid and check_pure_axioms(a2).valid
        w, _ = wreath_pure(a1, a2)
        assert w.n_b == 4
        assert check_pure_axioms(w).valid


class TestEmbedCascade:
    def test_own_triple(self):
        a1, a2 = flip_flop_automaton(2), flip_flop_automaton(2)
        w, t = wreath_pure(a1, a2)
        wit = embed_cascade_in_wreath(w, t, a1, a2)
        assert wit.verified
        assert wit.element_map == list(range(w.gamma.order))

    def test_parallel_constant_functions(self):
        a1, a2 = flip_flop_automaton(2), flip_flop_automaton(2)
        t = parallel_triple(a1.gamma, a2.gamma, 2)
        c = cascade_pure(a1, a2, t)
        wit = embed_cascade_in_wreath(c, t, a1, a2)
        assert wit.verified
        for g, img in enumerate(wit.element_map):
            f = t.alpha[g]
            assert len(set(f.tolist())) == 1
            assert img == (f[0] * 2 + f[1]) * 2 + t.beta[g]

    @given(st.integers(0, 10**6), st.sampled_from([(2, 2), (2, 3), (3, 2)]))
    def test_random_triples(self, seed, sizes):
        a1, a2 = flip_flop_automaton(sizes[0]), flip_flop_automaton(sizes[1])
        t = random_cascade_triple(a1, a2, random.Random(seed))
        c = cascade_pure(a1, a2, t)
        assert check_pure_axioms(c).valid
        assert embed_cascade_in_wreath(c, t, a1, a2).verified

    def test_bad_witness_caught(self):
        a1, a2 = flip_flop_automaton(2), flip_flop_automaton(2)
        w, t = wreath_pure(a1, a2)
        wit = embed_cascade_in_wreath(w, t, a1, a2)
        emap = list(wit.element_map)
        emap[3], emap[4] = emap[4], emap[3]
        bad = EmbeddingWitness(wit.source, wit.target, emap, wit.state_map)
        assert not verify_embedding(bad)
        assert bad.failures


class TestTriReps:
    def test_zero_dim_second(self):
        r1 = representation_from_generators(3, [np.array([[0, 1], [1, 0]])])
        out = tri_reps(r1, trivial_rep(3, 0))
        assert out.gamma.order == r1.gamma.order
        assert matrix_set(out) == matrix_set(r1)

    def test_trivial_one_dim(self):
        out = tri_reps(trivial_rep(2, 1), trivial_rep(2, 1))
        assert out.gamma.order == 2
        assert sorted(m.tolist() for m in out.mats) == [[[1, 0], [0, 1]], [[1, 1], [0, 1]]]

    @given(st.sampled_from([2, 3]), st.integers(0, 2), st.integers(0, 2), st.data())
    def test_parallel_part(self, p, d1, d2, data):
        def rep(d):
            if d == 0:
                return trivial_rep(p, 0)
            g = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=d * d, max_size=d * d))).reshape(d, d)
            return representation_from_generators(p, [g])

        r1, r2 = rep(d1), rep(d2)
        out = tri_reps(r1, r2)
        assert check_linear_axioms(LinearAutomaton(p, out.dim, 0, out.gamma, out.mats)).valid
        zero_phi = {m.tobytes() for m in out.mats if not m[:d1, d1:].any()}
        parallel = set()
        for m1 in r1.mats:
            for m2 in r2.mats:
                blk = np.zeros((d1 + d2, d1 + d2), dtype=np.int64)
                blk[:d1, :d1], blk[d1:, d1:] = m1, m2
                parallel.add(blk.tobytes())
        assert zero_phi == parallel


class TestTriAutomata:
    def test_zero_dim_second(self):
        u = universal_linear(2, 1, 1)
        out = tri_automata(u, universal_linear(2, 0, 0))
        assert (out.dim_a, out.dim_b) == (1, 1)
        assert matrix_set(out) == matrix_set(u)

    def test_semi_inputs(self):
        u = universal_linear(2, 1, 0)
        out = tri_automata(u, u)
        r = universal_linear(2, 1, 0)
        expect = tri_reps(LinearRepresentation(2, 1, r.gamma, r.mats), LinearRepresentation(2, 1, r.gamma, r.mats))
        assert out.dim_b == 0
        assert matrix_set(out) == matrix_set(expect)

    def test_all_dims_one_trivial(self):
        one = LinearAutomaton(2, 1, 1, trivial_semigroup(), [np.eye(2, dtype=int)])
        out = tri_automata(one, one)
        assert out.gamma.order == 2**6
        assert check_linear_axioms(out).valid

    @pytest.mark.parametrize("kind", ["trivial", "scalars"])
    def test_associative(self, kind):
        base = lam1() if kind == "trivial" else universal_linear(2, 1, 0)
        left = tri_automata(tri_automata(base, base), base)
        right = tri_automata(base, tri_automata(base, base))
        emap = [right.element_of(m) for m in left.mats]
        assert None not in emap
        wit = EmbeddingWitness(left, right, emap)
        assert verify_embedding(wit, require_bijective=True)


class TestWreathLinear:
    def test_trivial_pure(self):
        u = universal_linear(2, 1, 1)
        w = wreath_linear_pure(u, point())
        assert (w.dim_a, w.dim_b, w.gamma.order) == (1, 1, 8)
        assert matrix_set(w) == matrix_set(u)

    def test_flip_flop_column_select(self):
        w = wreath_linear_pure(lam1(), flip_flop_automaton(2))
        assert (w.dim, w.gamma.order) == (2, 2)
        assert sorted(m.tolist() for m in w.mats) == [[[0, 1], [0, 1]], [[1, 0], [1, 0]]]

    @given(st.sampled_from(["ff2", "ff3", "c2", "c3"]), st.sampled_from(["lam", "scalars", "u11"]))
    def test_dimension_and_order(self, pure, lin):
        psi = {"ff2": flip_flop_automaton(2), "ff3": flip_flop_automaton(3), "c2": regular(2), "c3": regular(3)}[pure]
        l = {"lam": lam1(), "scalars": universal_linear(2, 1, 0), "u11": universal_linear(2, 1, 1)}[lin]
        w = wreath_linear_pure(l, psi)
        k = psi.n_a
        assert (w.dim_a, w.dim_b) == (l.dim_a * k, l.dim_b * k)
        assert w.gamma.order == l.gamma.order**k * psi.gamma.order
        assert check_linear_axioms(w).valid

    def test_output_requires_semi(self):
        psi = PureAutomaton(cyclic_group(2), [[0, 1], [1, 0]], [[0, 0], [0, 0]], n_b=1)
        with pytest.raises(CascadeError):
            wreath_linear_pure(lam1(), psi)


class TestCascadeLinear:
    def test_canonical_triple(self):
        l, psi = universal_linear(2, 1, 0), flip_flop_automaton(2)
        t = wreath_triple_linear(l, psi)
        assert cascade_linear_pure(l, psi, t) == wreath_linear_pure(l, psi)

    def test_block_diagonal_repetition(self):
        l, psi = universal_linear(3, 1, 0), regular(2)
        n = l.gamma.order
        t = CascadeTriple(l.gamma, np.repeat(np.arange(n)[:, None], 2, axis=1), np.zeros(n, dtype=int))
        c = cascade_linear_pure(l, psi, t)
        for g in range(n):
            assert np.array_equal(c.mats[g], np.kron(l.mats[g], np.eye(2, dtype=int)))
        assert embed_linear_cascade(c, t, l, psi).verified

    def test_corrupted_alpha(self):
        l, psi = universal_linear(2, 1, 0), regular(2)
        t = wreath_triple_linear(l, psi)
        alpha = t.alpha.copy()
        alpha[3, 0] = 1 - alpha[3, 0]
        with pytest.raises(CascadeError) as err:
            cascade_linear_pure(l, psi, CascadeTriple(t.gamma, alpha, t.beta))
        kind, g1, g2, x = err.value.instance
        assert kind == "alpha" and 0 <= x < 2


class TestMixedLaws:
    def test_singletons(self):
        l = universal_linear(2, 1, 0)
        results = check_mixed_laws(l, l, point(), point())
        assert [r.holds for r in results] == [True, True, True]

    def test_law3_flip_flop(self):
        w = law3_witness(lam1(), lam1(), flip_flop_automaton(2))
        assert w.verified
        assert (w.source.gamma.order, w.target.gamma.order) == (8, 64)

    def test_law1_dims(self):
        results = check_mixed_laws(lam1(), lam1(), flip_flop_automaton(2), flip_flop_automaton(2))
        w1 = results[0].witness
        assert results[0].holds
        assert w1.source.dim == w1.target.dim == 4

    def test_law2_regular_embedding(self):
        assert law2_witness(lam1(), lam1(), regular(2)).verified
        assert law2_witness(universal_linear(2, 1, 0), lam1(), regular(2)).verified

    def test_law2_zero_in_second_factor(self):
        w = law2_witness(lam1(), universal_linear(2, 1, 0), regular(2))
        assert not w.verified and w.failures

    def test_law2_flip_flop_refuted(self):
        ff = flip_flop_automaton(2)
        assert not law2_witness(lam1(), lam1(), ff).verified
        _, _, res = law2_check(lam1(), lam1(), ff)
        assert res.verdict == REFUTED
