import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from linat.automata import (
    LinearAutomaton,
    PureAutomaton,
    check_linear_axioms,
    faithful,
    flip_flop_automaton,
    linear_from_generators,
)
from linat.decomp import (
    COMPRESS,
    FLIP_FLOP,
    HALT,
    LINEAR_SIMPLE_GROUP,
    PURE_SIMPLE_GROUP,
    TRI,
    WR_LINEAR_PURE,
    DecompositionError,
    Leaf,
    MaschkeError,
    Node,
    ReducibleError,
    atom_kind,
    clifford_step,
    complexity,
    compress,
    decompose,
    is_atom,
    is_irreducible,
    law2_forward,
    law3_backward,
    law3_forward,
    lift_group,
    linear_decompose,
    module_composition_series,
    rewrite_search,
    synthetic_tree,
    walk,
)
from linat.divisor import FOUND, verify_witness
from linat.gfla import DimensionError, Subspace, all_subspaces
from linat.samples import b2_natural, c3_on_gf2, gl22, s3_gf7, s3_rep, unipotent, unitriangular
from linat.semigroups import FiniteSemigroup, cyclic_group, find_isomorphism, is_completely_zero_simple


@st.composite
def semi_reps(draw):
    # keep the full matrix monoid small: p^(d*d) <= 512
    p, d = draw(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]))
    count = draw(st.integers(1, 2))
    gens = [
        np.array(draw(st.lists(st.integers(0, p - 1), min_size=d * d, max_size=d * d))).reshape(d, d)
        for _ in range(count)
    ]
    return linear_from_generators(p, d, 0, gens)


@st.composite
def block_automata(draw, max_total=3):
    p = draw(st.sampled_from([2, 3]))
    d = draw(st.integers(1, max_total if p == 2 else 2))
    da = draw(st.integers(0, d))
    db = d - da
    gens = []
    for _ in range(draw(st.integers(1, 2))):
        m = np.array(draw(st.lists(st.integers(0, p - 1), min_size=d * d, max_size=d * d))).reshape(d, d)
        m[da:, :da] = 0
        gens.append(m)
    return linear_from_generators(p, da, db, gens)


def brute_irreducible(r) -> bool:
    for w in all_subspaces(r.p, r.dim):
        if 0 < w.dim < r.dim and all(w.is_invariant(m) for m in r.mats):
            return False
    return True


def relabel(l: LinearAutomaton, perm) -> LinearAutomaton:
    perm = np.asarray(perm)
    n = l.gamma.order
    table = np.zeros((n, n), dtype=np.int64)
    table[np.ix_(perm, perm)] = perm[l.gamma.table]
    mats = np.zeros_like(l.mats)
    mats[perm] = l.mats
    g = FiniteSemigroup(table).with_marks()
    return LinearAutomaton(l.p, l.dim_a, l.dim_b, g, mats)


class TestIrreducible:
    def test_examples(self):
        assert is_irreducible(LinearAutomaton(5, 1, 0, cyclic_group(4), [[[2 ** k % 5]] for k in range(4)]))
        assert is_irreducible(c3_on_gf2())
        assert not is_irreducible(unipotent())
        with pytest.raises(DimensionError):
            is_irreducible(LinearAutomaton(2, 0, 0, cyclic_group(1), np.zeros((1, 0, 0))))

    @given(semi_reps())
    def test_against_brute_force(self, r):
        assert is_irreducible(r) == brute_irreducible(r)


class TestCompositionSeries:
    def test_lengths(self):
        assert len(module_composition_series(c3_on_gf2())) - 1 == 1
        chain = module_composition_series(unipotent())
        assert len(chain) - 1 == 2
        assert chain[1] == Subspace(2, 2, [[0, 1]])
        zero = LinearAutomaton(2, 0, 0, cyclic_group(1), np.zeros((1, 0, 0)))
        assert len(module_composition_series(zero)) - 1 == 0

    @given(semi_reps())
    def test_chain_invariant(self, r):
        chain = module_composition_series(r)
        assert chain[0].dim == 0 and chain[-1].dim == r.dim
        for lo, hi in zip(chain, chain[1:]):
            assert lo <= hi and lo.dim < hi.dim
            assert all(hi.is_invariant(m) for m in r.mats)


class TestLinearDecompose:
    def test_irreducible(self):
        ld = linear_decompose(c3_on_gf2())
        assert len(ld.factors) == 1 and ld.tri_count == 0

    def test_unitriangular(self):
        ld = linear_decompose(unitriangular())
        assert len(ld.factors) == 3 and ld.tri_count == 2
        assert ld.sides == ["A", "A", "B"]
        assert ld.certificate()[0]

    @given(block_automata())
    def test_factor_count(self, l):
        ld = linear_decompose(l)
        n = len(module_composition_series(LinearAutomaton(l.p, l.dim_a, 0, l.gamma, l.sigma))) - 1
        m = len(module_composition_series(LinearAutomaton(l.p, l.dim_b, 0, l.gamma, l.sigma_p))) - 1
        assert len(ld.factors) == n + m
        assert sum(ld.sizes) == l.dim
        ok, why = ld.certificate()
        assert ok, why
        for f in ld.factors:
            assert check_linear_axioms(f).valid


class TestCompress:
    def test_group_with_zero(self):
        r = c3_on_gf2(with_zero=True)
        c = compress(r)
        assert c.null == frozenset({3}) and c.ideal == frozenset(range(4))
        assert not c.adjoined_zero
        assert find_isomorphism(c.sigma, r.gamma) is not None

    def test_group_without_zero(self):
        c = compress(c3_on_gf2())
        assert c.null == frozenset() and c.ideal == frozenset(range(3))
        assert c.adjoined_zero and c.sigma.order == 4
        assert c.claimed.gamma.order == 3
        assert verify_witness(c.witness, c.claimed, c.source)

    def test_b2(self):
        c = compress(b2_natural())
        assert c.sigma.order == 5 and is_completely_zero_simple(c.sigma)

    def test_reducible_rejected(self):
        with pytest.raises(ReducibleError):
            compress(unipotent())

    @given(semi_reps())
    def test_output(self, r):
        r = faithful(r)
        assume(is_irreducible(r) and any(m.any() for m in r.mats))
        c = compress(r)
        assert is_completely_zero_simple(c.sigma)
        assert is_irreducible(c.rep)
        assert verify_witness(c.witness, c.claimed, r)


class TestLift:
    def test_group_with_zero(self):
        lift = lift_group(compress(c3_on_gf2(with_zero=True)))
        assert lift.group.order == 3 and lift.y_count == 1
        assert lift.group_rep.dim == 2 and is_irreducible(lift.group_rep)
        assert lift.claim.verdict == FOUND

    def test_b2(self):
        lift = lift_group(compress(b2_natural()))
        assert lift.group.order == 1 and lift.y_count == 2
        assert lift.group_rep.dim == 1
        assert lift.claim.verdict == FOUND

    def test_no_check(self):
        lift = lift_group(compress(b2_natural()), check=False)
        assert lift.claim is None and lift.status.startswith("unverified")


class TestClifford:
    def test_simple_group(self):
        assert clifford_step(c3_on_gf2()) is None

    def test_s3_gf7(self):
        split = clifford_step(s3_gf7())
        assert [len(n) for n in split.series] == [6, 3, 1]
        assert [s.dim for s in split.summands] == [1, 1]
        assert len(split.cosets) == 2
        h = split.h_group
        gen = next(x for x in range(3) if x != h.find_identity())
        eig = {int(s.mats[gen][0, 0]) for s in split.summands}
        assert eig == {2, 4}
        ok, why = split.verify()
        assert ok, why

    def test_maschke(self):
        r = s3_rep(3, [[0, 1], [2, 2]], [[0, 1], [1, 0]])
        with pytest.raises(MaschkeError) as err:
            clifford_step(r)
        assert "3" in str(err.value) and "6" in str(err.value)


class TestAtoms:
    def test_examples(self):
        assert atom_kind(c3_on_gf2()) == LINEAR_SIMPLE_GROUP
        assert atom_kind(flip_flop_automaton(2)) == FLIP_FLOP
        assert not is_atom(unipotent())
        c3 = cyclic_group(3)
        assert atom_kind(PureAutomaton(c3, c3.table)) == PURE_SIMPLE_GROUP
        c4 = cyclic_group(4)
        assert not is_atom(PureAutomaton(c4, c4.table))
        assert not is_atom(s3_gf7())

    def test_mixed_not_atom(self):
        assert not is_atom(unitriangular())


class TestDecompose:
    def test_atom(self):
        t = decompose(c3_on_gf2())
        assert isinstance(t.root, Leaf)
        assert complexity(t).op_count == 0
        assert all(v == 0 for k, v in complexity(t).as_dict().items() if k not in ("linear_atoms", "group_atoms", "lower_bound"))

    def test_three_compressing_factors(self):
        rep = complexity(decompose(b2_natural(3)))
        assert rep.op_count == 3 * 3 - 1
        assert (rep.tri_count, rep.compress_count, rep.wr_linear_count) == (2, 3, 3)

    def test_s3_gf7_shape(self):
        t = decompose(s3_gf7())
        assert t.root.op == COMPRESS
        wr = t.root.children[0]
        assert wr.op == WR_LINEAR_PURE
        lin, pure = wr.children
        assert lin.op == TRI and [c.kind for c in lin.children] == [LINEAR_SIMPLE_GROUP] * 2
        assert pure.kind == PURE_SIMPLE_GROUP and pure.payload.n_a == 2

    def test_halts(self):
        nil = linear_from_generators(2, 2, 0, [np.array([[0, 1], [0, 0]])])
        rep = complexity(decompose(nil))
        assert rep.halted == 2 and rep.lower_bound
        t = decompose(gl22())
        assert t.partial
        assert any("Maschke" in x.reason or "divides" in x.reason for x in t.leaves() if x.kind == HALT)

    def test_errors(self):
        c4 = cyclic_group(4)
        not_faithful = LinearAutomaton(3, 1, 0, c4, [[[1]], [[2]], [[1]], [[2]]])
        with pytest.raises(DecompositionError):
            decompose(not_faithful)

    @pytest.mark.parametrize("make", [s3_gf7, unitriangular, b2_natural, unipotent, lambda: c3_on_gf2(True)])
    def test_leaves_are_atoms(self, make):
        t = decompose(make())
        for leaf in t.leaves():
            if leaf.kind != HALT:
                assert atom_kind(leaf.payload) == leaf.kind
        for node in t.nodes():
            assert node.status != "refuted"

    @pytest.mark.parametrize("make", [s3_gf7, unitriangular, b2_natural])
    def test_deterministic(self, make):
        a, b = decompose(make()), decompose(make())
        assert a.key() == b.key() and a.to_dict() == b.to_dict()

    @given(st.permutations(list(range(6))))
    def test_relabel_invariance(self, perm):
        base = complexity(decompose(s3_gf7())).as_dict()
        assert complexity(decompose(relabel(s3_gf7(), perm))).as_dict() == base

    @given(block_automata(max_total=2))
    def test_counter_invariants(self, l):
        l = faithful(l)
        t = decompose(l)
        rep = complexity(t)
        d = rep.as_dict()
        assert d["op_count"] == d["tri_count"] + d["wr_linear_count"] + d["wr_pure_count"] + d["compress_count"]
        leaves = t.leaves()
        assert d["linear_atoms"] == sum(x.kind == LINEAR_SIMPLE_GROUP for x in leaves)
        assert d["group_atoms"] == d["linear_atoms"] + sum(x.kind == PURE_SIMPLE_GROUP for x in leaves)


class TestBookkeeping:
    def test_synthetic(self):
        assert complexity(synthetic_tree(3)).op_count == 3
        rewritten = law3_forward(synthetic_tree(3).root)
        assert complexity(rewritten).op_count == 5
        assert complexity(Leaf(LINEAR_SIMPLE_GROUP, label="A")).op_count == 0

    @given(st.integers(2, 8))
    def test_law3_increases(self, s):
        t = synthetic_tree(s)
        before = complexity(t).op_count
        after = complexity(law3_forward(t.root)).op_count
        assert before == s and after == 2 * s - 1 and after > before
        back = law3_backward(law3_forward(t.root))
        assert back.key() == t.root.key()

    def test_law3_on_pipeline_tree(self):
        t = decompose(s3_gf7())
        wr = next(n for n in t.nodes() if n.op == WR_LINEAR_PURE)
        assert complexity(law3_forward(wr)).op_count > complexity(wr).op_count

    def test_label_invariance(self):
        a = synthetic_tree(4)
        b = synthetic_tree(4)
        for leaf in b.leaves():
            leaf.label = leaf.label[::-1] + "'"
        assert complexity(a).as_dict() == complexity(b).as_dict()

    def test_law2_move(self):
        leaves = [Leaf(LINEAR_SIMPLE_GROUP, label=x) for x in "ab"]
        psi = Leaf(PURE_SIMPLE_GROUP, label="X")
        n = Node(TRI, [leaves[0], Node(WR_LINEAR_PURE, [leaves[1], psi])])
        moved = law2_forward(n)
        assert moved.op == WR_LINEAR_PURE and moved.children[0].op == TRI
        assert complexity(moved).op_count == complexity(n).op_count


class TestRewriteSearch:
    def test_budget_zero(self):
        t = synthetic_tree(3)
        res = rewrite_search(t, 0)
        assert res.report.op_count == 3 and res.moves == []

    def test_finds_smaller_form(self):
        five = law3_forward(synthetic_tree(3).root)
        res = rewrite_search(five, 1)
        assert res.report.op_count == 3 and res.moves == ["law3-reverse"]

    def test_atom(self):
        res = rewrite_search(Leaf(LINEAR_SIMPLE_GROUP, label="A"), 5)
        assert res.report.op_count == 0 and res.explored == 1

    def test_never_worse(self):
        t = decompose(unitriangular())
        base = complexity(t).op_count
        assert rewrite_search(t, 3).report.op_count <= base


def test_walk_visits_everything():
    t = decompose(b2_natural(2))
    nodes = list(walk(t.root))
    assert len(nodes) == len(t.nodes()) + len(t.leaves())
