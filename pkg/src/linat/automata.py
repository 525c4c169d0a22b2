"""Pure and linear semigroup automata.

A pure automaton (A, Γ, B) stores two tables indexed ``[state, element]``:
``circ`` (next state in A) and ``star`` (output in B).  An empty B makes it a
semi-automaton and ``star`` is ``None``.

A linear automaton stores one block matrix ``[[σ, φ], [0, σ']]`` per element of
Γ.  Vectors are rows and act on the right, so ``(a, b)·M = (aσ, aφ + bσ')``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import check_cap
from .gfla import DimensionError, PrimeField, matmul_mod, vector_array
from .semigroups import (
    FiniteSemigroup,
    SemigroupError,
    closure,
    faithful_quotient_congruence,
    transformation_compose,
)

# pairs of elements above which axiom checks sample instead of enumerating
SAMPLE_THRESHOLD = 250_000
SAMPLE_SIZE = 20_000


@dataclass
class AxiomReport:
    valid: bool
    failures: list[tuple] = field(default_factory=list)
    checked: int = 0
    sampled: bool = False

    def __bool__(self) -> bool:
        return self.valid

    def summary(self) -> str:
        mode = "sampled" if self.sampled else "exhaustive"
        if self.valid:
            return f"valid ({mode}, {self.checked} instances)"
        return f"{len(self.failures)} violations ({mode}, {self.checked} instances); first {self.failures[0]}"


def _pairs(n: int, sample: bool | None):
    """All (g1, g2) index arrays, or a deterministic sample above the threshold."""
    if sample is None:
        sample = n * n > SAMPLE_THRESHOLD
    if not sample:
        g1, g2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return g1.ravel(), g2.ravel(), False
    rng = random.Random(0)
    k = min(SAMPLE_SIZE, n * n)
    flat = np.array(sorted(rng.sample(range(n * n), k)), dtype=np.int64)
    return flat // n, flat % n, True


# --- pure -------------------------------------------------------------------


class PureAutomaton:
    def __init__(self, gamma: FiniteSemigroup, circ, star=None, n_b: int | None = None, labels: dict | None = None):
        self.gamma = gamma
        c = np.array(circ, dtype=np.int64).reshape(-1, gamma.order)
        if gamma.order == 0:
            c = np.zeros((len(circ), 0), dtype=np.int64)
        n_a = c.shape[0]
        if c.size and (c.min() < 0 or c.max() >= n_a):
            raise SemigroupError("transition table entries out of range")
        c.setflags(write=False)
        self.circ = c
        if star is None:
            self.star = None
            self.n_b = 0 if n_b is None else n_b
            if self.n_b:
                raise SemigroupError("output table required when B is nonempty")
        else:
            s = np.array(star, dtype=np.int64).reshape(n_a, gamma.order)
            self.n_b = int(s.max()) + 1 if n_b is None else n_b
            if s.size and (s.min() < 0 or s.max() >= self.n_b):
                raise SemigroupError("output table entries out of range")
            s.setflags(write=False)
            self.star = s
        self.labels = labels or {}

    @property
    def n_a(self) -> int:
        return self.circ.shape[0]

    @property
    def is_semi(self) -> bool:
        return self.star is None

    def act(self, a: int, g: int) -> int:
        return int(self.circ[a, g])

    def out(self, a: int, g: int) -> int:
        if self.star is None:
            raise SemigroupError("semi-automaton has no output")
        return int(self.star[a, g])

    def signatures(self) -> list[bytes]:
        cols = [self.circ.T]
        if self.star is not None:
            cols.append(self.star.T)
        stacked = np.concatenate(cols, axis=1) if cols else np.zeros((self.gamma.order, 0))
        return [np.ascontiguousarray(row).tobytes() for row in stacked]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PureAutomaton):
            return NotImplemented
        same_star = (self.star is None and other.star is None) or (
            self.star is not None and other.star is not None and np.array_equal(self.star, other.star)
        )
        return self.gamma == other.gamma and np.array_equal(self.circ, other.circ) and same_star and self.n_b == other.n_b

    def __repr__(self) -> str:
        return f"PureAutomaton(|A|={self.n_a}, |Γ|={self.gamma.order}, |B|={self.n_b})"


def check_pure_axioms(a: PureAutomaton, sample: bool | None = None) -> AxiomReport:
    """a∘γ1γ2 = (a∘γ1)∘γ2 and a∗γ1γ2 = (a∘γ1)∗γ2 for every state and pair."""
    t = a.gamma.table
    g1, g2, sampled = _pairs(a.gamma.order, sample)
    prod = t[g1, g2]
    failures: list[tuple] = []
    lhs = a.circ[:, prod]  # (nA, pairs)
    rhs = a.circ[a.circ[:, g1], g2]
    for s, k in zip(*np.nonzero(lhs != rhs)):
        failures.append((1, int(s), int(g1[k]), int(g2[k])))
    if a.star is not None:
        lhs = a.star[:, prod]
        rhs = a.star[a.circ[:, g1], g2]
        for s, k in zip(*np.nonzero(lhs != rhs)):
            failures.append((2, int(s), int(g1[k]), int(g2[k])))
    failures.sort()
    return AxiomReport(not failures, failures, a.n_a * len(g1), sampled)


def semi_automaton(gamma: FiniteSemigroup, action) -> PureAutomaton:
    return PureAutomaton(gamma, action)


def flip_flop_automaton(m: int) -> PureAutomaton:
    from .semigroups import flip_flop

    s, action = flip_flop(m)
    return PureAutomaton(s, action)


def _maps(n: int, m: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(m), repeat=n))


def universal_pure(n_a: int, n_b: int) -> PureAutomaton:
    """(A, S_A × Fun(A, B), B) with (σ1, φ1)(σ2, φ2) = (σ1σ2, σ1φ2).

    Element (σ, φ) has index ``iσ * |B|^|A| + iφ`` with maps enumerated
    lexicographically as value tuples.  An empty B gives S_A acting on A.
    """
    n_sig = n_a**n_a
    n_phi = n_b**n_a if n_b else 1
    check_cap("universal pure automaton", n_sig * n_phi, "table")
    sigmas = np.array(_maps(n_a, n_a), dtype=np.int64).reshape(n_sig, n_a)
    sig_index = {tuple(s): i for i, s in enumerate(sigmas.tolist())}
    if n_b:
        phis = np.array(_maps(n_a, n_b), dtype=np.int64).reshape(n_phi, n_a)
    else:
        phis = np.zeros((1, n_a), dtype=np.int64)
    phi_index = {tuple(f): i for i, f in enumerate(phis.tolist())}
    n = n_sig * n_phi
    table = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        s1 = sigmas[x // n_phi]
        for y in range(n):
            s2, f2 = sigmas[y // n_phi], phis[y % n_phi]
            s12 = tuple(s2[s1].tolist())
            f12 = tuple(f2[s1].tolist()) if n_b else tuple(phis[0].tolist())
            table[x, y] = sig_index[s12] * n_phi + phi_index[f12]
    gamma = FiniteSemigroup(table, check=False).with_marks()
    circ = np.array([[sigmas[g // n_phi][a] for g in range(n)] for a in range(n_a)], dtype=np.int64).reshape(n_a, n)
    if not n_b:
        return PureAutomaton(gamma, circ)
    star = np.array([[phis[g % n_phi][a] for g in range(n)] for a in range(n_a)], dtype=np.int64).reshape(n_a, n)
    return PureAutomaton(gamma, circ, star, n_b)


def pure_from_generators(n_a: int, gens_circ: Sequence[Sequence[int]], gens_star=None, n_b: int = 0) -> PureAutomaton:
    """Close generator actions (state tuple, optional output tuple) into a pure automaton."""
    if gens_star is None:
        gens = [tuple(c) for c in gens_circ]
        cl = closure(gens, transformation_compose)
        circ = np.array(cl.elements, dtype=np.int64).reshape(-1, n_a).T
        return PureAutomaton(cl.semigroup, circ)

    def compose(x, y):
        (s1, _), (s2, f2) = x, y
        return tuple(s2[i] for i in s1), tuple(f2[i] for i in s1)

    gens = [(tuple(c), tuple(s)) for c, s in zip(gens_circ, gens_star)]
    cl = closure(gens, compose)
    circ = np.array([e[0] for e in cl.elements], dtype=np.int64).reshape(-1, n_a).T
    star = np.array([e[1] for e in cl.elements], dtype=np.int64).reshape(-1, n_a).T
    return PureAutomaton(cl.semigroup, circ, star, n_b)


# --- linear -----------------------------------------------------------------


def _as_stack(mats, p: int, d: int) -> np.ndarray:
    arr = np.array(mats, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(len(mats) if hasattr(mats, "__len__") else 0, d, d)
    if arr.ndim != 3 or arr.shape[1:] != (d, d):
        raise DimensionError(f"expected a stack of {d}x{d} matrices, got shape {arr.shape}")
    arr = np.mod(arr, p)
    arr.setflags(write=False)
    return arr


class LinearRepresentation:
    """Γ acting on GF(p)^dim by one matrix per element."""

    def __init__(self, p: int, dim: int, gamma: FiniteSemigroup, mats):
        self.field = PrimeField(p)
        self.dim = dim
        self.gamma = gamma
        self.mats = _as_stack(mats, p, dim)
        if self.mats.shape[0] != gamma.order:
            raise DimensionError("one matrix per semigroup element required")

    @property
    def p(self) -> int:
        return self.field.p

    def signatures(self) -> list[bytes]:
        return [m.tobytes() for m in self.mats]

    def is_multiplicative(self) -> bool:
        return check_representation(self).valid

    def __repr__(self) -> str:
        return f"LinearRepresentation(p={self.p}, dim={self.dim}, |Γ|={self.gamma.order})"


class LinearAutomaton:
    """(A, Γ, B) over GF(p) with block upper-triangular matrices."""

    def __init__(self, p: int, dim_a: int, dim_b: int, gamma: FiniteSemigroup, mats):
        self.field = PrimeField(p)
        self.dim_a = dim_a
        self.dim_b = dim_b
        self.gamma = gamma
        self.mats = _as_stack(mats, p, dim_a + dim_b)
        if self.mats.shape[0] != gamma.order:
            raise DimensionError("one matrix per semigroup element required")
        if np.any(self.mats[:, dim_a:, :dim_a]):
            raise DimensionError("block matrices must have a zero lower-left block")

    @classmethod
    def from_blocks(cls, p: int, gamma: FiniteSemigroup, sigma, phi, sigma_p) -> LinearAutomaton:
        sigma = np.asarray(sigma, dtype=np.int64)
        phi = np.asarray(phi, dtype=np.int64)
        sigma_p = np.asarray(sigma_p, dtype=np.int64)
        n = gamma.order
        da = sigma.shape[1] if sigma.ndim == 3 else 0
        db = sigma_p.shape[1] if sigma_p.ndim == 3 else 0
        mats = np.zeros((n, da + db, da + db), dtype=np.int64)
        if da:
            mats[:, :da, :da] = sigma
        if da and db:
            mats[:, :da, da:] = phi
        if db:
            mats[:, da:, da:] = sigma_p
        return cls(p, da, db, gamma, mats)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def dim(self) -> int:
        return self.dim_a + self.dim_b

    @property
    def sigma(self) -> np.ndarray:
        return self.mats[:, : self.dim_a, : self.dim_a]

    @property
    def phi(self) -> np.ndarray:
        return self.mats[:, : self.dim_a, self.dim_a :]

    @property
    def sigma_p(self) -> np.ndarray:
        return self.mats[:, self.dim_a :, self.dim_a :]

    @property
    def is_semi(self) -> bool:
        return self.dim_b == 0

    def circ(self, a, g: int) -> np.ndarray:
        return matmul_mod(np.asarray(a), self.sigma[g], self.p)

    def star(self, a, g: int) -> np.ndarray:
        return matmul_mod(np.asarray(a), self.phi[g], self.p)

    def dot(self, b, g: int) -> np.ndarray:
        return matmul_mod(np.asarray(b), self.sigma_p[g], self.p)

    def signatures(self) -> list[bytes]:
        return [m.tobytes() for m in self.mats]

    def element_of(self, matrix) -> int | None:
        key = np.mod(np.asarray(matrix, dtype=np.int64), self.p).tobytes()
        if not hasattr(self, "_lookup"):
            self._lookup = {}
            for i, s in enumerate(self.signatures()):
                self._lookup.setdefault(s, i)
        return self._lookup.get(key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearAutomaton):
            return NotImplemented
        return (
            self.p == other.p
            and self.dim_a == other.dim_a
            and self.dim_b == other.dim_b
            and self.gamma == other.gamma
            and np.array_equal(self.mats, other.mats)
        )

    def __repr__(self) -> str:
        return f"LinearAutomaton(p={self.p}, dimA={self.dim_a}, dimB={self.dim_b}, |Γ|={self.gamma.order})"


def _block_violations(mats, table, da, p, sample) -> tuple[list[tuple], int, bool]:
    n = table.shape[0]
    g1, g2, sampled = _pairs(n, sample)
    lhs = mats[table[g1, g2]]
    rhs = matmul_mod(mats[g1], mats[g2], p)
    bad = lhs != rhs
    failures = []
    for k in np.nonzero(bad.any(axis=(1, 2)))[0]:
        b = bad[k]
        axes = []
        if b[:da, :da].any():
            axes.append(1)
        if b[:da, da:].any():
            axes.append(2)
        if b[da:, da:].any():
            axes.append(3)
        for ax in axes:
            failures.append((ax, int(g1[k]), int(g2[k])))
    return sorted(failures), len(g1), sampled


def check_linear_axioms(a: LinearAutomaton, sample: bool | None = None) -> AxiomReport:
    """rep(γ1γ2) = rep(γ1)·rep(γ2) blockwise.

    Failures are ``(axiom, γ1, γ2)``: axiom 1 is the σ block, axiom 2 the φ
    block (σ1φ2 + φ1σ2'), axiom 3 the σ' block.
    """
    failures, checked, sampled = _block_violations(a.mats, a.gamma.table, a.dim_a, a.p, sample)
    return AxiomReport(not failures, failures, checked, sampled)


def check_linear_axioms_pointwise(a: LinearAutomaton) -> AxiomReport:
    """The three axioms evaluated on every vector and pair; slow reference check."""
    p, t = a.p, a.gamma.table
    av = vector_array(p, a.dim_a)
    bv = vector_array(p, a.dim_b)
    failures = []
    n = a.gamma.order
    for g1 in range(n):
        for g2 in range(n):
            g = int(t[g1, g2])
            a1 = matmul_mod(av, a.sigma[g1], p)
            if not np.array_equal(matmul_mod(av, a.sigma[g], p), matmul_mod(a1, a.sigma[g2], p)):
                failures.append((1, g1, g2))
            lhs = matmul_mod(av, a.phi[g], p)
            rhs = (matmul_mod(a1, a.phi[g2], p) + matmul_mod(matmul_mod(av, a.phi[g1], p), a.sigma_p[g2], p)) % p
            if not np.array_equal(lhs, rhs):
                failures.append((2, g1, g2))
            b1 = matmul_mod(bv, a.sigma_p[g1], p)
            if not np.array_equal(matmul_mod(bv, a.sigma_p[g], p), matmul_mod(b1, a.sigma_p[g2], p)):
                failures.append((3, g1, g2))
    return AxiomReport(not failures, failures, n * n * (len(av) + len(bv)), False)


def check_representation(r: LinearRepresentation, sample: bool | None = None) -> AxiomReport:
    failures, checked, sampled = _block_violations(r.mats, r.gamma.table, r.dim, r.p, sample)
    return AxiomReport(not failures, [(g1, g2) for _, g1, g2 in failures], checked, sampled)


def _encode_stack(mats: np.ndarray, p: int) -> list[bytes]:
    return [m.tobytes() for m in mats]


def table_from_matrices(mats: np.ndarray, p: int) -> np.ndarray:
    """Cayley table of a multiplicatively closed stack of distinct matrices."""
    mats = np.asarray(mats, dtype=np.int64)
    n = mats.shape[0]
    check_cap("matrix semigroup Cayley table", n, "table")
    index = {s: i for i, s in enumerate(_encode_stack(mats, p))}
    if len(index) != n:
        raise SemigroupError("matrices are not distinct")
    table = np.zeros((n, n), dtype=np.int64)
    for x in range(n):
        prods = matmul_mod(mats[x][None], mats, p)
        try:
            table[x] = [index[m.tobytes()] for m in prods]
        except KeyError:
            raise SemigroupError("matrix set is not closed under multiplication") from None
    return table


def matrix_closure(gens, p: int, cap: int | None = None):
    """Closure of square matrices; returns (semigroup, matrix stack, words)."""
    gens = [np.mod(np.asarray(g, dtype=np.int64), p) for g in gens]
    d = gens[0].shape[0] if gens else 0
    for g in gens:
        g.setflags(write=False)
    cl = closure(gens, lambda x, y: matmul_mod(x, y, p), key=lambda m: m.tobytes(), cap=cap)
    mats = np.array(cl.elements, dtype=np.int64).reshape(-1, d, d)
    return cl.semigroup, mats, cl.words


def representation_from_generators(p: int, gens) -> LinearRepresentation:
    gens = [np.asarray(g) for g in gens]
    s, mats, _ = matrix_closure(gens, p)
    return LinearRepresentation(p, mats.shape[1], s, mats)


def linear_from_generators(p: int, dim_a: int, dim_b: int, gens) -> LinearAutomaton:
    s, mats, _ = matrix_closure(gens, p)
    return LinearAutomaton(p, dim_a, dim_b, s, mats)


def linear_from_matrices(p: int, dim_a: int, dim_b: int, mats) -> LinearAutomaton:
    """Automaton whose Γ is exactly the given closed set of distinct block matrices."""
    mats = np.mod(np.asarray(mats, dtype=np.int64), p)
    s = FiniteSemigroup(table_from_matrices(mats, p), check=False).with_marks()
    return LinearAutomaton(p, dim_a, dim_b, s, mats)


def universal_linear(p: int, dim_a: int, dim_b: int) -> LinearAutomaton:
    """(A, End(A, B), B): every block upper-triangular matrix.

    Elements are numbered by the base-p code of the free entries read as σ, φ,
    σ' in row-major order, most significant first.
    """
    n_free = dim_a * dim_a + dim_a * dim_b + dim_b * dim_b
    PrimeField(p)
    size = p**n_free
    check_cap("universal linear automaton", size, "closure")
    d = dim_a + dim_b
    free = np.zeros((d, d), dtype=bool)
    free[:dim_a, :] = True
    free[dim_a:, dim_a:] = True
    digits = np.array(list(itertools.product(range(p), repeat=n_free)), dtype=np.int64).reshape(size, n_free)
    mats = np.zeros((size, d, d), dtype=np.int64)
    # σ, φ, σ' blocks in that order
    pos = [(i, j) for i in range(dim_a) for j in range(dim_a)]
    pos += [(i, dim_a + j) for i in range(dim_a) for j in range(dim_b)]
    pos += [(dim_a + i, dim_a + j) for i in range(dim_b) for j in range(dim_b)]
    for k, (i, j) in enumerate(pos):
        mats[:, i, j] = digits[:, k]
    return linear_from_matrices(p, dim_a, dim_b, mats)


def direct_sum_automata(l1: LinearAutomaton, l2: LinearAutomaton) -> LinearAutomaton:
    """Parallel connection over Γ1 × Γ2 on A1⊕A2, B1⊕B2."""
    from .semigroups import direct_product

    if l1.p != l2.p:
        raise DimensionError("field mismatch")
    gamma = direct_product(l1.gamma, l2.gamma)
    a1, b1, a2, b2 = l1.dim_a, l1.dim_b, l2.dim_a, l2.dim_b
    d = a1 + a2 + b1 + b2
    n2 = l2.gamma.order
    mats = np.zeros((gamma.order, d, d), dtype=np.int64)
    ia = list(range(a1)) + list(range(a1 + a2, a1 + a2 + b1))
    ib = list(range(a1, a1 + a2)) + list(range(a1 + a2 + b1, d))
    for x in range(gamma.order):
        mats[x][np.ix_(ia, ia)] = l1.mats[x // n2]
        mats[x][np.ix_(ib, ib)] = l2.mats[x % n2]
    return LinearAutomaton(l1.p, a1 + a2, b1 + b2, gamma, mats)


# --- faithfulness ------------------------------------------------------------


def faithful_with_map(a):
    """Quotient of Γ by the action kernel; returns (automaton, element -> class index)."""
    cong = faithful_quotient_congruence(a.gamma, a.signatures())
    q = cong.quotient(a.gamma)
    reps = [c[0] for c in cong.classes]
    cls = cong.class_of()
    mapping = [cls[x] for x in range(a.gamma.order)]
    if isinstance(a, PureAutomaton):
        star = None if a.star is None else a.star[:, reps]
        return PureAutomaton(q, a.circ[:, reps], star, a.n_b), mapping
    if isinstance(a, LinearAutomaton):
        return LinearAutomaton(a.p, a.dim_a, a.dim_b, q, a.mats[reps]), mapping
    if isinstance(a, LinearRepresentation):
        return LinearRepresentation(a.p, a.dim, q, a.mats[reps]), mapping
    raise TypeError(f"cannot take the faithful quotient of {type(a).__name__}")


def faithful(a):
    return faithful_with_map(a)[0]


def is_faithful(a) -> bool:
    sig = a.signatures()
    return len(set(sig)) == len(sig)


def automaton_as_representation(a: LinearAutomaton) -> LinearRepresentation:
    """The block matrices themselves acting on A⊕B."""
    return LinearRepresentation(a.p, a.dim, a.gamma, a.mats)


def representation_as_automaton(r: LinearRepresentation) -> LinearAutomaton:
    """A representation read as a linear semi-automaton (B = 0)."""
    return LinearAutomaton(r.p, r.dim, 0, r.gamma, r.mats)


def output_representation(a: LinearAutomaton) -> LinearRepresentation:
    return LinearRepresentation(a.p, a.dim_b, a.gamma, a.sigma_p)


def state_representation(a: LinearAutomaton) -> LinearRepresentation:
    return LinearRepresentation(a.p, a.dim_a, a.gamma, a.sigma)


def group_representation(g: FiniteSemigroup, p: int, images: dict[int, np.ndarray]) -> LinearRepresentation:
    """Extend matrices on generators of a group (right actions) to every element."""
    from .semigroups import subgroup_generated

    gens = sorted(images)
    elems = {g.find_identity(): np.eye(next(iter(images.values())).shape[0], dtype=np.int64)}
    frontier = list(elems)
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = int(g.table[x, s])
                m = matmul_mod(elems[x], np.asarray(images[s]), p)
                if y in elems:
                    if not np.array_equal(elems[y], m):
                        raise SemigroupError("generator images do not define a homomorphism")
                else:
                    elems[y] = m
                    nxt.append(y)
        frontier = nxt
    if len(elems) != g.order or set(subgroup_generated(g, gens)) != set(range(g.order)):
        raise SemigroupError("images must be given on a generating set")
    r = LinearRepresentation(p, elems[gens[0]].shape[0], g, [elems[x] for x in range(g.order)])
    if not check_representation(r).valid:
        raise SemigroupError("generator images do not define a homomorphism")
    return r
