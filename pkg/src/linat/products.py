"""Cascade connections, wreath products and triangular products of automata."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .automata import (
    LinearAutomaton,
    LinearRepresentation,
    PureAutomaton,
    faithful,
    linear_from_matrices,
    output_representation,
    state_representation,
)
from .config import check_cap
from .gfla import FieldMismatchError, matmul_mod, vector_array
from .semigroups import FiniteSemigroup, wreath_decode, wreath_encode, wreath_semigroup


class CascadeError(ValueError):
    def __init__(self, message: str, instance: tuple | None = None):
        super().__init__(message)
        self.instance = instance


@dataclass
class CascadeTriple:
    """(Γ, α, β): ``alpha[γ, a]`` ∈ Γ1 for a state a of the driving automaton, ``beta[γ]`` ∈ Γ2."""

    gamma: FiniteSemigroup
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.int64).reshape(self.gamma.order, -1)
        self.beta = np.asarray(self.beta, dtype=np.int64).reshape(self.gamma.order)


def cascade_failures(t: CascadeTriple, g1: FiniteSemigroup, act2: np.ndarray, g2: FiniteSemigroup, limit: int = 1) -> list[tuple]:
    """Violations of β(γγ') = β(γ)β(γ') and α(γγ', a) = α(γ, a)·α(γ', a∘β(γ)).

    ``act2[a, s]`` is the action of Γ2 on the driving carrier.  Failures are
    ``("beta", γ, γ')`` or ``("alpha", γ, γ', a)``.
    """
    tt = t.gamma.table
    n = t.gamma.order
    out: list[tuple] = []
    prod_beta = g2.table[t.beta[:, None], t.beta[None, :]]
    for x, y in zip(*np.nonzero(t.beta[tt] != prod_beta)):
        out.append(("beta", int(x), int(y)))
        if len(out) >= limit:
            return out
    k = act2.shape[0]
    states = np.arange(k)
    for x in range(n):
        moved = act2[:, t.beta[x]]  # a∘β(γ)
        lhs = t.alpha[tt[x]]  # (n, k)
        rhs = g1.table[t.alpha[x][None, :], t.alpha[:, moved]]
        for y, a in zip(*np.nonzero(lhs != rhs)):
            out.append(("alpha", x, int(y), int(states[a])))
            if len(out) >= limit:
                return out
    return out


def check_cascade_triple(t: CascadeTriple, a1, a2: PureAutomaton) -> None:
    if t.alpha.shape[1] != a2.n_a:
        raise CascadeError("alpha must be defined on every driving state")
    bad = cascade_failures(t, a1.gamma, a2.circ, a2.gamma)
    if bad:
        raise CascadeError(f"cascade condition violated at {bad[0]}", bad[0])


def cascade_pure(a1: PureAutomaton, a2: PureAutomaton, t: CascadeTriple) -> PureAutomaton:
    """(a1, a2)∘γ = (a1∘α(γ, a2), a2∘β(γ)); states indexed a1*|A2| + a2."""
    check_cascade_triple(t, a1, a2)
    n1, n2 = a1.n_a, a2.n_a
    s1 = np.repeat(np.arange(n1), n2)
    s2 = np.tile(np.arange(n2), n1)
    al = t.alpha.T[s2]  # (states, n): α(γ, a2)
    be = t.beta[None, :]
    circ = a1.circ[s1[:, None], al] * n2 + a2.circ[s2[:, None], be]
    star = None
    n_b = 0
    if a1.star is not None and a2.star is not None:
        star = a1.star[s1[:, None], al] * a2.n_b + a2.star[s2[:, None], be]
        n_b = a1.n_b * a2.n_b
    return PureAutomaton(t.gamma, circ, star, n_b if star is not None else None)


def wreath_pure(a1: PureAutomaton, a2: PureAutomaton) -> tuple[PureAutomaton, CascadeTriple]:
    """(A1 × A2, Γ1 wr Γ2, B1 × B2) with its canonical triple α((f, s), a) = f(a), β(f, s) = s."""
    g = wreath_semigroup(a1.gamma, a2.circ, a2.gamma)
    k, n1, n2 = a2.n_a, a1.gamma.order, a2.gamma.order
    alpha = np.zeros((g.order, k), dtype=np.int64)
    beta = np.zeros(g.order, dtype=np.int64)
    for x in range(g.order):
        f, s = wreath_decode(n1, k, n2, x)
        alpha[x] = f
        beta[x] = s
    t = CascadeTriple(g, alpha, beta)
    return cascade_pure(a1, a2, t), t


@dataclass
class EmbeddingWitness:
    """Element map Γ → Γ' and carrier maps under which ``source`` sits inside ``target``.

    For pure automata ``state_map``/``output_map`` are index lists; for linear
    ones ``state_map`` is a single matrix sending source rows (A then B) to
    target rows, block diagonal with respect to the A/B split.
    """

    source: object
    target: object
    element_map: list[int]
    state_map: object = None
    output_map: object = None
    verified: bool = False
    failures: list[tuple] = field(default_factory=list)


def verify_embedding(w: EmbeddingWitness, require_bijective: bool = False) -> bool:
    src, tgt = w.source, w.target
    phi = np.asarray(w.element_map, dtype=np.int64)
    fails: list[tuple] = []
    if phi.shape != (src.gamma.order,) or (phi.size and (phi.min() < 0 or phi.max() >= tgt.gamma.order)):
        w.failures = [("element_map", "shape")]
        w.verified = False
        return False
    st, tt = src.gamma.table, tgt.gamma.table
    bad = np.argwhere(phi[st] != tt[phi[:, None], phi[None, :]])
    fails += [("homomorphism", int(x), int(y)) for x, y in bad[:5]]
    sig = src.signatures()
    seen: dict[int, bytes] = {}
    for x, im in enumerate(phi.tolist()):
        if im in seen and seen[im] != sig[x]:
            fails.append(("kernel", x, im))
            break
        seen.setdefault(im, sig[x])
    if require_bijective and len(set(phi.tolist())) != tgt.gamma.order:
        fails.append(("surjective", len(set(phi.tolist())), tgt.gamma.order))
    if isinstance(src, PureAutomaton):
        sm = np.asarray(w.state_map if w.state_map is not None else range(src.n_a), dtype=np.int64)
        if len(set(sm.tolist())) != src.n_a:
            fails.append(("state_map", "not injective"))
        else:
            bad = np.argwhere(sm[src.circ] != tgt.circ[sm[:, None], phi[None, :]])
            fails += [("circ", int(a), int(g)) for a, g in bad[:5]]
        if src.star is not None:
            om = np.asarray(w.output_map if w.output_map is not None else range(src.n_b), dtype=np.int64)
            bad = np.argwhere(om[src.star] != tgt.star[sm[:, None], phi[None, :]])
            fails += [("star", int(a), int(g)) for a, g in bad[:5]]
    else:
        from .gfla import rank

        e = np.asarray(w.state_map if w.state_map is not None else np.eye(src.mats.shape[1], dtype=np.int64))
        p = src.p
        if e.shape != (src.mats.shape[1], tgt.mats.shape[1]):
            fails.append(("state_map", "shape"))
        else:
            from .gfla import FieldMatrix

            if e.shape[0] and rank(FieldMatrix(p, e)) != e.shape[0]:
                fails.append(("state_map", "not injective"))
            if isinstance(src, LinearAutomaton) and (np.any(e[: src.dim_a, tgt.dim_a :]) or np.any(e[src.dim_a :, : tgt.dim_a])):
                fails.append(("state_map", "mixes A and B"))
            lhs = matmul_mod(src.mats, e, p)
            rhs = matmul_mod(e[None], tgt.mats[phi], p)
            for g in np.nonzero((lhs != rhs).any(axis=(1, 2)))[0][:5]:
                fails.append(("action", int(g)))
    w.failures = fails
    w.verified = not fails
    return w.verified


def embed_cascade_in_wreath(c: PureAutomaton, t: CascadeTriple, a1: PureAutomaton, a2: PureAutomaton) -> EmbeddingWitness:
    """γ ↦ (a ↦ α(γ, a), β(γ)) into wreath_pure(a1, a2), identity carrier maps."""
    w, _ = wreath_pure(a1, a2)
    n1, n2 = a1.gamma.order, a2.gamma.order
    emap = [wreath_encode(n1, t.alpha[g].tolist(), n2, int(t.beta[g])) for g in range(c.gamma.order)]
    wit = EmbeddingWitness(c, w, emap, list(range(c.n_a)), None if c.star is None else list(range(c.n_b)))
    verify_embedding(wit)
    return wit


# --- linear products ----------------------------------------------------------


def _hom_stack(p: int, rows: int, cols: int) -> np.ndarray:
    """All rows×cols matrices in base-p code order (first entry most significant)."""
    check_cap("Hom enumeration", p ** (rows * cols), "closure")
    if rows * cols == 0:
        return np.zeros((1, rows, cols), dtype=np.int64)
    return vector_array(p, rows * cols).reshape(-1, rows, cols)


def _tri_mats(m1: np.ndarray, m2: np.ndarray, p: int) -> np.ndarray:
    n1, d1 = m1.shape[0], m1.shape[1]
    n2, d2 = m2.shape[0], m2.shape[1]
    homs = _hom_stack(p, d1, d2)
    nh = homs.shape[0]
    size = n1 * n2 * nh
    check_cap("triangular product", size, "table")
    out = np.zeros((size, d1 + d2, d1 + d2), dtype=np.int64)
    idx = 0
    for i1 in range(n1):
        for i2 in range(n2):
            out[idx : idx + nh, :d1, :d1] = m1[i1]
            out[idx : idx + nh, d1:, d1:] = m2[i2]
            out[idx : idx + nh, :d1, d1:] = homs
            idx += nh
    return out


def _require_same_field(*objs) -> int:
    ps = {o.p for o in objs}
    if len(ps) != 1:
        raise FieldMismatchError(f"fields differ: {sorted(ps)}")
    return ps.pop()


def tri_reps(r1: LinearRepresentation, r2: LinearRepresentation) -> LinearRepresentation:
    """All [[γ1, φ], [0, γ2]] over faithful images of Γ1, Γ2 and φ ∈ Hom(A, B).

    Element (i1, i2, φ) has index ``(i1*|Γ2| + i2) * p^(d1 d2) + code(φ)``.
    The second summand is the invariant subspace.
    """
    p = _require_same_field(r1, r2)
    f1, f2 = faithful(r1), faithful(r2)
    mats = _tri_mats(f1.mats, f2.mats, p)
    a = linear_from_matrices(p, mats.shape[1], 0, mats)
    return LinearRepresentation(p, a.dim_a, a.gamma, a.mats)


def tri_automata(l1: LinearAutomaton, l2: LinearAutomaton) -> LinearAutomaton:
    """Triangular product on (A1⊕A2, Γ, B1⊕B2), coordinates ordered A1, A2, B1, B2.

    Γ is every 4×4 block matrix whose A-part lies in tri_reps of the state
    representations, whose B-part lies in tri_reps of the output
    representations, and whose Hom(A1⊕A2, B1⊕B2) block is arbitrary.
    """
    p = _require_same_field(l1, l2)
    ra = tri_reps(state_representation(l1), state_representation(l2))
    rb = tri_reps(output_representation(l1), output_representation(l2))
    mats = _tri_mats(ra.mats, rb.mats, p)
    return linear_from_matrices(p, ra.dim, rb.dim, mats)


def _tensor_index(dim_a: int, dim_b: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row index of basis vector (i, x) in (A⊗KX) ⊕ (B⊗KX) for i over A then B."""
    i = np.arange(dim_a + dim_b)
    base = np.where(i < dim_a, i * k, dim_a * k + (i - dim_a) * k)
    return base, np.arange(k)


def _monomial_blocks(mats: np.ndarray, dim_a: int, dim_b: int, chooser: np.ndarray, dest: np.ndarray) -> np.ndarray:
    """Matrices sending (i, x) to row i of mats[chooser[g, x]] placed at x' = dest[g, x]."""
    n, k = chooser.shape
    d = dim_a + dim_b
    base, _ = _tensor_index(dim_a, dim_b, k)
    out = np.zeros((n, d * k, d * k), dtype=np.int64)
    rows = base[:, None] + np.arange(k)[None, :]  # (d, k)
    for g in range(n):
        for x in range(k):
            blk = mats[chooser[g, x]]  # (d, d)
            cols = base + dest[g, x]
            out[g][np.ix_(rows[:, x], cols)] = blk
    return out


def wreath_linear_pure(l: LinearAutomaton, psi: PureAutomaton) -> LinearAutomaton:
    """(A⊗KX, Γ wr Σ, B⊗KX); basis a_i⊗x has index i*|X| + x within each sort."""
    _require_semi(psi)
    k = psi.n_a
    g = wreath_semigroup(l.gamma, psi.circ, psi.gamma)
    check_cap("linear wreath product", g.order, "table")
    n1, n2 = l.gamma.order, psi.gamma.order
    chooser = np.zeros((g.order, k), dtype=np.int64)
    dest = np.zeros((g.order, k), dtype=np.int64)
    for x in range(g.order):
        f, s = wreath_decode(n1, k, n2, x)
        chooser[x] = f
        dest[x] = psi.circ[:, s]
    mats = _monomial_blocks(l.mats, l.dim_a, l.dim_b, chooser, dest)
    return LinearAutomaton(l.p, l.dim_a * k, l.dim_b * k, g, mats)


def _require_semi(psi: PureAutomaton) -> None:
    if psi.star is not None:
        raise CascadeError("the pure factor must be a semi-automaton")


def cascade_linear_pure(l: LinearAutomaton, psi: PureAutomaton, t: CascadeTriple) -> LinearAutomaton:
    """(a⊗x)∘γ = (a∘α(x, γ)) ⊗ (x∘β(γ)) with α(x, γ) stored as ``t.alpha[γ, x]``."""
    _require_semi(psi)
    if t.alpha.shape[1] != psi.n_a:
        raise CascadeError("alpha must be defined on every point of X")
    bad = cascade_failures(t, l.gamma, psi.circ, psi.gamma)
    if bad:
        raise CascadeError(f"cascade condition violated at {bad[0]}", bad[0])
    dest = psi.circ[:, t.beta].T  # (n, k)
    mats = _monomial_blocks(l.mats, l.dim_a, l.dim_b, t.alpha, dest)
    return LinearAutomaton(l.p, l.dim_a * psi.n_a, l.dim_b * psi.n_a, t.gamma, mats)


def wreath_triple_linear(l: LinearAutomaton, psi: PureAutomaton) -> CascadeTriple:
    k = psi.n_a
    g = wreath_semigroup(l.gamma, psi.circ, psi.gamma)
    n1, n2 = l.gamma.order, psi.gamma.order
    alpha = np.zeros((g.order, k), dtype=np.int64)
    beta = np.zeros(g.order, dtype=np.int64)
    for x in range(g.order):
        f, s = wreath_decode(n1, k, n2, x)
        alpha[x] = f
        beta[x] = s
    return CascadeTriple(g, alpha, beta)


def embed_linear_cascade(c: LinearAutomaton, t: CascadeTriple, l: LinearAutomaton, psi: PureAutomaton) -> EmbeddingWitness:
    w = wreath_linear_pure(l, psi)
    n1, n2 = l.gamma.order, psi.gamma.order
    emap = [wreath_encode(n1, t.alpha[g].tolist(), n2, int(t.beta[g])) for g in range(c.gamma.order)]
    wit = EmbeddingWitness(c, w, emap)
    verify_embedding(wit)
    return wit


# --- mixed laws ------------------------------------------------------------------


@dataclass
class LawResult:
    law: int
    holds: bool
    kind: str  # "isomorphism", "embedding", "divisor"
    detail: str
    witness: object = None


def _lookup_map(src: LinearAutomaton, tgt: LinearAutomaton) -> list[int] | None:
    out = []
    for m in src.mats:
        j = tgt.element_of(m)
        if j is None:
            return None
        out.append(j)
    return out


def law1_witness(lam: LinearAutomaton, psi1: PureAutomaton, psi2: PureAutomaton) -> EmbeddingWitness:
    """(Λ wr Ψ1) wr Ψ2 ≅ Λ wr (Ψ1 wr Ψ2) with identity carrier map.

    Element (x2 ↦ (f_x2, s_x2), s2) goes to ((x1, x2) ↦ f_x2(x1), (x2 ↦ s_x2, s2)).
    """
    lhs = wreath_linear_pure(wreath_linear_pure(lam, psi1), psi2)
    inner, _ = wreath_pure(psi1, psi2)
    rhs = wreath_linear_pure(lam, inner)
    n, k1, k2 = lam.gamma.order, psi1.n_a, psi2.n_a
    s1, s2 = psi1.gamma.order, psi2.gamma.order
    mid = n**k1 * s1  # order of Γ wr Σ1
    emap = []
    for x in range(lhs.gamma.order):
        big_f, t2 = wreath_decode(mid, k2, s2, x)
        g = np.zeros((k1, k2), dtype=np.int64)
        h = []
        for x2, code in enumerate(big_f):
            f, t1 = wreath_decode(n, k1, s1, code)
            g[:, x2] = f
            h.append(t1)
        inner_index = wreath_encode(s1, h, s2, t2)
        emap.append(wreath_encode(n, g.ravel().tolist(), inner.gamma.order, inner_index))
    wit = EmbeddingWitness(lhs, rhs, emap)
    verify_embedding(wit, require_bijective=True)
    return wit


def law3_witness(l1: LinearAutomaton, l2: LinearAutomaton, psi: PureAutomaton) -> EmbeddingWitness:
    """(Λ1 ∇ Λ2) wr Ψ ⊂ (Λ1 wr Ψ) ∇ (Λ2 wr Ψ): both sides share the carrier, elements matched by matrix."""
    lhs = wreath_linear_pure(faithful(tri_automata(l1, l2)), psi)
    rhs = tri_automata(wreath_linear_pure(l1, psi), wreath_linear_pure(l2, psi))
    emap = _lookup_map(lhs, rhs)
    wit = EmbeddingWitness(lhs, rhs, emap or [0] * lhs.gamma.order)
    if emap is None:
        wit.failures = [("action", "LHS matrix missing from RHS")]
        return wit
    verify_embedding(wit)
    return wit


def law2_witness(l1: LinearAutomaton, l2: LinearAutomaton, psi: PureAutomaton) -> EmbeddingWitness:
    """Λ1 ∇ (Λ2 wr Ψ) ⊂ (Λ1 ∇ Λ2) wr Ψ by the diagonal map a1 ↦ a1⊗Σx, a2⊗x ↦ a2⊗x.

    The diagonal vector Σx is fixed only when Ψ permutes X, and the element
    map is multiplicative only when Λ2 acts invertibly; otherwise the witness
    comes back unverified with the failing elements recorded.
    """
    lhs = tri_automata(l1, wreath_linear_pure(l2, psi))
    rhs = wreath_linear_pure(faithful(tri_automata(l1, l2)), psi)
    k, p = psi.n_a, lhs.p
    e = np.zeros((lhs.dim, rhs.dim), dtype=np.int64)
    row, col = 0, 0
    for n1, n2 in ((l1.dim_a, l2.dim_a), (l1.dim_b, l2.dim_b)):
        for i in range(n1):
            e[row + i, col + i * k : col + (i + 1) * k] = 1
        for j in range(n2 * k):
            e[row + n1 + j, col + n1 * k + j] = 1
        row += n1 + n2 * k
        col += (n1 + n2) * k
    index: dict[bytes, int] = {}
    for h, m in enumerate(matmul_mod(e[None], rhs.mats, p)):
        index.setdefault(m.tobytes(), h)
    emap = [index.get(m.tobytes()) for m in matmul_mod(lhs.mats, e[None], p)]
    missing = [g for g, h in enumerate(emap) if h is None]
    wit = EmbeddingWitness(lhs, rhs, [0 if h is None else h for h in emap], e)
    if missing:
        wit.failures = [("action", g) for g in missing[:5]]
        return wit
    verify_embedding(wit)
    return wit


def law2_check(l1: LinearAutomaton, l2: LinearAutomaton, psi: PureAutomaton, budget: int | None = None):
    """Λ1 ∇ (Λ2 wr Ψ) | (Λ1 ∇ Λ2) wr Ψ, decided by the divisor oracle."""
    from .divisor import divisor_oracle

    lhs = tri_automata(l1, wreath_linear_pure(l2, psi))
    rhs = wreath_linear_pure(faithful(tri_automata(l1, l2)), psi)
    return lhs, rhs, divisor_oracle(lhs, rhs, budget=budget)


def check_mixed_laws(l1: LinearAutomaton, l2: LinearAutomaton, psi1: PureAutomaton, psi2: PureAutomaton, budget: int | None = None) -> list[LawResult]:
    out = []
    w1 = law1_witness(l1, psi1, psi2)
    out.append(LawResult(1, w1.verified, "isomorphism", "identity carrier map, bijective element map", w1))
    w2 = law2_witness(l1, l2, psi1)
    out.append(LawResult(2, w2.verified, "embedding", "diagonal carrier map, matrix lookup", w2))
    w3 = law3_witness(l1, l2, psi1)
    out.append(LawResult(3, w3.verified, "embedding", "identity carrier map, matrix lookup", w3))
    return out


# --- pure semigroup helpers ---------------------------------------------------


def parallel_triple(g1: FiniteSemigroup, g2: FiniteSemigroup, k: int) -> CascadeTriple:
    """Γ1 × Γ2 driving both factors independently: α((x, y), a) = x, β(x, y) = y."""
    from .semigroups import direct_product

    g = direct_product(g1, g2)
    n2 = g2.order
    alpha = np.repeat((np.arange(g.order) // n2)[:, None], k, axis=1)
    beta = np.arange(g.order) % n2
    return CascadeTriple(g, alpha, beta)


def all_maps(n: int, m: int):
    return itertools.product(range(m), repeat=n)
