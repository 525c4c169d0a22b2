"""Decomposition of linear automata into atoms, and operation counting.

Pipeline: composition series of the carrier (triangular split), compression of
each irreducible factor to a completely 0-simple semigroup, passage to the
group of the Rees structure, and the normal-series step for groups.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import config
from .automata import (
    LinearAutomaton,
    PureAutomaton,
    faithful,
    flip_flop_automaton,
    is_faithful,
)
from .config import CapExceeded
from .divisor import FOUND, REFUTED, DivisorWitness, OracleResult, divisor_oracle, verify_witness
from .gfla import (
    DimensionError,
    FieldMatrix,
    Subspace,
    inverse,
    left_nullspace,
    lift_subspace,
    matmul_mod,
    projective_points,
    quotient_matrix,
    rank,
    restrict_matrix,
    rref,
    spin,
)
from .products import _monomial_blocks, wreath_linear_pure, wreath_pure
from .semigroups import (
    FiniteSemigroup,
    adjoin_zero,
    coset_action,
    composition_series,
    is_completely_zero_simple,
    is_simple_group,
    min_ideal_above,
    quotient_group,
    rees_quotient,
    rees_structure,
    subsemigroup,
)

TRI = "TRI"
WR_LINEAR_PURE = "WR_LINEAR_PURE"
WR_PURE = "WR_PURE"
COMPRESS = "COMPRESS"
OPS = (TRI, WR_LINEAR_PURE, WR_PURE, COMPRESS)

LINEAR_SIMPLE_GROUP = "LINEAR_SIMPLE_GROUP"
FLIP_FLOP = "FLIP_FLOP"
PURE_SIMPLE_GROUP = "PURE_SIMPLE_GROUP"
HALT = "HALT"

VERIFIED = "verified"
ORACLE_CONFIRMED = "oracle-confirmed"
UNVERIFIED = "unverified (paper-backed)"
REFUTED_STATUS = "refuted"


class DecompositionError(ValueError):
    pass


class ReducibleError(DecompositionError):
    pass


class DegenerateActionError(DecompositionError):
    pass


class MaschkeError(DecompositionError):
    def __init__(self, p: int, order: int):
        super().__init__(f"characteristic {p} divides the group order {order}; complete reducibility is not guaranteed")
        self.p = p
        self.order = order


class InvariantFailure(AssertionError):
    """An internal consistency check failed."""


# --- modules ------------------------------------------------------------------------


def _carrier(r) -> tuple[int, int, np.ndarray]:
    """(p, dim, matrices) of a representation or a semi-automaton."""
    return r.p, r.dim, np.asarray(r.mats)


def _distinct(mats: np.ndarray) -> list[np.ndarray]:
    seen: dict[bytes, np.ndarray] = {}
    for m in mats:
        seen.setdefault(np.ascontiguousarray(m).tobytes(), m)
    return list(seen.values())


def minimal_invariant(mats, p: int, d: int) -> Subspace:
    """Least (by dimension, then echelon entries) nonzero invariant subspace."""
    if d == 0:
        raise DimensionError("zero-dimensional carrier has no nonzero subspace")
    action = _distinct(np.asarray(mats).reshape(-1, d, d))
    best: Subspace | None = None
    for v in projective_points(p, d):
        w = spin(Subspace(p, d, [v]), action)
        if best is None or w.key() < best.key():
            best = w
    return best


def is_irreducible(r) -> bool:
    """No proper nonzero invariant subspace; spins every projective point."""
    p, d, mats = _carrier(r)
    if d == 0:
        raise DimensionError("irreducibility is undefined in dimension 0")
    action = _distinct(mats)
    for v in projective_points(p, d):
        if spin(Subspace(p, d, [v]), action).dim < d:
            return False
    return True


def _series(mats: np.ndarray, p: int, d: int) -> list[Subspace]:
    chain = [Subspace.zero(p, d)]
    current = chain[0]
    while current.dim < d:
        q = np.array([quotient_matrix(m, current) for m in _distinct(mats)])
        w = minimal_invariant(q, p, d - current.dim)
        current = lift_subspace(w, current)
        chain.append(current)
    return chain


def module_composition_series(r) -> list[Subspace]:
    """0 = V0 < V1 < ... < Vn = carrier, each quotient irreducible."""
    p, d, mats = _carrier(r)
    return _series(mats, p, d)


def _adapted_basis(chain: list[Subspace], p: int, d: int) -> tuple[np.ndarray, list[int]]:
    """Rows: complement of V_{n-1} in V_n first, V_1 last; returns (T, block sizes)."""
    blocks, sizes = [], []
    for i in range(len(chain) - 1, 0, -1):
        lower, upper = chain[i - 1], chain[i]
        red, _ = rref(lower.reduce(upper.basis), p)
        comp = red[np.any(red != 0, axis=1)]
        # complement rows must lie in V_i: reduce() subtracted only V_{i-1} vectors
        blocks.append(comp)
        sizes.append(comp.shape[0])
    t = np.concatenate(blocks) if blocks else np.zeros((0, d), dtype=np.int64)
    return t % p, sizes


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.int64)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def _inverse(t: np.ndarray, p: int) -> np.ndarray:
    if t.shape[0] == 0:
        return t.copy()
    return inverse(FieldMatrix(p, t)).data


def _rep(p: int, gamma: FiniteSemigroup, mats) -> LinearAutomaton:
    mats = np.asarray(mats, dtype=np.int64)
    d = mats.shape[1] if mats.ndim == 3 else 0
    return LinearAutomaton(p, d, 0, gamma, mats.reshape(gamma.order, d, d))


# --- triangular stage -------------------------------------------------------------------


@dataclass
class LinearDecomposition:
    """Factors of the triangular split, A-side (top first) then B-side."""

    source: LinearAutomaton
    series_a: list[Subspace]
    series_b: list[Subspace]
    basis: np.ndarray  # adapted basis of A⊕B, block diagonal
    sizes: list[int]
    sides: list[str]
    raw: list[np.ndarray]  # diagonal blocks over the source semigroup
    factors: list[LinearAutomaton]  # faithful quotients of the raw factors

    @property
    def tri_count(self) -> int:
        return max(len(self.factors) - 1, 0)

    def conjugated(self) -> np.ndarray:
        p = self.source.p
        t = self.basis
        ti = _inverse(t, p)
        return np.array([matmul_mod(matmul_mod(t, m, p), ti, p) for m in self.source.mats]).reshape(
            self.source.gamma.order, t.shape[0], t.shape[0]
        )

    def certificate(self) -> tuple[bool, str]:
        """Basis change makes every element block upper triangular with the factor blocks on the diagonal."""
        p = self.source.p
        t = self.basis
        if t.shape[0] and rank(FieldMatrix(p, t)) != t.shape[0]:
            return False, "adapted basis is singular"
        conj = self.conjugated()
        offs = np.cumsum([0] + self.sizes)
        for i in range(len(self.sizes)):
            lo, hi = offs[i], offs[i + 1]
            if conj[:, lo:hi, :lo].any():
                return False, f"block row {i} has entries below the diagonal"
            if not np.array_equal(conj[:, lo:hi, lo:hi], self.raw[i]):
                return False, f"diagonal block {i} differs from the factor"
        for i, f in enumerate(self.factors):
            if f.dim and not is_irreducible(f):
                return False, f"factor {i} is reducible"
        return True, "block upper triangular in the adapted basis"


def linear_decompose(l: LinearAutomaton) -> LinearDecomposition:
    p = l.p
    sa = _series(l.sigma, p, l.dim_a)
    sb = _series(l.sigma_p, p, l.dim_b)
    ta, sizes_a = _adapted_basis(sa, p, l.dim_a)
    tb, sizes_b = _adapted_basis(sb, p, l.dim_b)
    t = _block_diag(ta, tb)
    sizes = sizes_a + sizes_b
    sides = ["A"] * len(sizes_a) + ["B"] * len(sizes_b)
    dec = LinearDecomposition(l, sa, sb, t, sizes, sides, [], [])
    conj = dec.conjugated()
    offs = np.cumsum([0] + sizes)
    for i in range(len(sizes)):
        blk = conj[:, offs[i] : offs[i + 1], offs[i] : offs[i + 1]].copy()
        dec.raw.append(blk)
        dec.factors.append(faithful(_rep(p, l.gamma, blk)))
    return dec


def first_split(l: LinearAutomaton) -> tuple[LinearAutomaton, LinearAutomaton]:
    """(A, Γ, 0) and (0, Γ, B) as faithful automata."""
    l1 = faithful(LinearAutomaton(l.p, l.dim_a, 0, l.gamma, l.sigma))
    l2 = faithful(LinearAutomaton(l.p, 0, l.dim_b, l.gamma, l.sigma_p))
    return l1, l2


# --- compression --------------------------------------------------------------------


@dataclass
class Compression:
    source: LinearAutomaton
    null: frozenset  # U
    ideal: frozenset  # V
    sigma: FiniteSemigroup  # V/U, zero last
    rep: LinearAutomaton  # (A, Σ)
    claimed: LinearAutomaton  # (A, Σ) without a formally adjoined zero
    adjoined_zero: bool
    witness: DivisorWitness
    check: object


def compress(r: LinearAutomaton) -> Compression:
    """Pass from an irreducible (A, Γ) to (A, V/U) with V/U completely 0-simple."""
    p, d, mats = _carrier(r)
    if d == 0 or not is_irreducible(r):
        raise ReducibleError("compression needs an irreducible representation")
    g = r.gamma
    u = frozenset(x for x in range(g.order) if not mats[x].any())
    if len(u) == g.order:
        raise DegenerateActionError("every element acts as zero")
    v = min_ideal_above(g, u)
    vsub, elems = subsemigroup(g, v)
    pos = {x: i for i, x in enumerate(elems)}
    sigma, mp = rees_quotient(vsub, [pos[x] for x in u])
    smats = np.zeros((sigma.order, d, d), dtype=np.int64)
    for i, x in enumerate(elems):
        smats[mp[i]] = mats[x] if x not in u else 0
    rep = LinearAutomaton(p, d, 0, sigma, smats)
    if not u:
        claimed = LinearAutomaton(p, d, 0, vsub, mats[elems])
        eta = list(range(len(elems)))
    else:
        claimed = rep
        eta = [mp[i] for i in range(len(elems))]
    eye = np.eye(d, dtype=np.int64)
    w = DivisorWitness("linear", list(elems), eta, eye, np.zeros((0, 0), dtype=np.int64), eye, np.zeros((0, 0), dtype=np.int64))
    check = verify_witness(w, claimed, r)
    if not check:
        raise InvariantFailure(f"compression witness failed: {check.locus}")
    if not is_completely_zero_simple(sigma):
        raise InvariantFailure("compressed semigroup is not completely 0-simple")
    if not is_irreducible(rep):
        raise InvariantFailure("compressed representation is reducible")
    return Compression(r, u, v, sigma, rep, claimed, not u, w, check)


# --- lifting to the group -----------------------------------------------------------


@dataclass
class Lift:
    compression: Compression
    rees: object
    group: FiniteSemigroup
    sub: Subspace  # A1 inside A
    group_rep: LinearAutomaton  # (A1, G)
    sub_witness: DivisorWitness
    y_count: int
    flip_flop: PureAutomaton
    host: LinearAutomaton | None
    claim: OracleResult | None
    note: str = ""

    @property
    def status(self) -> str:
        return _oracle_status(self.claim)


def _oracle_status(res: OracleResult | None) -> str:
    if res is None:
        return UNVERIFIED
    if res.verdict == FOUND:
        return ORACLE_CONFIRMED
    if res.verdict == REFUTED:
        return REFUTED_STATUS
    return UNVERIFIED


def lift_group(c: Compression, budget: int | None = None, check: bool = True) -> Lift:
    """Group G of the Rees structure, the G-module A1 = A·e, and the flip-flop on Y."""
    rep = c.rep
    p, d = rep.p, rep.dim
    rs = rees_structure(c.sigma)
    e = rs.idempotent
    a1 = Subspace(p, d, rep.mats[e])
    gmats = np.array([restrict_matrix(rep.mats[x], a1) for x in rs.group_elements]).reshape(rs.group.order, a1.dim, a1.dim)
    if a1.dim and not is_irreducible(_rep(p, rs.group, gmats)):
        inner = minimal_invariant(gmats, p, a1.dim)
        a1 = Subspace(p, d, matmul_mod(inner.basis, a1.basis, p))
        gmats = np.array([restrict_matrix(rep.mats[x], a1) for x in rs.group_elements]).reshape(rs.group.order, a1.dim, a1.dim)
    group_rep = _rep(p, rs.group, gmats)
    eye = np.eye(a1.dim, dtype=np.int64)
    empty = np.zeros((0, 0), dtype=np.int64)
    w = DivisorWitness("linear", list(rs.group_elements), list(range(rs.group.order)), a1.basis.copy(), empty, eye, empty)
    ok = verify_witness(w, group_rep, c.rep)
    if not ok:
        raise InvariantFailure(f"group restriction witness failed: {ok.locus}")
    ny = len(rs.Y)
    ff = flip_flop_automaton(ny)
    host, claim, note = None, None, ""
    if check:
        try:
            n_g = group_rep.gamma.order + (c.claimed.gamma.zero is not None)
            config.check_cap("lift host", n_g**ny * ny, "oracle_host")
            host = lift_host(group_rep, ff, with_zero=c.claimed.gamma.zero is not None)
            claim = divisor_oracle(c.claimed, host, budget)
        except CapExceeded as exc:
            note = str(exc)
    return Lift(c, rs, rs.group, a1, group_rep, w, ny, ff, host, claim, note)


def lift_host(group_rep: LinearAutomaton, ff: PureAutomaton, with_zero: bool) -> LinearAutomaton:
    """(A1, G) wr (Y, Y^r), with a formal zero adjoined to G when Σ has a zero."""
    g = group_rep.gamma
    mats = group_rep.mats
    if with_zero:
        g = adjoin_zero(g)
        mats = np.concatenate([mats, np.zeros((1,) + mats.shape[1:], dtype=np.int64)])
    base = LinearAutomaton(group_rep.p, group_rep.dim_a, 0, g, mats)
    return wreath_linear_pure(base, ff)


# --- normal-series step for groups ----------------------------------------------------------


def complete_decomposition(mats: np.ndarray, inv: list[int], p: int, d: int) -> list[np.ndarray]:
    """Irreducible summands of a completely reducible group module, as ambient bases."""
    if d == 0:
        return []
    w = minimal_invariant(mats, p, d)
    if w.dim == d:
        return [np.eye(d, dtype=np.int64)]
    n = mats.shape[0]
    if n % p == 0:
        raise MaschkeError(p, n)
    sel = np.zeros((d, w.dim), dtype=np.int64)
    sel[w.pivots, np.arange(w.dim)] = 1
    proj = matmul_mod(sel, w.basis, p)
    avg = np.zeros((d, d), dtype=np.int64)
    for i in range(n):
        avg = (avg + matmul_mod(matmul_mod(mats[inv[i]], proj, p), mats[i], p)) % p
    avg = (avg * pow(n, -1, p)) % p
    comp = Subspace(p, d, left_nullspace(avg, p))
    if comp.dim != d - w.dim:
        raise InvariantFailure("averaged projection has the wrong kernel")
    sub = np.array([restrict_matrix(m, comp) for m in mats]).reshape(n, comp.dim, comp.dim)
    rest = complete_decomposition(sub, inv, p, comp.dim)
    return [w.basis.copy()] + [matmul_mod(b, comp.basis, p) for b in rest]


@dataclass
class CliffordSplit:
    source: LinearAutomaton  # (A, G), G a group
    series: list[frozenset]
    subgroup: list[int]  # H, in G indices
    h_group: FiniteSemigroup
    basis: np.ndarray  # T, rows = concatenated summand bases
    summands: list[LinearAutomaton]  # (A_s, H)
    cosets: list[list[int]]
    coset_reps: list[int]
    perm: np.ndarray  # perm[x, g]
    hbar: np.ndarray  # hbar[g, x] as an index into H
    pure: PureAutomaton  # (X, Φ)
    phi_of: list[int]
    embed: np.ndarray  # A -> A⊗KX in T coordinates

    def h_blocks(self) -> np.ndarray:
        p = self.source.p
        t = self.basis
        ti = _inverse(t, p)
        mats = self.source.mats[self.subgroup]
        return np.array([matmul_mod(matmul_mod(t, m, p), ti, p) for m in mats]).reshape(len(self.subgroup), t.shape[0], t.shape[0])

    def verify(self) -> tuple[bool, str]:
        """(A, G) sits inside (⊕ A_s, H) wr (X, Φ) through g -> (hbar_g, perm_g)."""
        src = self.source
        p, d = src.p, src.dim
        g = src.gamma
        k = len(self.cosets)
        blocks = self.h_blocks()
        offs = np.cumsum([0] + [s.dim for s in self.summands])
        mask = np.zeros((d, d), dtype=bool)
        for i in range(len(self.summands)):
            mask[offs[i] : offs[i + 1], offs[i] : offs[i + 1]] = True
            if not np.array_equal(blocks[:, offs[i] : offs[i + 1], offs[i] : offs[i + 1]], self.summands[i].mats):
                return False, f"summand {i} does not match the diagonal block"
        if blocks[:, ~mask].any():
            return False, "H is not block diagonal in the summand basis"
        ht = self.h_group.table
        keys = set()
        for a in range(g.order):
            keys.add((tuple(self.hbar[a].tolist()), tuple(self.perm[:, a].tolist())))
            for b in range(g.order):
                c = int(g.table[a, b])
                if not np.array_equal(self.perm[self.perm[:, a], b], self.perm[:, c]):
                    return False, f"coset action not multiplicative at ({a}, {b})"
                want = ht[self.hbar[a], self.hbar[b][self.perm[:, a]]]
                if not np.array_equal(want, self.hbar[c]):
                    return False, f"cocycle fails at ({a}, {b})"
        if len(keys) != g.order:
            return False, "two group elements share an image"
        if d and rank(FieldMatrix(p, self.embed)) != d:
            return False, "embedding is not injective"
        w = _monomial_blocks(blocks, d, 0, self.hbar, self.perm.T)
        for a in range(g.order):
            if not np.array_equal(matmul_mod(self.embed, w[a], p), matmul_mod(src.mats[a], self.embed, p)):
                return False, f"action mismatch at element {a}"
        return True, f"induced embedding into a wreath over {k} cosets"


def _pure_from_perms(perms: list[tuple[int, ...]]) -> tuple[PureAutomaton, dict[tuple, int]]:
    idx = {q: i for i, q in enumerate(perms)}
    table = [[idx[tuple(b[x] for x in a)] for b in perms] for a in perms]
    phi = FiniteSemigroup(table).with_marks()
    circ = np.array(perms, dtype=np.int64).T.reshape(len(perms[0]), len(perms))
    return PureAutomaton(phi, circ), idx


def clifford_step(r: LinearAutomaton) -> CliffordSplit | None:
    """Split along the last proper term H of the composition series; None when G is simple."""
    g = r.gamma
    if not g.is_group():
        raise DecompositionError("the normal-series step needs a group")
    config.check_cap("group order", g.order, "group_order")
    p, d = r.p, r.dim
    if g.order % p == 0:
        raise MaschkeError(p, g.order)
    series = composition_series(g)
    if len(series) <= 2:
        return None
    h = sorted(series[-2])
    hgrp, _ = subsemigroup(g, h)
    hpos = {x: i for i, x in enumerate(h)}
    ginv = g.inverses()
    hinv = [hpos[int(ginv[x])] for x in h]
    hmats = r.mats[h]
    bases = complete_decomposition(hmats, hinv, p, d)
    t = np.concatenate(bases) % p
    ti = _inverse(t, p)
    conj = np.array([matmul_mod(matmul_mod(t, m, p), ti, p) for m in hmats])
    summands, off = [], 0
    for b in bases:
        k = b.shape[0]
        summands.append(_rep(p, hgrp, conj[:, off : off + k, off : off + k]))
        off += k
    cosets, act = coset_action(g, h)
    reps = [c[0] for c in cosets]
    nx = len(cosets)
    hbar = np.zeros((g.order, nx), dtype=np.int64)
    for a in range(g.order):
        for x in range(nx):
            y = int(act[x, a])
            val = int(g.table[g.table[reps[x], a], ginv[reps[y]]])
            if val not in hpos:
                raise InvariantFailure("coset cocycle left the subgroup")
            hbar[a, x] = hpos[val]
    perms = []
    for a in range(g.order):
        q = tuple(int(v) for v in act[:, a])
        if q not in perms:
            perms.append(q)
    pure, idx = _pure_from_perms(perms)
    phi_of = [idx[tuple(int(v) for v in act[:, a])] for a in range(g.order)]
    embed = np.zeros((d, d * nx), dtype=np.int64)
    for x in range(nx):
        v = matmul_mod(r.mats[int(ginv[reps[x]])], ti, p)  # rows e_i t_x^{-1} T^{-1}
        embed[:, np.arange(d) * nx + x] = v
    return CliffordSplit(r, series, h, hgrp, t, summands, cosets, reps, act, hbar, pure, phi_of, embed)


def composition_factors(g: FiniteSemigroup, series: list[frozenset]) -> list[FiniteSemigroup]:
    """N_i / N_{i+1} for consecutive terms, top factor first."""
    out = []
    for top, bottom in zip(series, series[1:]):
        top_s = sorted(top)
        sub, _ = subsemigroup(g, top_s)
        pos = {x: i for i, x in enumerate(top_s)}
        q, _ = quotient_group(sub, [pos[x] for x in bottom])
        out.append(q)
    return out


def regular_automaton(g: FiniteSemigroup) -> PureAutomaton:
    return PureAutomaton(g, g.table.copy())


# --- atoms --------------------------------------------------------------------------------


def _is_transitive(a: PureAutomaton) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in a.circ[x]:
            y = int(y)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == a.n_a


def atom_kind(x) -> str | None:
    """Kind of atom, or None when ``x`` still decomposes."""
    if isinstance(x, PureAutomaton):
        if not x.is_semi:
            return None
        f = faithful(x)
        if f.n_a >= 2 and f == flip_flop_automaton(f.n_a):
            return FLIP_FLOP
        g = f.gamma
        config.check_cap("group order", g.order, "group_order")
        if g.order > 1 and g.is_group() and is_simple_group(g) and _is_transitive(f):
            return PURE_SIMPLE_GROUP
        return None
    if isinstance(x, LinearAutomaton):
        if x.dim_a and x.dim_b:
            return None
        if x.dim == 0:
            return None
        f = faithful(x)
        g = f.gamma
        config.check_cap("group order", g.order, "group_order")
        if not g.is_group():
            return None
        if g.order > 1 and not is_simple_group(g):
            return None
        if not np.array_equal(f.mats[g.find_identity()], np.eye(f.dim, dtype=np.int64)):
            return None
        return LINEAR_SIMPLE_GROUP if is_irreducible(f) else None
    raise TypeError(f"cannot classify {type(x).__name__}")


def is_atom(x) -> bool:
    return atom_kind(x) is not None


# --- trees --------------------------------------------------------------------------------


@dataclass
class Claim:
    text: str
    status: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"claim": self.text, "status": self.status, "detail": self.detail}


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=np.int64)).tobytes())
        h.update(b"|")
    return h.hexdigest()[:12]


def describe_payload(x) -> str:
    if isinstance(x, PureAutomaton):
        return f"pure |X|={x.n_a} |G|={x.gamma.order} #{_digest(x.circ, x.gamma.table)}"
    if isinstance(x, LinearAutomaton):
        return f"GF({x.p}) dim={x.dim} |G|={x.gamma.order} #{_digest(x.mats, x.gamma.table)}"
    return "abstract"


@dataclass(eq=False)
class Leaf:
    kind: str
    payload: object = None
    label: str = ""
    reason: str = ""

    def __post_init__(self):
        if not self.label and self.payload is not None:
            self.label = describe_payload(self.payload)

    def key(self) -> tuple:
        return ("leaf", self.kind, self.label)

    def to_dict(self) -> dict:
        out = {"atom": self.kind, "label": self.label}
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass(eq=False)
class Node:
    op: str
    children: list
    automaton: object = None
    claims: list[Claim] = field(default_factory=list)

    def key(self) -> tuple:
        return (self.op, tuple(c.key() for c in self.children))

    @property
    def status(self) -> str:
        states = {c.status for c in self.claims}
        for s in (REFUTED_STATUS, UNVERIFIED, ORACLE_CONFIRMED):
            if s in states:
                return s
        return VERIFIED if states else UNVERIFIED

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "status": self.status,
            "claims": [c.to_dict() for c in self.claims],
            "children": [c.to_dict() for c in self.children],
        }


def walk(t):
    yield t
    if isinstance(t, Node):
        for c in t.children:
            yield from walk(c)


@dataclass
class DecompositionTree:
    root: Node | Leaf
    source: object = None

    def leaves(self) -> list[Leaf]:
        return [x for x in walk(self.root) if isinstance(x, Leaf)]

    def nodes(self) -> list[Node]:
        return [x for x in walk(self.root) if isinstance(x, Node)]

    @property
    def partial(self) -> bool:
        return any(x.kind == HALT for x in self.leaves())

    def key(self) -> tuple:
        return self.root.key()

    def to_dict(self) -> dict:
        return self.root.to_dict()

    def render(self) -> str:
        lines: list[str] = []

        def go(t, depth):
            pad = "  " * depth
            if isinstance(t, Leaf):
                extra = f" ({t.reason})" if t.reason else ""
                lines.append(f"{pad}{t.kind} {t.label}{extra}")
                return
            lines.append(f"{pad}{t.op} [{t.status}]")
            for c in t.children:
                go(c, depth + 1)

        go(self.root, 0)
        return "\n".join(lines)


# --- the pipeline ------------------------------------------------------------------------


def _atom_leaf(x) -> Leaf | None:
    kind = atom_kind(x)
    return Leaf(kind, x) if kind else None


def _pure_tree(split: CliffordSplit, budget: int | None) -> Node | Leaf:
    leaf = _atom_leaf(split.pure)
    if leaf is not None:
        return leaf
    factors = composition_factors(split.source.gamma, split.series[:-1])
    # bottom factor first, so the top factor acts last
    parts = [regular_automaton(q) for q in reversed(factors)]
    children = [_atom_leaf(a) or Leaf(HALT, a, reason="composition factor is not simple") for a in parts]
    claim = Claim("pure part divides the wreath of composition factors", UNVERIFIED)
    try:
        host = parts[0]
        for a in parts[1:]:
            config.check_cap("pure wreath host", host.gamma.order ** a.n_a * a.gamma.order, "oracle_host")
            host, _ = wreath_pure(host, a)
        res = divisor_oracle(split.pure, host, budget)
        claim = Claim(claim.text, _oracle_status(res), res.reason or f"{res.steps} steps")
    except CapExceeded as exc:
        claim.detail = str(exc)
    return Node(WR_PURE, children, split.pure, [claim])


def _group_tree(r: LinearAutomaton, budget: int | None) -> Node | Leaf:
    leaf = _atom_leaf(r)
    if leaf is not None:
        return leaf
    try:
        split = clifford_step(r)
    except MaschkeError as exc:
        return Leaf(HALT, r, reason=str(exc))
    if split is None:
        return Leaf(HALT, r, reason="simple group acting reducibly")
    ok, why = split.verify()
    status = VERIFIED if ok else REFUTED_STATUS
    leaves = [_atom_leaf(s) or Leaf(HALT, s, reason="summand is not an atom") for s in split.summands]
    if len(leaves) == 1:
        lin = leaves[0]
    else:
        lin = Node(TRI, leaves, _rep(r.p, split.h_group, r.mats[split.subgroup]), [Claim("restriction to H splits into irreducible summands", status, why)])
    pure = _pure_tree(split, budget)
    return Node(WR_LINEAR_PURE, [lin, pure], r, [Claim("embedding into the wreath over cosets of H", status, why)])


def _factor_tree(r: LinearAutomaton, budget: int | None, check: bool) -> Node | Leaf:
    leaf = _atom_leaf(r)
    if leaf is not None:
        return leaf
    try:
        c = compress(r)
    except DegenerateActionError as exc:
        return Leaf(HALT, r, reason=str(exc))
    lift = lift_group(c, budget, check=check)
    inner = _group_tree(faithful(lift.group_rep), budget)
    lift_claim = Claim(
        "compressed module divides the group module wreath the flip-flop on Y",
        lift.status,
        lift.note or (f"{lift.claim.verdict}: {lift.claim.reason or str(lift.claim.steps) + ' steps'}" if lift.claim else "not checked"),
    )
    claims = [
        Claim("compressed module divides the factor", VERIFIED, "ideal V with quotient map onto V/U"),
        Claim("group module divides the compressed module", VERIFIED, "restriction to A·e"),
    ]
    if lift.y_count > 1:
        body = Node(WR_LINEAR_PURE, [inner, Leaf(FLIP_FLOP, lift.flip_flop)], c.rep, [lift_claim])
    else:
        body = inner
        claims.append(lift_claim)
    return Node(COMPRESS, [body], r, claims)


def decompose(l: LinearAutomaton, budget: int | None = None, check: bool = True) -> DecompositionTree:
    """Canonical decomposition tree of a faithful linear automaton."""
    if l.dim == 0:
        raise DimensionError("nothing to decompose in dimension 0")
    if not is_faithful(l):
        raise DecompositionError("automaton is not faithful")
    leaf = _atom_leaf(l)
    if leaf is not None:
        return DecompositionTree(leaf, l)
    ld = linear_decompose(l)
    subtrees = [_factor_tree(f, budget, check) for f in ld.factors]
    if len(subtrees) == 1:
        return DecompositionTree(flatten(subtrees[0]), l)
    ok, why = ld.certificate()
    root = Node(TRI, subtrees, l, [Claim("divides the triangular product of its factors", VERIFIED if ok else REFUTED_STATUS, why)])
    return DecompositionTree(flatten(root), l)


def flatten(t):
    """Merge nested TRI (and nested WR_PURE) nodes; operation counts are unchanged."""
    if isinstance(t, Leaf):
        return t
    kids = [flatten(c) for c in t.children]
    if t.op in (TRI, WR_PURE):
        merged = []
        claims = list(t.claims)
        for c in kids:
            if isinstance(c, Node) and c.op == t.op:
                merged.extend(c.children)
                claims.extend(c.claims)
            else:
                merged.append(c)
        return Node(t.op, merged, t.automaton, claims)
    return Node(t.op, kids, t.automaton, list(t.claims))


# --- counting -------------------------------------------------------------------------------


@dataclass
class ComplexityReport:
    tri_count: int = 0
    wr_linear_count: int = 0
    wr_pure_count: int = 0
    compress_count: int = 0
    linear_atoms: int = 0
    pure_group_atoms: int = 0
    flip_flops: int = 0
    halted: int = 0

    @property
    def op_count(self) -> int:
        return self.tri_count + self.wr_linear_count + self.wr_pure_count + self.compress_count

    @property
    def group_atoms(self) -> int:
        return self.linear_atoms + self.pure_group_atoms

    @property
    def lower_bound(self) -> bool:
        return self.halted > 0

    def as_dict(self) -> dict:
        return {
            "op_count": self.op_count,
            "tri_count": self.tri_count,
            "wr_linear_count": self.wr_linear_count,
            "wr_pure_count": self.wr_pure_count,
            "compress_count": self.compress_count,
            "linear_atoms": self.linear_atoms,
            "group_atoms": self.group_atoms,
            "flip_flops": self.flip_flops,
            "halted": self.halted,
            "lower_bound": self.lower_bound,
        }


def complexity(t) -> ComplexityReport:
    root = t.root if isinstance(t, DecompositionTree) else t
    rep = ComplexityReport()
    for x in walk(root):
        if isinstance(x, Leaf):
            if x.kind == LINEAR_SIMPLE_GROUP:
                rep.linear_atoms += 1
            elif x.kind == PURE_SIMPLE_GROUP:
                rep.pure_group_atoms += 1
            elif x.kind == FLIP_FLOP:
                rep.flip_flops += 1
            elif x.kind == HALT:
                rep.halted += 1
            continue
        c = len(x.children)
        if x.op == TRI:
            rep.tri_count += c - 1
        elif x.op == WR_PURE:
            rep.wr_pure_count += c - 1
        elif x.op == WR_LINEAR_PURE:
            rep.wr_linear_count += 1
        elif x.op == COMPRESS:
            rep.compress_count += 1
    return rep


# --- rewrites ---------------------------------------------------------------------------------


def law3_forward(n: Node) -> Node | None:
    """WR(TRI(c1..cs), Ψ) -> TRI(WR(c1, Ψ), ..., WR(cs, Ψ))."""
    if n.op != WR_LINEAR_PURE or len(n.children) != 2:
        return None
    lin, psi = n.children
    if not (isinstance(lin, Node) and lin.op == TRI):
        return None
    note = [Claim("distributed over the triangular product", UNVERIFIED, "law 3 rewrite")]
    return Node(TRI, [Node(WR_LINEAR_PURE, [c, psi], None, list(note)) for c in lin.children], n.automaton, list(note))


def law3_backward(n: Node) -> Node | None:
    """TRI(WR(c1, Ψ), ..., WR(cs, Ψ)) -> WR(TRI(c1..cs), Ψ) when every Ψ agrees."""
    if n.op != TRI or len(n.children) < 2:
        return None
    kids = n.children
    if not all(isinstance(c, Node) and c.op == WR_LINEAR_PURE and len(c.children) == 2 for c in kids):
        return None
    psi_keys = {c.children[1].key() for c in kids}
    if len(psi_keys) != 1:
        return None
    note = [Claim("collected under one wreath", UNVERIFIED, "law 3 rewrite, reversed")]
    tri = Node(TRI, [c.children[0] for c in kids], None, list(note))
    return Node(WR_LINEAR_PURE, [tri, kids[0].children[1]], n.automaton, list(note))


def law2_forward(n: Node) -> Node | None:
    """TRI(c1..c_{s-1}, WR(b, Ψ)) -> WR(TRI(c1..c_{s-1}, b), Ψ)."""
    if n.op != TRI or len(n.children) < 2:
        return None
    last = n.children[-1]
    if not (isinstance(last, Node) and last.op == WR_LINEAR_PURE and len(last.children) == 2):
        return None
    note = [Claim("absorbed into the wreath", UNVERIFIED, "law 2 rewrite")]
    tri = Node(TRI, list(n.children[:-1]) + [last.children[0]], None, list(note))
    return Node(WR_LINEAR_PURE, [tri, last.children[1]], n.automaton, list(note))


REWRITES = {"law3": law3_forward, "law3-reverse": law3_backward, "law2": law2_forward}


def _neighbours(t):
    if isinstance(t, Leaf):
        return
    for name, rule in REWRITES.items():
        r = rule(t)
        if r is not None:
            yield r, name
    for i, c in enumerate(t.children):
        for r, name in _neighbours(c):
            kids = list(t.children)
            kids[i] = r
            yield Node(t.op, kids, t.automaton, list(t.claims)), name


@dataclass
class RewriteResult:
    report: ComplexityReport
    tree: DecompositionTree
    moves: list[str]
    explored: int


def rewrite_search(t, budget: int) -> RewriteResult:
    """Fewest operations among trees within ``budget`` rewrites (breadth first)."""
    tree = t if isinstance(t, DecompositionTree) else DecompositionTree(t)
    best = (complexity(tree).op_count, tree.root, [])
    seen = {tree.root.key()}
    queue = deque([(tree.root, [])])
    while queue:
        node, moves = queue.popleft()
        if len(moves) >= budget:
            continue
        for nxt, name in _neighbours(node):
            k = nxt.key()
            if k in seen:
                continue
            seen.add(k)
            path = moves + [name]
            ops = complexity(nxt).op_count
            if ops < best[0]:
                best = (ops, nxt, path)
            queue.append((nxt, path))
    out = DecompositionTree(best[1], tree.source)
    return RewriteResult(complexity(out), out, best[2], len(seen))


def synthetic_tree(s: int, op: str = WR_LINEAR_PURE) -> DecompositionTree:
    """s linear atoms under one triangular product, wreathed with a single pure atom."""
    leaves = [Leaf(LINEAR_SIMPLE_GROUP, label=f"A{i + 1}") for i in range(s)]
    lin = leaves[0] if s == 1 else Node(TRI, leaves)
    return DecompositionTree(Node(op, [lin, Leaf(PURE_SIMPLE_GROUP, label="X")]))
