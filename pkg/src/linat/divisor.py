"""Divisibility of automata: witnesses, their verification, and a brute-force search.

``claimed | host`` means the claimed automaton is a homomorphic image of a
sub-automaton of the host.  A witness lists the host elements forming the
subsemigroup S, the surjection η: S → Γ_claimed, and the carrier data: for
linear automata row bases of the invariant subspaces A' ⊆ A, B' ⊆ B together
with surjective maps onto the claimed carriers (in basis coordinates); for pure
automata the invariant subsets with surjective maps.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .automata import LinearAutomaton, PureAutomaton, is_faithful
from .gfla import (
    FieldMatrix,
    all_subspaces,
    left_inverse,
    matmul_mod,
    preimage_rows,
    rank,
    solve_rows,
    vector_array,
)

FOUND, EXHAUSTED, REFUTED = "found", "exhausted", "refuted"


@dataclass
class DivisorWitness:
    kind: str  # "linear" or "pure"
    elements: list[int]
    eta: list[int]
    sub_a: object  # basis rows (linear) or state list (pure)
    sub_b: object
    h_a: object  # matrix (linear) or image list (pure)
    h_b: object

    def describe(self) -> dict:
        def plain(x):
            return np.asarray(x).tolist() if isinstance(x, np.ndarray) else x

        return {
            "kind": self.kind,
            "elements": list(self.elements),
            "eta": list(self.eta),
            "sub_a": plain(self.sub_a),
            "sub_b": plain(self.sub_b),
            "h_a": plain(self.h_a),
            "h_b": plain(self.h_b),
        }


@dataclass
class VerifyResult:
    ok: bool
    locus: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class OracleResult:
    verdict: str
    witness: DivisorWitness | None = None
    steps: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.verdict == FOUND


class _Budget(Exception):
    pass


# --- verification ---------------------------------------------------------------


def verify_witness(w: DivisorWitness, claimed, host) -> VerifyResult:
    """Exhaustive check of closure, homomorphism, surjectivity and action compatibility."""
    s = list(w.elements)
    pos = {x: i for i, x in enumerate(s)}
    if len(pos) != len(s) or len(w.eta) != len(s):
        return VerifyResult(False, "element list and eta differ in length or repeat")
    ht, ct = host.gamma.table, claimed.gamma.table
    for i, x in enumerate(s):
        for j, y in enumerate(s):
            z = int(ht[x, y])
            if z not in pos:
                return VerifyResult(False, f"S not closed: {x}*{y}={z}")
            if w.eta[pos[z]] != int(ct[w.eta[i], w.eta[j]]):
                return VerifyResult(False, f"eta not a homomorphism at ({x}, {y})")
    if set(w.eta) != set(range(claimed.gamma.order)):
        return VerifyResult(False, "eta not surjective")
    if w.kind == "linear":
        return _verify_linear(w, claimed, host)
    return _verify_pure(w, claimed, host)


def _full_rank(m: np.ndarray, p: int, rows: bool) -> bool:
    m = np.asarray(m)
    k = m.shape[0] if rows else m.shape[1]
    if k == 0:
        return True
    return rank(FieldMatrix(p, m)) == k


def _verify_linear(w: DivisorWitness, claimed: LinearAutomaton, host: LinearAutomaton) -> VerifyResult:
    p = host.p
    if claimed.p != p:
        return VerifyResult(False, "field mismatch")
    ka = _rows(w.sub_a, host.dim_a)
    kb = _rows(w.sub_b, host.dim_b)
    ha = _rows(w.h_a, claimed.dim_a)
    hb = _rows(w.h_b, claimed.dim_b)
    if ha.shape[0] != ka.shape[0] or hb.shape[0] != kb.shape[0]:
        return VerifyResult(False, "carrier map shapes do not match the sub-carriers")
    if not (_full_rank(ka, p, True) and _full_rank(kb, p, True)):
        return VerifyResult(False, "sub-carrier bases are not independent")
    if not (_full_rank(ha, p, False) and _full_rank(hb, p, False)):
        return VerifyResult(False, "carrier maps are not surjective")
    basis = _block(ka, kb)
    hmat = _block(ha, hb)
    for i, x in enumerate(w.elements):
        img = matmul_mod(basis, host.mats[x], p)
        n = _coords(img, ka, kb, host.dim_a, p)
        if n is None:
            return VerifyResult(False, f"sub-carrier not invariant under element {x}")
        lhs = matmul_mod(n, hmat, p)
        rhs = matmul_mod(hmat, claimed.mats[w.eta[i]], p)
        if not np.array_equal(lhs, rhs):
            return VerifyResult(False, f"action mismatch at element {x} -> {w.eta[i]}")
    return VerifyResult(True)


def _rows(x, cols: int) -> np.ndarray:
    a = np.asarray(x, dtype=np.int64)
    if a.size == 0:
        return np.zeros((a.shape[0] if a.ndim == 2 else 0, cols), dtype=np.int64)
    return a.reshape(-1, cols)


def _block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.int64)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def _coords(img: np.ndarray, ka: np.ndarray, kb: np.ndarray, dim_a: int, p: int) -> np.ndarray | None:
    """Coordinates of ``img`` (rows of A'⊕B' images) in the block basis, or None if outside."""
    k1, k2 = ka.shape[0], kb.shape[0]
    out = np.zeros((k1 + k2, k1 + k2), dtype=np.int64)
    # A-rows: A-part must lie in A', B-part in B'
    xa = solve_rows(img[:k1, :dim_a], ka, p)
    xab = solve_rows(img[:k1, dim_a:], kb, p)
    xb = solve_rows(img[k1:, dim_a:], kb, p)
    if xa is None or xab is None or xb is None:
        return None
    out[:k1, :k1] = xa
    out[:k1, k1:] = xab
    out[k1:, k1:] = xb
    return out


def _verify_pure(w: DivisorWitness, claimed: PureAutomaton, host: PureAutomaton) -> VerifyResult:
    sa, ha = list(w.sub_a), list(w.h_a)
    if len(sa) != len(ha) or set(ha) != set(range(claimed.n_a)):
        return VerifyResult(False, "state map not surjective")
    amap = dict(zip(sa, ha))
    bmap: dict[int, int] = {}
    if claimed.star is not None:
        if host.star is None:
            return VerifyResult(False, "host has no outputs")
        sb, hb = list(w.sub_b), list(w.h_b)
        if len(sb) != len(hb) or set(hb) != set(range(claimed.n_b)):
            return VerifyResult(False, "output map not surjective")
        bmap = dict(zip(sb, hb))
    for i, x in enumerate(w.elements):
        c = w.eta[i]
        for a in sa:
            nxt = int(host.circ[a, x])
            if nxt not in amap:
                return VerifyResult(False, f"state {a} leaves the sub-carrier under {x}")
            if amap[nxt] != int(claimed.circ[amap[a], c]):
                return VerifyResult(False, f"transition mismatch at state {a}, element {x}")
            if claimed.star is not None:
                o = int(host.star[a, x])
                if o not in bmap:
                    return VerifyResult(False, f"output of {a} under {x} leaves the sub-carrier")
                if bmap[o] != int(claimed.star[amap[a], c]):
                    return VerifyResult(False, f"output mismatch at state {a}, element {x}")
    return VerifyResult(True)


# --- search ------------------------------------------------------------------------


def _idempotent_count(s) -> int:
    return len(s.idempotents())


def _surjections_linear(k: int, d: int, p: int):
    """All k x d matrices of rank d, in base-p code order."""
    if d == 0:
        yield np.zeros((k, 0), dtype=np.int64)
        return
    if k < d:
        return
    for flat in vector_array(p, k * d):
        m = flat.reshape(k, d)
        if rank(FieldMatrix(p, m)) == d:
            yield m


def _cover(cands: dict[int, list[int]], n_claimed: int, table_h, table_c, tick, faithful: bool) -> tuple[list[int], list[int]] | None:
    """Find a subsemigroup S of the compatible elements and a surjective η over the candidates.

    For a faithful claimed automaton η is forced and the compatible elements
    already form a subsemigroup; otherwise a search over generator choices runs.
    """
    covered = set().union(*cands.values()) if cands else set()
    if covered != set(range(n_claimed)):
        return None
    if faithful:
        s = sorted(cands)
        return s, [cands[x][0] for x in s]

    keys = sorted(cands)

    def close(graph: dict[int, int], s: int, c: int) -> dict[int, int] | None:
        g = dict(graph)
        g[s] = c
        frontier = [(s, c)]
        while frontier:
            tick()
            new = []
            for x, cx in frontier:
                for y, cy in list(g.items()):
                    for a, ca, b, cb in ((x, cx, y, cy), (y, cy, x, cx)):
                        z, cz = int(table_h[a, b]), int(table_c[ca, cb])
                        have = g.get(z)
                        if have is None:
                            g[z] = cz
                            new.append((z, cz))
                        elif have != cz:
                            return None
            frontier = new
        return g

    def dfs(graph: dict[int, int]) -> dict[int, int] | None:
        tick()
        covered = set(graph.values())
        missing = [c for c in range(n_claimed) if c not in covered]
        if not missing:
            return graph
        c = missing[0]
        for s in keys:
            if c not in cands[s] or s in graph:
                continue
            g = close(graph, s, c)
            if g is not None:
                r = dfs(g)
                if r is not None:
                    return r
        return None

    res = dfs({})
    if res is None:
        return None
    s = sorted(res)
    return s, [res[x] for x in s]


def divisor_oracle(claimed, host, budget: int | None = None) -> OracleResult:
    """Search for a witness of ``claimed | host``.

    Verdicts: ``found`` with a verified witness, ``exhausted`` when the step
    budget ran out, ``refuted`` only after the whole search space was covered.
    """
    budget = config.CAPS.oracle_budget if budget is None else budget
    steps = [0]

    def tick(n: int = 1):
        steps[0] += n
        if steps[0] > budget:
            raise _Budget()

    if type(claimed) is not type(host):
        return OracleResult(REFUTED, reason="automata of different kinds")
    if claimed.gamma.order > host.gamma.order:
        return OracleResult(REFUTED, reason="claimed semigroup larger than host")
    if _idempotent_count(claimed.gamma) > _idempotent_count(host.gamma):
        return OracleResult(REFUTED, reason="claimed semigroup has more idempotents than host")
    try:
        if isinstance(claimed, LinearAutomaton):
            res = _search_linear(claimed, host, tick)
        else:
            res = _search_pure(claimed, host, tick)
    except _Budget:
        return OracleResult(EXHAUSTED, steps=steps[0], reason=f"budget {budget} exhausted")
    if res is None:
        return OracleResult(REFUTED, steps=steps[0], reason="search space exhausted")
    check = verify_witness(res, claimed, host)
    if not check:
        raise AssertionError(f"oracle produced an invalid witness: {check.locus}")
    return OracleResult(FOUND, res, steps[0])


def _search_linear(claimed: LinearAutomaton, host: LinearAutomaton, tick) -> DivisorWitness | None:
    p = host.p
    if claimed.p != p:
        return None
    da, db = claimed.dim_a, claimed.dim_b
    if da > host.dim_a or db > host.dim_b:
        return None
    lookup: dict[bytes, list[int]] = {}
    for i, m in enumerate(claimed.mats):
        lookup.setdefault(m.tobytes(), []).append(i)
    n_c = claimed.gamma.order
    faithful = is_faithful(claimed)

    def subs(ambient: int, need: int):
        cands = [s for s in all_subspaces(p, ambient) if s.dim >= need]
        cands.sort(key=lambda s: (-s.dim, s.key()))
        return [s.basis for s in cands]

    # a zero target sort is best served by the least constraining sub-carrier:
    # A' = 0 imposes nothing, B' = B contains every output
    a_list = subs(host.dim_a, da) if da else [np.zeros((0, host.dim_a), dtype=np.int64)]
    b_list = subs(host.dim_b, db) if db else [np.eye(host.dim_b, dtype=np.int64)]
    hm = host.mats
    for ka in a_list:
        for kb in b_list:
            tick()
            basis = _block(ka, kb)
            k1 = ka.shape[0]
            inv: dict[int, np.ndarray] = {}
            for x in range(host.gamma.order):
                tick()
                n = _coords(matmul_mod(basis, hm[x], p), ka, kb, host.dim_a, p)
                if n is not None:
                    inv[x] = n
            if not inv:
                continue
            xs = sorted(inv)
            nstack = np.stack([inv[x] for x in xs])
            for ha in _surjections_linear(k1, da, p):
                for hb in _surjections_linear(kb.shape[0], db, p):
                    tick(len(xs))
                    hmat = _block(ha, hb)
                    left = left_inverse(hmat, p)
                    nh = matmul_mod(nstack, hmat, p)
                    induced = matmul_mod(left[None], nh, p)
                    ok = np.all(matmul_mod(hmat[None], induced, p) == nh, axis=(1, 2))
                    cands = {}
                    for i in np.nonzero(ok)[0]:
                        got = lookup.get(np.ascontiguousarray(induced[i]).tobytes())
                        if got:
                            cands[xs[i]] = got
                    found = _cover(cands, n_c, host.gamma.table, claimed.gamma.table, tick, faithful)
                    if found is not None:
                        s, eta = found
                        return DivisorWitness("linear", s, eta, ka, kb, ha, hb)
    return None


def _subsets(n: int, need: int):
    for size in range(n, need - 1, -1):
        yield from itertools.combinations(range(n), size)


def _surjective_maps(k: int, m: int):
    for f in itertools.product(range(m), repeat=k):
        if len(set(f)) == m:
            yield f


def _search_pure(claimed: PureAutomaton, host: PureAutomaton, tick) -> DivisorWitness | None:
    if claimed.star is not None and host.star is None:
        return None
    if claimed.n_a > host.n_a:
        return None
    lookup: dict[bytes, list[int]] = {}
    for i, sgn in enumerate(claimed.signatures()):
        lookup.setdefault(sgn, []).append(i)
    n_c = claimed.gamma.order
    faithful = is_faithful(claimed)
    with_out = claimed.star is not None
    b_subsets = list(_subsets(host.n_b, claimed.n_b)) if with_out else [()]
    for sa in _subsets(host.n_a, claimed.n_a):
        if claimed.n_a == 0 and sa:
            continue
        sa_set = set(sa)
        closed = [x for x in range(host.gamma.order) if sa_set.issuperset(host.circ[list(sa), x].tolist())]
        tick(host.gamma.order)
        if not closed:
            continue
        for sb in b_subsets:
            sb_set = set(sb)
            if with_out:
                elems = [x for x in closed if sb_set.issuperset(host.star[list(sa), x].tolist())]
            else:
                elems = closed
            if not elems:
                continue
            for ha in _surjective_maps(len(sa), claimed.n_a):
                amap = dict(zip(sa, ha))
                for hb in _surjective_maps(len(sb), claimed.n_b) if with_out else [()]:
                    bmap = dict(zip(sb, hb))
                    tick(len(elems))
                    cands = {}
                    for x in elems:
                        tau = [-1] * claimed.n_a
                        omega = [-1] * claimed.n_b
                        good = True
                        for a in sa:
                            img = amap[int(host.circ[a, x])]
                            q = amap[a]
                            if tau[q] not in (-1, img):
                                good = False
                                break
                            tau[q] = img
                            if with_out:
                                o = bmap[int(host.star[a, x])]
                                if omega[q] not in (-1, o):
                                    good = False
                                    break
                                omega[q] = o
                        if not good:
                            continue
                        sig = _pure_signature(tau, omega if with_out else None)
                        got = lookup.get(sig)
                        if got:
                            cands[x] = got
                    found = _cover(cands, n_c, host.gamma.table, claimed.gamma.table, tick, faithful)
                    if found is not None:
                        s, eta = found
                        return DivisorWitness("pure", s, eta, list(sa), list(sb), list(ha), list(hb))
    return None


def _pure_signature(tau: list[int], omega: list[int] | None) -> bytes:
    cols = [np.asarray(tau, dtype=np.int64)]
    if omega is not None:
        cols.append(np.asarray(omega, dtype=np.int64))
    return np.ascontiguousarray(np.concatenate(cols)).tobytes()


# --- composition -------------------------------------------------------------------


def identity_witness(a) -> DivisorWitness:
    n = a.gamma.order
    if isinstance(a, LinearAutomaton):
        return DivisorWitness(
            "linear",
            list(range(n)),
            list(range(n)),
            np.eye(a.dim_a, dtype=np.int64),
            np.eye(a.dim_b, dtype=np.int64),
            np.eye(a.dim_a, dtype=np.int64),
            np.eye(a.dim_b, dtype=np.int64),
        )
    return DivisorWitness("pure", list(range(n)), list(range(n)), list(range(a.n_a)), list(range(a.n_b)), list(range(a.n_a)), list(range(a.n_b)))


def compose_witnesses(w12: DivisorWitness, w23: DivisorWitness, p: int | None = None) -> DivisorWitness:
    """From C1 | C2 and C2 | C3 build C1 | C3."""
    if w12.kind != w23.kind:
        raise ValueError("witnesses of different kinds")
    pos12 = {x: i for i, x in enumerate(w12.elements)}
    elems, eta = [], []
    for i, x in enumerate(w23.elements):
        mid = w23.eta[i]
        if mid in pos12:
            elems.append(x)
            eta.append(w12.eta[pos12[mid]])
    if w12.kind == "pure":
        amap23 = dict(zip(w23.sub_a, w23.h_a))
        amap12 = dict(zip(w12.sub_a, w12.h_a))
        sa = [a for a in w23.sub_a if amap23[a] in amap12]
        bmap23 = dict(zip(w23.sub_b, w23.h_b))
        bmap12 = dict(zip(w12.sub_b, w12.h_b))
        sb = [b for b in w23.sub_b if bmap23[b] in bmap12]
        return DivisorWitness(
            "pure", elems, eta, sa, sb, [amap12[amap23[a]] for a in sa], [bmap12[bmap23[b]] for b in sb]
        )
    if p is None:
        raise ValueError("field characteristic required for linear witnesses")

    def part(k3, h23, k2, h12):
        k3 = np.asarray(k3, dtype=np.int64)
        h23 = np.asarray(h23, dtype=np.int64)
        k2 = _rows(k2, h23.shape[1])
        v = preimage_rows(h23, k2, p) if h23.shape[0] else np.zeros((0, 0), dtype=np.int64)
        basis = matmul_mod(v, k3, p) if v.size else np.zeros((0, k3.shape[1]), dtype=np.int64)
        img = matmul_mod(v, h23, p) if v.size else np.zeros((0, h23.shape[1]), dtype=np.int64)
        coords = solve_rows(img, k2, p)
        h = matmul_mod(coords, np.asarray(h12, dtype=np.int64).reshape(k2.shape[0], -1), p) if k2.shape[0] else np.zeros((basis.shape[0], np.asarray(h12).shape[-1] if np.asarray(h12).ndim == 2 else 0), dtype=np.int64)
        return basis, h

    ka, ha = part(w23.sub_a, w23.h_a, w12.sub_a, w12.h_a)
    kb, hb = part(w23.sub_b, w23.h_b, w12.sub_b, w12.h_b)
    return DivisorWitness("linear", elems, eta, ka, kb, ha, hb)


# --- correct decompositions -----------------------------------------------------------


@dataclass
class CorrectDecomposition:
    """Λ | ∇_i (Λ_i wr Φ_i) together with Λ_i | Λ; statuses per witness."""

    target: object
    factors: list  # pairs (Λ_i, Φ_i) with Φ_i a pure semi-automaton or None
    host: object = None  # the assembled product, when built
    to_host: object = None  # OracleResult / DivisorWitness for Λ | host
    from_factors: list = field(default_factory=list)  # per-factor Λ_i | Λ evidence
    status: str = "unverified (paper-backed)"

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def check_correct(dec: CorrectDecomposition, budget: int | None = None) -> CorrectDecomposition:
    """Run the oracle for every divisibility the decomposition asserts."""
    from .products import tri_automata, wreath_linear_pure

    if dec.host is None:
        parts = [lam if phi is None else wreath_linear_pure(lam, phi) for lam, phi in dec.factors]
        host = parts[0]
        for nxt in parts[1:]:
            host = tri_automata(host, nxt)
        dec.host = host
    dec.to_host = divisor_oracle(dec.target, dec.host, budget)
    dec.from_factors = [divisor_oracle(lam, dec.target, budget) for lam, _ in dec.factors]
    verdicts = [dec.to_host.verdict] + [r.verdict for r in dec.from_factors]
    if all(v == FOUND for v in verdicts):
        dec.status = "verified"
    elif REFUTED in verdicts:
        dec.status = "refuted"
    else:
        dec.status = "unverified (paper-backed)"
    return dec


def transitive_substitute(outer: CorrectDecomposition, inner: list[CorrectDecomposition], budget: int | None = None, verify: bool = True) -> CorrectDecomposition:
    """Replace each Λ_i by its own decomposition ∇_j (Λ_ij wr Φ_ij).

    The pure parts are re-associated: (Λ_ij wr Φ_ij) wr Φ_i becomes
    Λ_ij wr (Φ_ij wr Φ_i).
    """
    from .products import wreath_pure

    if len(inner) != len(outer.factors):
        raise ValueError("one inner decomposition per outer factor required")
    factors = []
    for (lam_i, phi_i), dec in zip(outer.factors, inner):
        for lam_ij, phi_ij in dec.factors:
            if phi_ij is None:
                phi = phi_i
            elif phi_i is None:
                phi = phi_ij
            else:
                phi, _ = wreath_pure(phi_ij, phi_i)
            factors.append((lam_ij, phi))
    out = CorrectDecomposition(outer.target, factors)
    if verify:
        check_correct(out, budget)
    return out
