"""Finite semigroups given by Cayley tables.

Elements are the integers ``0..n-1`` and ``table[x, y]`` is the product ``xy``.
Zero and identity are optional marks; group structure is detected, never
assumed.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from . import config
from .config import CapExceeded, check_cap


class SemigroupError(ValueError):
    pass


class NotAssociativeError(SemigroupError):
    def __init__(self, triple: tuple[int, int, int]):
        x, y, z = triple
        super().__init__(f"not associative at ({x}, {y}, {z}): (xy)z != x(yz)")
        self.triple = triple


class NotAGroupError(SemigroupError):
    pass


class NotIdealError(SemigroupError):
    pass


def associativity_failures(table: np.ndarray, limit: int | None = None) -> list[tuple[int, int, int]]:
    """All triples with (xy)z != x(yz), scanning one left factor at a time."""
    n = table.shape[0]
    bad: list[tuple[int, int, int]] = []
    for x in range(n):
        left = table[table[x]]  # [y, z] -> (xy)z
        right = table[x][table]  # [y, z] -> x(yz)
        ys, zs = np.nonzero(left != right)
        bad.extend((x, int(y), int(z)) for y, z in zip(ys, zs))
        if limit is not None and len(bad) >= limit:
            return bad[:limit]
    return bad


class FiniteSemigroup:
    """Semigroup on ``0..n-1`` with an explicit Cayley table."""

    def __init__(
        self,
        table,
        zero: int | None = None,
        identity: int | None = None,
        labels: Sequence[str] | None = None,
        check: bool | None = None,
    ):
        t = np.array(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise SemigroupError(f"Cayley table must be square, got shape {t.shape}")
        n = t.shape[0]
        if n and (t.min() < 0 or t.max() >= n):
            raise SemigroupError("Cayley table entries out of range")
        t.setflags(write=False)
        self.table = t
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise SemigroupError("one label per element required")
        if check is None:
            check = n <= config.CAPS.assoc_check
        if check:
            bad = associativity_failures(t, limit=1)
            if bad:
                raise NotAssociativeError(bad[0])
        if zero is not None:
            if not (np.all(t[zero] == zero) and np.all(t[:, zero] == zero)):
                raise SemigroupError(f"element {zero} is not a zero")
        if identity is not None:
            ar = np.arange(n)
            if not (np.array_equal(t[identity], ar) and np.array_equal(t[:, identity], ar)):
                raise SemigroupError(f"element {identity} is not an identity")
        self.zero = zero
        self.identity = identity

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def __len__(self) -> int:
        return self.order

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def product(self, word: Iterable[int]) -> int:
        it = iter(word)
        acc = next(it)
        for w in it:
            acc = int(self.table[acc, w])
        return acc

    def idempotents(self) -> list[int]:
        return [int(x) for x in np.nonzero(np.diag(self.table) == np.arange(self.order))[0]]

    def find_zero(self) -> int | None:
        for z in range(self.order):
            if np.all(self.table[z] == z) and np.all(self.table[:, z] == z):
                return z
        return None

    def find_identity(self) -> int | None:
        ar = np.arange(self.order)
        for e in range(self.order):
            if np.array_equal(self.table[e], ar) and np.array_equal(self.table[:, e], ar):
                return e
        return None

    def with_marks(self) -> FiniteSemigroup:
        """Copy with zero and identity marked wherever they exist."""
        return FiniteSemigroup(self.table, self.find_zero(), self.find_identity(), self.labels, check=False)

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSemigroup):
            return NotImplemented
        return (
            np.array_equal(self.table, other.table)
            and self.zero == other.zero
            and self.identity == other.identity
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.table.tobytes(), self.zero, self.identity))

    def __repr__(self) -> str:
        return f"FiniteSemigroup(order={self.order}, zero={self.zero}, identity={self.identity})"

    # group structure -----------------------------------------------------

    def is_group(self) -> bool:
        e = self.find_identity()
        if e is None or self.order == 0:
            return False
        return all(set(row.tolist()) == set(range(self.order)) for row in self.table)

    def inverses(self) -> np.ndarray:
        if not self.is_group():
            raise NotAGroupError("semigroup is not a group")
        e = self.find_identity()
        inv = np.zeros(self.order, dtype=np.int64)
        for x in range(self.order):
            inv[x] = int(np.nonzero(self.table[x] == e)[0][0])
        return inv


def is_isomorphic_by(a: FiniteSemigroup, b: FiniteSemigroup, phi: Sequence[int]) -> bool:
    phi = np.asarray(phi)
    if a.order != b.order or len(set(phi.tolist())) != a.order:
        return False
    return bool(np.array_equal(phi[a.table], b.table[np.ix_(phi, phi)]))


def find_isomorphism(a: FiniteSemigroup, b: FiniteSemigroup) -> list[int] | None:
    """Backtracking isomorphism search; desk-scale orders only."""
    n = a.order
    if n != b.order:
        return None
    if sorted(len(set(r.tolist())) for r in a.table) != sorted(len(set(r.tolist())) for r in b.table):
        return None
    ida = set(a.idempotents())
    idb = set(b.idempotents())
    if len(ida) != len(idb):
        return None
    phi = [-1] * n
    used = [False] * n

    def consistent(k: int) -> bool:
        for x in range(k + 1):
            for y in (k,) if x < k else range(k + 1):
                pairs = [(x, k), (k, x)] if x < k else [(k, k)]
                for u, v in pairs:
                    w = a.table[u, v]
                    if w <= k and phi[w] != b.table[phi[u], phi[v]]:
                        return False
        return True

    def go(k: int) -> bool:
        if k == n:
            return True
        for c in range(n):
            if used[c] or ((k in ida) != (c in idb)):
                continue
            phi[k] = c
            used[c] = True
            if consistent(k) and go(k + 1):
                return True
            used[c] = False
        phi[k] = -1
        return False

    return phi if go(0) else None


# --- constructors ---------------------------------------------------------


def cyclic_group(n: int) -> FiniteSemigroup:
    ar = np.arange(n)
    return FiniteSemigroup((ar[:, None] + ar[None, :]) % n, identity=0)


def trivial_semigroup() -> FiniteSemigroup:
    return FiniteSemigroup([[0]], identity=0)


def symmetric_group(n: int) -> tuple[FiniteSemigroup, list[tuple[int, ...]]]:
    """S_n acting on the right: ``(xy)`` means first x then y."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(q[p[i]] for i in range(n))] for q in perms] for p in perms]
    return FiniteSemigroup(table, identity=index[tuple(range(n))]), perms


def right_zero(m: int) -> FiniteSemigroup:
    """M^r: xy = y."""
    if m < 1:
        raise SemigroupError("flip-flop carrier must be nonempty")
    return FiniteSemigroup(np.tile(np.arange(m), (m, 1)), identity=0 if m == 1 else None)


def left_zero(m: int) -> FiniteSemigroup:
    """M^l: xy = x."""
    if m < 1:
        raise SemigroupError("carrier must be nonempty")
    return FiniteSemigroup(np.tile(np.arange(m)[:, None], (1, m)), identity=0 if m == 1 else None)


def flip_flop(m: int) -> tuple[FiniteSemigroup, np.ndarray]:
    """Right-zero semigroup M^r with its action on M by constants (``a o b = b``)."""
    s = right_zero(m)
    action = np.tile(np.arange(m), (m, 1))  # action[a, b] = b
    return s, action


def adjoin_zero(s: FiniteSemigroup) -> FiniteSemigroup:
    """S^0: a new zero appended as the last element."""
    n = s.order
    t = np.full((n + 1, n + 1), n, dtype=np.int64)
    t[:n, :n] = s.table
    labels = list(s.labels) + ["0"] if s.labels else None
    return FiniteSemigroup(t, zero=n, identity=s.identity, labels=labels, check=False)


def adjoin_identity(s: FiniteSemigroup) -> FiniteSemigroup:
    n = s.order
    t = np.zeros((n + 1, n + 1), dtype=np.int64)
    t[:n, :n] = s.table
    t[n, :] = np.arange(n + 1)
    t[:, n] = np.arange(n + 1)
    return FiniteSemigroup(t, zero=s.zero, identity=n, check=False)


def brandt_b2() -> FiniteSemigroup:
    """B2 = {0, e11, e12, e21, e22} with matrix-unit multiplication."""
    units = [None, (0, 0), (0, 1), (1, 0), (1, 1)]
    t = np.zeros((5, 5), dtype=np.int64)
    for x, u in enumerate(units):
        for y, v in enumerate(units):
            if u is None or v is None or u[1] != v[0]:
                t[x, y] = 0
            else:
                t[x, y] = units.index((u[0], v[1]))
    return FiniteSemigroup(t, zero=0, labels=["0", "e11", "e12", "e21", "e22"])


def rectangular_band(rows: int, cols: int) -> FiniteSemigroup:
    """Elements (i, j) with (i, j)(k, l) = (i, l); index i*cols + j."""
    t = np.zeros((rows * cols, rows * cols), dtype=np.int64)
    for i, j, k, l in itertools.product(range(rows), range(cols), range(rows), range(cols)):
        t[i * cols + j, k * cols + l] = i * cols + l
    return FiniteSemigroup(t)


def direct_product(a: FiniteSemigroup, b: FiniteSemigroup) -> FiniteSemigroup:
    """Elements (x, y) indexed x*|b| + y."""
    na, nb = a.order, b.order
    x = np.arange(na * nb)
    xa, xb = x // nb, x % nb
    t = a.table[np.ix_(xa, xa)] * nb + b.table[np.ix_(xb, xb)]
    ident = a.identity * nb + b.identity if a.identity is not None and b.identity is not None else None
    return FiniteSemigroup(t, identity=ident, check=False)


# --- closure --------------------------------------------------------------


@dataclass
class Closure:
    """Semigroup generated by concrete generators.

    ``elements[i]`` is the concrete value of element ``i`` and ``words[i]`` a
    generator sequence producing it.
    """

    semigroup: FiniteSemigroup
    elements: list
    words: list[tuple[int, ...]]
    index: dict = field(repr=False)


def closure(
    generators: Sequence,
    compose: Callable,
    key: Callable[[object], Hashable] = lambda x: x,
    cap: int | None = None,
) -> Closure:
    """Close ``generators`` under ``compose(x, y)`` (x first, then y).

    Elements are numbered in breadth-first order of their shortest words.
    """
    cap = config.CAPS.closure if cap is None else cap
    elements: list = []
    words: list[tuple[int, ...]] = []
    index: dict = {}
    parent: list[int] = []
    right: list[list[int]] = []  # right Cayley graph
    queue: deque[int] = deque()
    for gi, g in enumerate(generators):
        k = key(g)
        if k not in index:
            index[k] = len(elements)
            elements.append(g)
            words.append((gi,))
            parent.append(-1)
            queue.append(index[k])
    while queue:
        x = queue.popleft()
        row = []
        for gi, g in enumerate(generators):
            y = compose(elements[x], g)
            k = key(y)
            j = index.get(k)
            if j is None:
                j = len(elements)
                if j >= cap:
                    raise CapExceeded("closure", j + 1, cap)
                index[k] = j
                elements.append(y)
                words.append(words[x] + (gi,))
                parent.append(x)
                queue.append(j)
            row.append(j)
        while len(right) <= x:
            right.append([])
        right[x] = row
    n = len(elements)
    check_cap("closure Cayley table", n, "table")
    rg = np.array(right, dtype=np.int64).reshape(n, len(generators))
    table = np.zeros((n, n), dtype=np.int64)
    for y in range(n):  # words are BFS-ordered, so prefixes come first
        w = words[y]
        if len(w) == 1:
            table[:, y] = rg[:, w[0]]
        else:
            table[:, y] = rg[table[:, parent[y]], w[-1]]
    s = FiniteSemigroup(table, check=False).with_marks()
    return Closure(s, elements, words, index)



def transformation_compose(f: tuple, g: tuple) -> tuple:
    """Right action: first f then g."""
    return tuple(g[i] for i in f)


# --- ideals ---------------------------------------------------------------


def principal_ideal(s: FiniteSemigroup, x: int) -> frozenset[int]:
    t = s.table
    left = set(t[:, x].tolist()) | {x}
    both = set(left)
    for y in left:
        both |= set(t[y].tolist())
    return frozenset(both)


def is_ideal(s: FiniteSemigroup, subset: Iterable[int]) -> bool:
    sub = sorted(set(subset))
    if not sub:
        return True
    mask = np.zeros(s.order, dtype=bool)
    mask[sub] = True
    return bool(mask[s.table[sub]].all() and mask[s.table[:, sub]].all())


def ideals(s: FiniteSemigroup) -> list[frozenset[int]]:
    """All nonempty two-sided ideals, sorted by size then elements."""
    principals = {principal_ideal(s, x) for x in range(s.order)}
    found = set(principals)
    frontier = list(principals)
    while frontier:
        new = []
        for a in frontier:
            for b in principals:
                u = a | b
                if u not in found:
                    found.add(u)
                    new.append(u)
        frontier = new
    return sorted(found, key=lambda i: (len(i), sorted(i)))


def min_ideal_above(s: FiniteSemigroup, u: Iterable[int]) -> frozenset[int]:
    """A minimal ideal strictly containing ``u`` (least element list on ties)."""
    u = frozenset(u)
    if not is_ideal(s, u):
        raise NotIdealError(f"{sorted(u)} is not an ideal")
    if len(u) == s.order:
        raise NotIdealError("no ideal strictly contains the whole semigroup")
    candidates = {u | principal_ideal(s, x) for x in range(s.order) if x not in u}
    minimal = [c for c in candidates if not any(d < c for d in candidates)]
    return min(minimal, key=lambda c: (len(c), sorted(c)))


def subsemigroup(s: FiniteSemigroup, elements: Iterable[int]) -> tuple[FiniteSemigroup, list[int]]:
    """Restriction to a closed subset; returns the subsemigroup and its element list."""
    elems = sorted(set(elements))
    pos = {x: i for i, x in enumerate(elems)}
    try:
        t = [[pos[int(s.table[x, y])] for y in elems] for x in elems]
    except KeyError:
        raise SemigroupError("subset is not closed under multiplication") from None
    labels = [s.label(x) for x in elems] if s.labels else None
    return FiniteSemigroup(t, labels=labels, check=False).with_marks(), elems


def rees_quotient(s: FiniteSemigroup, u: Iterable[int]) -> tuple[FiniteSemigroup, dict[int, int]]:
    """S/U: elements of S outside U, then a zero as the last element.

    An empty U adjoins a new zero. Returns the quotient and the map S -> S/U.
    """
    u = frozenset(u)
    if not is_ideal(s, u):
        raise NotIdealError(f"{sorted(u)} is not an ideal")
    keep = [x for x in range(s.order) if x not in u]
    z = len(keep)
    mapping = {x: i for i, x in enumerate(keep)}
    for x in u:
        mapping[x] = z
    t = np.full((z + 1, z + 1), z, dtype=np.int64)
    for i, x in enumerate(keep):
        for j, y in enumerate(keep):
            t[i, j] = mapping[int(s.table[x, y])]
    labels = [s.label(x) for x in keep] + ["0"] if s.labels else None
    q = FiniteSemigroup(t, zero=z, labels=labels, check=False)
    return FiniteSemigroup(q.table, zero=z, identity=q.find_identity(), labels=labels, check=False), mapping


def is_completely_zero_simple(s: FiniteSemigroup) -> bool:
    """Only ideals {0} and S, and some nonzero square (finite case)."""
    if s.zero is None:
        raise SemigroupError("no zero marked")
    z = s.zero
    if s.order < 2:
        return False
    if not any(int(s.table[x, x]) != z for x in range(s.order)):
        return False
    return all(i == frozenset({z}) or len(i) == s.order for i in ideals(s))


def is_completely_simple(s: FiniteSemigroup) -> bool:
    """No proper ideals (finite case); the zero-free analogue."""
    return s.order > 0 and len(ideals(s)) == 1


# --- Green's relations and Rees structure -------------------------------------


def right_ideal_sets(s: FiniteSemigroup) -> list[frozenset[int]]:
    return [frozenset(s.table[x].tolist()) | {x} for x in range(s.order)]


def left_ideal_sets(s: FiniteSemigroup) -> list[frozenset[int]]:
    return [frozenset(s.table[:, x].tolist()) | {x} for x in range(s.order)]


def _classes(keys: list) -> list[list[int]]:
    groups: dict = {}
    for x, k in enumerate(keys):
        groups.setdefault(k, []).append(x)
    return sorted(groups.values(), key=lambda c: c[0])


def green_classes(s: FiniteSemigroup) -> dict[str, list[list[int]]]:
    r = right_ideal_sets(s)
    l = left_ideal_sets(s)
    return {
        "R": _classes(r),
        "L": _classes(l),
        "H": _classes(list(zip(r, l))),
    }


@dataclass
class ReesStructure:
    """Coordinates (x, g, y) for a completely (0-)simple semigroup.

    ``X`` indexes R-classes and ``Y`` L-classes of the nonzero elements;
    ``sandwich[y][x]`` is an element of ``group`` or ``None`` for zero.
    ``triples[e]`` gives the coordinates of element ``e`` of the source.
    """

    source: FiniteSemigroup
    X: list[int]  # representatives r_x (in L_e)
    Y: list[int]  # representatives q_y (in R_e)
    group: FiniteSemigroup
    group_elements: list[int]  # H-class of the chosen idempotent, in source indices
    sandwich: list[list[int | None]]
    triples: dict[int, tuple[int, int, int]]

    @property
    def idempotent(self) -> int:
        return self.group_elements[self.group.identity]

    def element(self, x: int, g: int, y: int) -> int:
        t = self.source.table
        return int(t[t[self.X[x], self.group_elements[g]], self.Y[y]])

    def multiply(self, a: tuple[int, int, int], b: tuple[int, int, int]) -> tuple[int, int, int] | None:
        """(x1, g1[y1, x2]g2, y2), or None when the sandwich entry is zero."""
        x1, g1, y1 = a
        x2, g2, y2 = b
        p = self.sandwich[y1][x2]
        if p is None:
            return None
        gt = self.group.table
        return (x1, int(gt[gt[g1, p], g2]), y2)

    def reconstructed_table(self) -> np.ndarray:
        s = self.source
        z = s.zero
        out = np.empty_like(s.table)
        for a in range(s.order):
            for b in range(s.order):
                if a == z or b == z:
                    out[a, b] = z
                    continue
                c = self.multiply(self.triples[a], self.triples[b])
                out[a, b] = z if c is None else self.element(*c)
        return out


def rees_structure(s: FiniteSemigroup) -> ReesStructure:
    """Rees coordinates; accepts completely 0-simple (zero marked) or completely simple."""
    z = s.zero
    if z is not None:
        if not is_completely_zero_simple(s):
            raise SemigroupError("semigroup is not completely 0-simple")
    elif not is_completely_simple(s):
        raise SemigroupError("semigroup is neither completely 0-simple nor completely simple")
    t = s.table
    nonzero = [x for x in range(s.order) if x != z]
    g = green_classes(s)
    h_classes = [c for c in g["H"] if c[0] != z or len(c) > 1]
    h_of = {x: i for i, c in enumerate(h_classes) for x in c}
    e = None
    for c in sorted(h_classes, key=lambda c: c[0]):
        if c == [z]:
            continue
        idem = [x for x in c if int(t[x, x]) == x]
        if idem:
            e = idem[0]
            break
    if e is None:
        raise SemigroupError("no group H-class found")
    h_e = sorted(h_classes[h_of[e]])
    r_sets = right_ideal_sets(s)
    l_sets = left_ideal_sets(s)
    r_classes = [c for c in g["R"] if c != [z]]
    l_classes = [c for c in g["L"] if c != [z]]
    # X: one rep per R-class inside L_e ; Y: one rep per L-class inside R_e
    xs = [min(x for x in c if l_sets[x] == l_sets[e]) for c in r_classes]
    ys = [min(y for y in c if r_sets[y] == r_sets[e]) for c in l_classes]
    group, _ = subsemigroup(s, h_e)
    gpos = {x: i for i, x in enumerate(h_e)}
    sandwich: list[list[int | None]] = []
    for q in ys:
        row = []
        for r in xs:
            v = int(t[q, r])
            row.append(None if v == z else gpos.get(v))
            if v != z and v not in gpos:
                raise SemigroupError("sandwich entry outside the chosen group")
        sandwich.append(row)
    triples: dict[int, tuple[int, int, int]] = {}
    for xi, r in enumerate(xs):
        for gi, gel in enumerate(h_e):
            for yi, q in enumerate(ys):
                el = int(t[t[r, gel], q])
                if el in triples or el == z:
                    raise SemigroupError("Rees coordinates are not a bijection")
                triples[el] = (xi, gi, yi)
    if sorted(triples) != nonzero:
        raise SemigroupError("Rees coordinates do not cover the nonzero elements")
    return ReesStructure(s, xs, ys, group, h_e, sandwich, triples)


# --- congruences ---------------------------------------------------------------


@dataclass
class SemigroupCongruence:
    classes: list[list[int]]

    def class_of(self) -> dict[int, int]:
        return {x: i for i, c in enumerate(self.classes) for x in c}

    def is_compatible(self, s: FiniteSemigroup) -> bool:
        cls = self.class_of()
        rep = [c[0] for c in self.classes]
        for c in self.classes:
            for x in c:
                for i, d in enumerate(self.classes):
                    for y in d:
                        if cls[int(s.table[x, y])] != cls[int(s.table[c[0], rep[i]])]:
                            return False
        return True

    def quotient(self, s: FiniteSemigroup) -> FiniteSemigroup:
        cls = self.class_of()
        rep = [c[0] for c in self.classes]
        t = [[cls[int(s.table[a, b])] for b in rep] for a in rep]
        return FiniteSemigroup(t, check=False).with_marks()


def faithful_quotient_congruence(s: FiniteSemigroup, signatures: Sequence[Hashable]) -> SemigroupCongruence:
    """Identify elements whose actions (given as hashable signatures) coincide."""
    if len(signatures) != s.order:
        raise SemigroupError("one action signature per element required")
    return SemigroupCongruence(_classes(list(signatures)))


# --- groups -------------------------------------------------------------------


def _require_group(g: FiniteSemigroup) -> None:
    if not g.is_group():
        raise NotAGroupError("semigroup is not a group")


def subgroup_generated(g: FiniteSemigroup, gens: Iterable[int]) -> frozenset[int]:
    e = g.find_identity()
    elems = {e}
    frontier = [e]
    gens = list(gens)
    while frontier:
        new = []
        for x in frontier:
            for y in gens:
                z = int(g.table[x, y])
                if z not in elems:
                    elems.add(z)
                    new.append(z)
        frontier = new
    return frozenset(elems)


def is_normal(g: FiniteSemigroup, h: Iterable[int]) -> bool:
    h = set(h)
    inv = g.inverses()
    t = g.table
    return all(int(t[t[inv[x], y], x]) in h for x in range(g.order) for y in h)


def normal_closure(g: FiniteSemigroup, xs: Iterable[int]) -> frozenset[int]:
    inv = g.inverses()
    t = g.table
    conj = {int(t[t[inv[a], x], a]) for x in xs for a in range(g.order)}
    return subgroup_generated(g, conj)


def normal_subgroups(g: FiniteSemigroup) -> list[frozenset[int]]:
    """All normal subgroups, sorted by size then elements (brute force)."""
    _require_group(g)
    check_cap("normal subgroup enumeration", g.order, "group_order")
    e = g.find_identity()
    atoms = {normal_closure(g, [x]) for x in range(g.order)}
    found = {frozenset({e})} | atoms
    frontier = list(atoms)
    while frontier:
        new = []
        for a in frontier:
            for b in atoms:
                if b <= a:
                    continue
                j = normal_closure(g, a | b)
                if j not in found:
                    found.add(j)
                    new.append(j)
        frontier = new
    return sorted(found, key=lambda n: (len(n), sorted(n)))


def is_simple_group(g: FiniteSemigroup) -> bool:
    if not g.is_group() or g.order < 2:
        return False
    return len(normal_subgroups(g)) == 2


def composition_series(g: FiniteSemigroup) -> list[frozenset[int]]:
    """G = N0 > N1 > ... > {e}; each step a maximal normal subgroup of the previous term.

    Among maximal normal subgroups the lexicographically least element list wins.
    """
    _require_group(g)
    series = [frozenset(range(g.order))]
    current_elems = list(range(g.order))
    current = g
    while current.order > 1:
        ns = normal_subgroups(current)
        proper = [n for n in ns if len(n) < current.order]
        maximal = [n for n in proper if not any(n < m for m in proper)]
        nxt = min(maximal, key=lambda n: sorted(n))
        nxt_elems = [current_elems[i] for i in sorted(nxt)]
        series.append(frozenset(nxt_elems))
        current, _ = subsemigroup(g, nxt_elems)
        current_elems = nxt_elems
    return series


def right_cosets(g: FiniteSemigroup, h: Iterable[int]) -> list[list[int]]:
    """Right cosets Hx, ordered by least element; each coset sorted."""
    h = sorted(set(h))
    seen: set[int] = set()
    cosets = []
    for x in range(g.order):
        if x in seen:
            continue
        c = sorted({int(g.table[y, x]) for y in h})
        seen |= set(c)
        cosets.append(c)
    return cosets


def coset_action(g: FiniteSemigroup, h: Iterable[int]) -> tuple[list[list[int]], np.ndarray]:
    """Right multiplication of G on the right cosets of H: ``act[c, g]``."""
    cosets = right_cosets(g, h)
    where = {x: i for i, c in enumerate(cosets) for x in c}
    act = np.array([[where[int(g.table[c[0], x])] for x in range(g.order)] for c in cosets], dtype=np.int64)
    return cosets, act


def quotient_group(g: FiniteSemigroup, n: Iterable[int]) -> tuple[FiniteSemigroup, list[list[int]]]:
    n = set(n)
    if not is_normal(g, n):
        raise NotAGroupError("subgroup is not normal")
    cosets, act = coset_action(g, n)
    where = {x: i for i, c in enumerate(cosets) for x in c}
    t = [[where[int(g.table[a[0], b[0]])] for b in cosets] for a in cosets]
    return FiniteSemigroup(t, identity=where[g.find_identity()]), cosets


# --- wreath product of semigroups ---------------------------------------------


def wreath_semigroup(g1: FiniteSemigroup, action: np.ndarray, g2: FiniteSemigroup) -> FiniteSemigroup:
    """G1^A2 ⋊ G2 with (f, s)(f', s') = (f·(f'∘s), ss'), where (f'∘s)(a) = f'(a∘s).

    ``action[a, s]`` is the G2-action on the carrier A2.  Element (f, s) has
    index ``code(f) * |G2| + s``, with ``code`` the base-|G1| number whose
    most significant digit is f(0).
    """
    action = np.asarray(action, dtype=np.int64)
    k = action.shape[0]
    n1, n2 = g1.order, g2.order
    size = n1**k * n2
    check_cap("wreath product", size, "wreath")
    check_cap("wreath product Cayley table", size, "table")
    nf = n1**k
    digits = np.zeros((nf, k), dtype=np.int64)
    codes = np.arange(nf)
    for a in range(k - 1, -1, -1):
        digits[:, a] = codes % n1
        codes = codes // n1
    weights = n1 ** np.arange(k - 1, -1, -1)
    idx = np.arange(size)
    f_of = idx // n2
    s_of = idx % n2
    table = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        f = digits[f_of[x]]  # (k,)
        s = s_of[x]
        shifted = digits[f_of][:, action[:, s]]  # (size, k): f'(a∘s)
        prod = g1.table[f[None, :], shifted]  # (size, k)
        code = prod @ weights if k else np.zeros(size, dtype=np.int64)
        table[x] = code * n2 + g2.table[s, s_of]
    return FiniteSemigroup(table, check=False).with_marks()


def wreath_decode(g1_order: int, k: int, g2_order: int, index: int) -> tuple[tuple[int, ...], int]:
    f_code, s = divmod(index, g2_order)
    digits = []
    for _ in range(k):
        f_code, d = divmod(f_code, g1_order)
        digits.append(d)
    return tuple(reversed(digits)), s


def wreath_encode(g1_order: int, f: Sequence[int], g2_order: int, s: int) -> int:
    code = 0
    for d in f:
        code = code * g1_order + int(d)
    return code * g2_order + int(s)
