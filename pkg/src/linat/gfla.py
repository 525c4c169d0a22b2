"""Dense linear algebra over prime fields GF(p).

Vectors are rows and matrices act on the right (``v @ M``), so a subspace is
invariant under ``M`` when ``S @ M`` stays inside ``S``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


class FieldMismatchError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class NotInvariantError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, -1, self.p)

    def elements(self) -> range:
        return range(self.p)


def _dtype_for(p: int, inner: int):
    # object arrays keep arbitrary precision when int64 accumulation could overflow
    if (p - 1) ** 2 * max(inner, 1) < 2**62:
        return np.int64
    return object


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Raw ``a @ b mod p`` on integer arrays (broadcasts over leading axes)."""
    inner = a.shape[-1]
    if _dtype_for(p, inner) is object:
        return np.asarray(np.matmul(a.astype(object), b.astype(object)) % p, dtype=np.int64)
    return np.matmul(a, b) % p



class FieldMatrix:
    """Immutable dense matrix over GF(p)."""

    __slots__ = ("field", "data", "_hash")

    def __init__(self, field: PrimeField | int, data):
        if isinstance(field, int):
            field = PrimeField(field)
        arr = np.array(data, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
        arr %= field.p
        arr.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):
        raise AttributeError("FieldMatrix is immutable")

    @classmethod
    def identity(cls, field: PrimeField | int, n: int) -> FieldMatrix:
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, field: PrimeField | int, rows: int, cols: int) -> FieldMatrix:
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        return mat_mul(self, other)

    def __add__(self, other: FieldMatrix) -> FieldMatrix:
        _same_field(self, other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return FieldMatrix(self.field, self.data + other.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.p, self.shape, self.data.tobytes())))
        return self._hash

    def __repr__(self) -> str:
        return f"FieldMatrix(p={self.p}, {self.data.tolist()})"


def _same_field(a: FieldMatrix, b: FieldMatrix) -> None:
    if a.p != b.p:
        raise FieldMismatchError(f"GF({a.p}) vs GF({b.p})")


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    _same_field(a, b)
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return FieldMatrix(a.field, matmul_mod(a.data, b.data, a.p))


def direct_sum(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    """Block-diagonal ``[[a, 0], [0, b]]``."""
    _same_field(a, b)
    out = np.zeros((a.rows + b.rows, a.cols + b.cols), dtype=np.int64)
    out[: a.rows, : a.cols] = a.data
    out[a.rows :, a.cols :] = b.data
    return FieldMatrix(a.field, out)


def kron(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    _same_field(a, b)
    if a.data.size == 0 or b.data.size == 0:
        return FieldMatrix.zeros(a.field, a.rows * b.rows, a.cols * b.cols)
    return FieldMatrix(a.field, np.kron(a.data, b.data) % a.p)


# --- row reduction -----------------------------------------------------------


def rref(data: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p; zero rows are dropped."""
    m = np.array(data, dtype=np.int64) % p
    if m.ndim != 2:
        raise DimensionError("rref expects a 2-d array")
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = np.nonzero(m[:, c])[0]
        for i in others:
            if i != r:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[:r].copy(), pivots


def rank(a: FieldMatrix) -> int:
    return len(rref(a.data, a.p)[1])


def inverse(a: FieldMatrix) -> FieldMatrix:
    if a.rows != a.cols:
        raise DimensionError("only square matrices are invertible")
    n = a.rows
    aug = np.concatenate([a.data, np.eye(n, dtype=np.int64)], axis=1)
    red, piv = rref(aug, a.p)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("matrix is singular")
    return FieldMatrix(a.field, red[:, n:])


def left_inverse(h: np.ndarray, p: int) -> np.ndarray:
    """``L`` with ``L @ h = I`` for ``h`` of full column rank (k x d, k >= d)."""
    k, d = h.shape
    _, piv = rref(np.asarray(h).T, p)  # pivot columns of h^T = independent rows of h
    if len(piv) < d:
        raise ValueError("matrix does not have full column rank")
    square = FieldMatrix(p, np.asarray(h)[piv])
    out = np.zeros((d, k), dtype=np.int64)
    if d:
        out[:, piv] = inverse(square).data
    return out


def right_nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Rows x spanning {x : a @ x = 0}."""
    a = np.asarray(a, dtype=np.int64)
    cols = a.shape[1]
    red, piv = rref(a, p) if a.shape[0] else (np.zeros((0, cols), dtype=np.int64), [])
    free = [c for c in range(cols) if c not in piv]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for r, f in enumerate(free):
        out[r, f] = 1
        for i, c in enumerate(piv):
            out[r, c] = (-red[i, f]) % p
    return out


def left_nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Rows v spanning {v : v @ a = 0}."""
    return right_nullspace(np.asarray(a, dtype=np.int64).T, p)


def solve_rows(y: np.ndarray, basis: np.ndarray, p: int) -> np.ndarray | None:
    """X with X @ basis = y for a full-row-rank ``basis``, or None if some row lies outside."""
    basis = np.asarray(basis, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64) % p
    k = basis.shape[0]
    if k == 0:
        return np.zeros((y.shape[0], 0), dtype=np.int64) if not y.any() else None
    _, piv = rref(basis, p)
    if len(piv) < k:
        raise DimensionError("basis rows are dependent")
    x = matmul_mod(y[:, piv], inverse(FieldMatrix(p, basis[:, piv])).data, p)
    if not np.array_equal(matmul_mod(x, basis, p), y):
        return None
    return x


def preimage_rows(h: np.ndarray, sub_basis: np.ndarray, p: int) -> np.ndarray:
    """Basis of {v : v @ h lies in the row space of ``sub_basis``}."""
    h = np.asarray(h, dtype=np.int64)
    sub_basis = np.asarray(sub_basis, dtype=np.int64).reshape(-1, h.shape[1])
    ann = right_nullspace(sub_basis, p) if sub_basis.shape[0] else np.eye(h.shape[1], dtype=np.int64)
    if ann.shape[0] == 0:
        return np.eye(h.shape[0], dtype=np.int64)
    return left_nullspace(matmul_mod(h, ann.T, p), p)


# --- subspaces ---------------------------------------------------------------


class Subspace:
    """Row space in GF(p)^n held as a reduced row echelon basis."""

    __slots__ = ("p", "ambient", "basis", "pivots")

    def __init__(self, p: int, ambient: int, vectors=None):
        self.p = p
        self.ambient = ambient
        if vectors is None or len(vectors) == 0:
            self.basis = np.zeros((0, ambient), dtype=np.int64)
            self.pivots: list[int] = []
        else:
            arr = np.array(vectors, dtype=np.int64).reshape(-1, ambient)
            self.basis, self.pivots = rref(arr, p)
        self.basis.setflags(write=False)

    @classmethod
    def zero(cls, p: int, n: int) -> Subspace:
        return cls(p, n)

    @classmethod
    def whole(cls, p: int, n: int) -> Subspace:
        return cls(p, n, np.eye(n, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.ambient - self.dim

    @property
    def nonpivots(self) -> list[int]:
        piv = set(self.pivots)
        return [j for j in range(self.ambient) if j not in piv]

    def reduce(self, v: np.ndarray) -> np.ndarray:
        """Reduce ``v`` (or a stack of rows) modulo the subspace."""
        v = np.array(v, dtype=np.int64) % self.p
        if self.dim == 0:
            return v
        coeff = v[..., self.pivots]
        return (v - coeff @ self.basis) % self.p

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    def contains_all(self, rows: np.ndarray) -> bool:
        rows = np.asarray(rows)
        return rows.size == 0 or not self.reduce(rows).any()

    def coordinates(self, v: np.ndarray) -> np.ndarray:
        """Coordinates in the echelon basis (pivot entries); assumes membership."""
        return np.asarray(v, dtype=np.int64)[..., self.pivots] % self.p

    def __le__(self, other: Subspace) -> bool:
        return other.contains_all(self.basis)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.p == other.p and self.ambient == other.ambient and np.array_equal(self.basis, other.basis)

    def __hash__(self) -> int:
        return hash((self.p, self.ambient, self.basis.tobytes()))

    def key(self) -> tuple:
        """Sort key: dimension first, then echelon entries."""
        return (self.dim, tuple(self.basis.ravel().tolist()))

    def join(self, other: Subspace) -> Subspace:
        return Subspace(self.p, self.ambient, np.concatenate([self.basis, other.basis]))

    def is_invariant(self, m) -> bool:
        data = m.data if isinstance(m, FieldMatrix) else np.asarray(m)
        if self.dim == 0:
            return True
        return self.contains_all(matmul_mod(self.basis, data, self.p))

    def __repr__(self) -> str:
        return f"Subspace(p={self.p}, ambient={self.ambient}, basis={self.basis.tolist()})"


def _action_arrays(action, p: int, n: int) -> list[np.ndarray]:
    out = []
    for m in action:
        if isinstance(m, FieldMatrix):
            if m.p != p:
                raise FieldMismatchError(f"GF({m.p}) vs GF({p})")
            m = m.data
        m = np.asarray(m, dtype=np.int64)
        if m.shape != (n, n):
            raise DimensionError(f"action matrix of shape {m.shape} on ambient dimension {n}")
        out.append(m)
    return out


def spin(seed: Subspace, action: Iterable) -> Subspace:
    """Smallest subspace containing ``seed`` and closed under every matrix."""
    p, n = seed.p, seed.ambient
    mats = _action_arrays(action, p, n)
    rows: dict[int, np.ndarray] = {}

    def add(v: np.ndarray) -> np.ndarray | None:
        v = v % p
        for c, r in rows.items():
            if v[c]:
                v = (v - v[c] * r) % p
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return None
        c = int(nz[0])
        v = (v * pow(int(v[c]), -1, p)) % p
        for k, r in rows.items():
            if r[c]:
                rows[k] = (r - r[c] * v) % p
        rows[c] = v
        return v

    queue = [r for r in (add(b.copy()) for b in seed.basis) if r is not None]
    while queue:
        v = queue.pop()
        for m in mats:
            w = add(matmul_mod(v, m, p))
            if w is not None:
                queue.append(w)
                if len(rows) == n:
                    return Subspace.whole(p, n)
    if not rows:
        return Subspace.zero(p, n)
    return Subspace(p, n, np.array(list(rows.values())))


def quotient_matrix(m: np.ndarray, sub: Subspace) -> np.ndarray:
    """Induced map on ``V / sub`` in the basis of non-pivot standard vectors."""
    m = np.asarray(m, dtype=np.int64)
    np_cols = sub.nonpivots
    if not sub.is_invariant(m):
        raise NotInvariantError("subspace is not invariant under the matrix")
    if not np_cols:
        return np.zeros((0, 0), dtype=np.int64)
    images = m[np_cols]  # e_j @ m
    red = sub.reduce(images)
    return red[:, np_cols] % sub.p


def restrict_matrix(m: np.ndarray, sub: Subspace) -> np.ndarray:
    """Action on an invariant subspace, in its echelon basis."""
    m = np.asarray(m, dtype=np.int64)
    if sub.dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    images = matmul_mod(sub.basis, m, sub.p)
    if not sub.contains_all(images):
        raise NotInvariantError("subspace is not invariant under the matrix")
    return sub.coordinates(images)


def quotient_action(m: FieldMatrix, sub: Subspace) -> FieldMatrix:
    if m.rows != m.cols or m.rows != sub.ambient:
        raise DimensionError("matrix and subspace dimensions differ")
    if m.p != sub.p:
        raise FieldMismatchError(f"GF({m.p}) vs GF({sub.p})")
    return FieldMatrix(m.field, quotient_matrix(m.data, sub))


def restrict_action(m: FieldMatrix, sub: Subspace) -> FieldMatrix:
    if m.rows != m.cols or m.rows != sub.ambient:
        raise DimensionError("matrix and subspace dimensions differ")
    return FieldMatrix(m.field, restrict_matrix(m.data, sub))


def lift_subspace(sub_of_quotient: Subspace, base: Subspace) -> Subspace:
    """Preimage in V of a subspace of ``V / base`` (quotient coordinates = non-pivots)."""
    cols = base.nonpivots
    lifted = np.zeros((sub_of_quotient.dim, base.ambient), dtype=np.int64)
    if sub_of_quotient.dim:
        lifted[:, cols] = sub_of_quotient.basis
    return Subspace(base.p, base.ambient, np.concatenate([base.basis, lifted]))


def embed_subspace(inner: Subspace, outer: Subspace) -> Subspace:
    """Image in V of a subspace given in the echelon coordinates of ``outer``."""
    if inner.dim == 0:
        return Subspace.zero(outer.p, outer.ambient)
    return Subspace(outer.p, outer.ambient, matmul_mod(inner.basis, outer.basis, outer.p))


# --- enumeration helpers -------------------------------------------------------


def all_vectors(p: int, n: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(p), repeat=n)


def vector_array(p: int, n: int) -> np.ndarray:
    """Every vector of GF(p)^n as rows, in lexicographic order."""
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64).reshape(p**n, n)


def projective_points(p: int, n: int) -> Iterator[np.ndarray]:
    """Nonzero vectors whose first nonzero entry is 1, in lexicographic order."""
    for v in all_vectors(p, n):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            yield np.array(v, dtype=np.int64)


def all_subspaces(p: int, n: int) -> list[Subspace]:
    """Every subspace of GF(p)^n, enumerated through echelon forms."""
    out = [Subspace.zero(p, n)]
    for k in range(1, n + 1):
        for piv in itertools.combinations(range(n), k):
            free = [(r, c) for r, pc in enumerate(piv) for c in range(pc + 1, n) if c not in piv]
            for vals in itertools.product(range(p), repeat=len(free)):
                b = np.zeros((k, n), dtype=np.int64)
                for r, pc in enumerate(piv):
                    b[r, pc] = 1
                for (r, c), x in zip(free, vals):
                    b[r, c] = x
                out.append(Subspace(p, n, b))
    return out


def all_matrices(p: int, rows: int, cols: int) -> Iterator[np.ndarray]:
    for vals in itertools.product(range(p), repeat=rows * cols):
        yield np.array(vals, dtype=np.int64).reshape(rows, cols)


def encode(arr: np.ndarray, p: int) -> int:
    """Base-p integer code of a flattened array (first entry most significant)."""
    code = 0
    for x in np.asarray(arr).ravel().tolist():
        code = code * p + int(x)
    return code


def block_diag_stack(blocks: Sequence[np.ndarray]) -> np.ndarray:
    sizes = [b.shape[0] for b in blocks]
    out = np.zeros((sum(sizes), sum(sizes)), dtype=np.int64)
    o = 0
    for b, s in zip(blocks, sizes):
        out[o : o + s, o : o + s] = b
        o += s
    return out
