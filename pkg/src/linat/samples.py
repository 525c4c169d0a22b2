"""Small named automata used by the demos, the test corpus and the acceptance runs."""
from __future__ import annotations

import random

import numpy as np

from .automata import LinearAutomaton, PureAutomaton, group_representation, linear_from_generators
from .products import CascadeTriple
from .semigroups import (
    adjoin_zero,
    brandt_b2,
    closure,
    cyclic_group,
    direct_product,
    symmetric_group,
    wreath_decode,
    wreath_semigroup,
)

C3_GEN_GF2 = np.array([[0, 1], [1, 1]])  # order 3 in GL(2, 2)


def s3_rep(p: int, c_img, s_img) -> LinearAutomaton:
    """S3 on GF(p)^2 from images of the 3-cycle (1 2 0) and the transposition (1 0 2)."""
    g, perms = symmetric_group(3)
    c, s = perms.index((1, 2, 0)), perms.index((1, 0, 2))
    rep = group_representation(g, p, {c: np.array(c_img), s: np.array(s_img)})
    return LinearAutomaton(p, 2, 0, g, rep.mats)


def s3_gf7() -> LinearAutomaton:
    """The 2-dim irreducible S3-module over GF(7)."""
    return s3_rep(7, [[0, 1], [6, 6]], [[0, 1], [1, 0]])


def gl22() -> LinearAutomaton:
    """S3 = GL(2, 2) on its natural module; characteristic divides |G|."""
    return s3_rep(2, C3_GEN_GF2, [[0, 1], [1, 0]])


def b2_natural(copies: int = 1) -> LinearAutomaton:
    """Brandt B2 by the 2x2 matrix units (zero first), repeated diagonally ``copies`` times."""
    units = [[[0, 0], [0, 0]], [[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]]
    mats = np.zeros((5, 2 * copies, 2 * copies), dtype=np.int64)
    for i in range(copies):
        mats[:, 2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = units
    return LinearAutomaton(2, 2 * copies, 0, brandt_b2(), mats)


def c3_on_gf2(with_zero: bool = False) -> LinearAutomaton:
    m = C3_GEN_GF2
    mats = [np.eye(2, dtype=np.int64), m, m @ m % 2]
    g = cyclic_group(3)
    if with_zero:
        g = adjoin_zero(g)
        mats.append(np.zeros((2, 2), dtype=np.int64))
    return LinearAutomaton(2, 2, 0, g, np.array(mats))


def unitriangular() -> LinearAutomaton:
    """Upper unitriangular 3x3 matrices over GF(2) read with dim A = 2, dim B = 1."""
    gens = [
        [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 0, 1], [0, 1, 0], [0, 0, 1]],
        [[1, 0, 0], [0, 1, 1], [0, 0, 1]],
    ]
    return linear_from_generators(2, 2, 1, [np.array(g) for g in gens])


def unipotent() -> LinearAutomaton:
    return linear_from_generators(2, 2, 0, [np.array([[1, 1], [0, 1]])])


def random_cascade_triple(a1: PureAutomaton, a2: PureAutomaton, rng: random.Random) -> CascadeTriple:
    """A valid triple whose Γ maps onto a random subsemigroup of Γ1 wr Γ2.

    Γ is generated inside (Γ1 wr Γ2) × C_t for a random t, so it is usually
    larger than its image and the triple is not the wreath's own.
    """
    n1, k, n2 = a1.gamma.order, a2.n_a, a2.gamma.order
    w = wreath_semigroup(a1.gamma, a2.circ, a2.gamma)
    extra = cyclic_group(rng.randint(1, 3))
    host = direct_product(w, extra)
    gens = rng.sample(range(host.order), rng.randint(1, 3))
    cl = closure(gens, lambda x, y: int(host.table[x, y]))
    alpha = np.zeros((cl.semigroup.order, k), dtype=np.int64)
    beta = np.zeros(cl.semigroup.order, dtype=np.int64)
    for i, x in enumerate(cl.elements):
        f, s = wreath_decode(n1, k, n2, x // extra.order)
        alpha[i] = f
        beta[i] = s
    return CascadeTriple(cl.semigroup, alpha, beta)
