"""Primitive operations, brackets and the block-symmetric multioperator.

These are polynomial expressions in a product and its left division, so
they make sense in any unital bialgebra with divisions.  The functions
here are generic over an adapter object providing

    zero() one() add(a,b) sub(a,b) scale(a,c) mul(a,b) ldiv(a,b)
    counit(a) coproduct_terms(a) -> iterable of (a1, a2, coeff)
    is_primitive(a)

and are shared by the free algebra and by distribution bialgebras.

The defining formula, with u and v left-normed products of the argument
blocks and all arguments primitive, is

    p(x1..xm; y1..yn; z) = sum (u_(1) v_(1)) \\ assoc(u_(2), v_(2), z)

where assoc(a, b, c) = (ab)c - a(bc).  The binary bracket is the negated
commutator; higher brackets antisymmetrize p in its last two slots, and
the multioperator symmetrizes p over both blocks.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Sequence


def left_normed_product(ops, factors: Sequence) -> object:
    if not factors:
        return ops.one()
    out = factors[0]
    for factor in factors[1:]:
        out = ops.mul(out, factor)
    return out


def associator(ops, a, b, c):
    return ops.sub(ops.mul(ops.mul(a, b), c), ops.mul(a, ops.mul(b, c)))


def commutator(ops, a, b):
    return ops.sub(ops.mul(a, b), ops.mul(b, a))


def _require_primitive(ops, elements: Sequence) -> None:
    for elem in elements:
        if not ops.is_primitive(elem):
            raise ValueError(f"primitive operations need primitive arguments, got {elem!r}")


def _sum_terms(ops, terms):
    """Sum (element, coefficient) pairs; adapters may provide a fast path."""
    fast = getattr(ops, "sum_terms", None)
    if fast is not None:
        return fast(terms)
    total = ops.zero()
    for elem, coeff in terms:
        total = ops.add(total, ops.scale(elem, coeff))
    return total


def p_operation(ops, xs: Sequence, ys: Sequence, z) -> object:
    if not xs or not ys:
        raise ValueError("p needs non-empty argument blocks")
    _require_primitive(ops, list(xs) + list(ys) + [z])
    u = left_normed_product(ops, xs)
    v = left_normed_product(ops, ys)
    terms = []
    for u1, u2, cu in ops.coproduct_terms(u):
        for v1, v2, cv in ops.coproduct_terms(v):
            terms.append((ops.ldiv(ops.mul(u1, v1), associator(ops, u2, v2, z)), cu * cv))
    return _sum_terms(ops, terms)


def bracket(ops, xs: Sequence, y, z) -> object:
    """The bracket <x1..xm; y, z>; with an empty block it is minus the commutator."""
    _require_primitive(ops, list(xs) + [y, z])
    if not xs:
        return ops.sub(ops.mul(z, y), ops.mul(y, z))
    return ops.sub(p_operation(ops, xs, [z], y), p_operation(ops, xs, [y], z))


def multioperator(ops, xs: Sequence, ys: Sequence) -> object:
    """The multilinear multioperator, symmetrized over both blocks.

    (1/m! n!) sum over permutations of p(x_t(1)..x_t(m); y_s(1)..y_s(n-1); y_s(n)),
    for m >= 1 and n >= 2.
    """
    m, n = len(xs), len(ys)
    if m < 1 or n < 2:
        raise ValueError(f"multioperator needs m >= 1 and n >= 2, got ({m}, {n})")
    _require_primitive(ops, list(xs) + list(ys))
    weight = Fraction(1, factorial(m) * factorial(n))
    terms = []
    for tau in permutations(range(m)):
        xs_p = [xs[i] for i in tau]
        for sigma in permutations(range(n)):
            ys_p = [ys[i] for i in sigma]
            terms.append((p_operation(ops, xs_p, ys_p[:-1], ys_p[-1]), weight))
    return _sum_terms(ops, terms)


def multioperator_component(ops, x, y, i: int, j: int) -> object:
    """Bidegree-(i, j) polynomial component of the multioperator at (x, y).

    Equals multioperator on i copies of x and j copies of y divided by
    i! j!; at repeated arguments every symmetrization term coincides, so
    this is p(x..x; y..y; y) / (i! j!).
    """
    if i < 1 or j < 2:
        raise ValueError(f"multioperator components need i >= 1 and j >= 2, got ({i}, {j})")
    value = p_operation(ops, [x] * i, [y] * (j - 1), y)
    return ops.scale(value, Fraction(1, factorial(i) * factorial(j)))
