"""Rooted binary plane trees, Bernoulli numbers and tree-indexed Bernoulli data.

A non-associative monomial in one variable is a rooted binary plane tree;
its degree is the number of leaves.  Every tree other than the bare leaf
decomposes uniquely as a left comb

    t = (...((x t1) t2) ...) tk

with x the leftmost leaf.  This decomposition is a bijection between
binary trees with n leaves and general plane rooted trees with n vertices
(the root of the general tree has children t1 ... tk), and it drives both
the tree factorial / tree Bernoulli recursions and the weighted tree sums.

Trees encode canonically as fully parenthesized strings over the single
letter ``x``: a leaf is ``x`` and a node is ``(<left><right>)``.  The
deterministic enumeration order is lexicographic on that encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .scalars import rat


@dataclass(frozen=True)
class PlaneTree:
    """A rooted binary plane tree; a leaf has both children set to None."""

    left: "PlaneTree | None" = None
    right: "PlaneTree | None" = None

    def __post_init__(self) -> None:
        if (self.left is None) != (self.right is None):
            raise ValueError("a tree node needs both children")

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def degree(self) -> int:
        """Number of leaves."""
        if self.is_leaf:
            return 1
        return self.left.degree() + self.right.degree()

    def encode(self) -> str:
        if self.is_leaf:
            return "x"
        return f"({self.left.encode()}{self.right.encode()})"

    def left_comb(self) -> tuple["PlaneTree", ...]:
        """Subtrees (t1, ..., tk) with self = (...((x t1) t2)...) tk.

        Empty for a leaf.  t1 is the deepest factor on the left spine.
        """
        parts: list[PlaneTree] = []
        node = self
        while not node.is_leaf:
            parts.append(node.right)
            node = node.left
        parts.reverse()
        return tuple(parts)

    def __repr__(self) -> str:
        return f"PlaneTree[{self.encode()}]"


LEAF = PlaneTree()


def parse_tree(text: str) -> PlaneTree:
    """Inverse of PlaneTree.encode; rejects anything non-canonical."""
    pos = 0

    def expr() -> PlaneTree:
        nonlocal pos
        if pos >= len(text):
            raise ValueError(f"unexpected end of tree encoding at offset {pos}")
        ch = text[pos]
        if ch == "x":
            pos += 1
            return LEAF
        if ch == "(":
            pos += 1
            left = expr()
            right = expr()
            if pos >= len(text) or text[pos] != ")":
                raise ValueError(f"expected ')' at offset {pos} in tree encoding")
            pos += 1
            return PlaneTree(left, right)
        raise ValueError(f"unexpected character {ch!r} at offset {pos} in tree encoding")

    tree = expr()
    if pos != len(text):
        raise ValueError(f"trailing input at offset {pos} in tree encoding")
    return tree


@lru_cache(maxsize=None)
def enumerate_trees(n: int) -> tuple[PlaneTree, ...]:
    """All binary plane trees with n leaves, ordered by encoding.

    There are Catalan(n-1) of them.  Safe under concurrent use: a race can
    only recompute the same tuple.
    """
    if n < 1:
        raise ValueError(f"tree degree must be >= 1, got {n}")
    if n == 1:
        return (LEAF,)
    out = [
        PlaneTree(left, right)
        for i in range(1, n)
        for left in enumerate_trees(i)
        for right in enumerate_trees(n - i)
    ]
    out.sort(key=PlaneTree.encode)
    return tuple(out)


@lru_cache(maxsize=None)
def bernoulli_number(k: int) -> Fraction:
    """The k-th Bernoulli number, with B1 = -1/2.

    Defined by B0 = 1 and, for n >= 2, sum_{k=0}^{n-1} B_k / (k! (n-k)!) = 0;
    solving that relation for its top term gives the recursion used here.
    """
    if k < 0:
        raise ValueError(f"Bernoulli index must be >= 0, got {k}")
    if k == 0:
        return Fraction(1)
    n = k + 1
    acc = Fraction(0)
    for j in range(k):
        acc += bernoulli_number(j) / (factorial(j) * factorial(n - j))
    return -factorial(k) * acc


@lru_cache(maxsize=None)
def tree_stats(tree: PlaneTree) -> tuple[Fraction, int]:
    """The tree Bernoulli number B_t and the tree factorial t!.

    For the leaf both are 1; for t = (...((x t1) t2)...) tk,
    B_t = B_k * B_{t1} ... B_{tk} and t! = k! * t1! ... tk!.
    """
    if tree.is_leaf:
        return Fraction(1), 1
    comb = tree.left_comb()
    bern = bernoulli_number(len(comb))
    fact = factorial(len(comb))
    for part in comb:
        b, f = tree_stats(part)
        bern *= b
        fact *= f
    return bern, fact


def bernoulli_tree_sum(n: int) -> Fraction:
    """sum of B_t / t! over all trees t of degree n."""
    total = Fraction(0)
    for tree in enumerate_trees(n):
        b, f = tree_stats(tree)
        total += b / f
    return total


def weighted_tree_sum(n: int, beta: Sequence[int | str | Fraction]) -> Fraction:
    """Weighted count of plane rooted trees with n vertices.

    beta[r-1] is the weight of a vertex with r outgoing branches; a tree
    weighs the product of its per-vertex weights (leaves weigh 1) and the
    result sums the weights over all trees of degree n.  Trees are walked
    in their binary form through the left-comb bijection, so the weight of
    a comb (...((x t1) t2)...) tk is beta[k-1] times the factor weights.

    Weights must be provided up to index n-1; beta = (B_r / r!) reproduces
    bernoulli_tree_sum and beta = (1, 1, ...) counts the trees.
    """
    if n < 1:
        raise ValueError(f"tree degree must be >= 1, got {n}")
    weights = [rat(b) for b in beta]

    def weight(tree: PlaneTree) -> Fraction:
        if tree.is_leaf:
            return Fraction(1)
        comb = tree.left_comb()
        k = len(comb)
        if k > len(weights):
            raise ValueError(f"missing weight for vertices with {k} branches")
        value = weights[k - 1]
        for part in comb:
            value *= weight(part)
        return value

    return sum((weight(t) for t in enumerate_trees(n)), Fraction(0))


def bernoulli_weights(count: int) -> list[Fraction]:
    """The weight sequence B_r / r! for r = 1 .. count."""
    return [bernoulli_number(r) / factorial(r) for r in range(1, count + 1)]
