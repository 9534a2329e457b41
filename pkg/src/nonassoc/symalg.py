"""The symmetric coalgebra k[V] on a finite-dimensional space.

Monomials are exponent vectors (dense tuples of non-negative ints) and
elements are sparse maps from monomials to exact rationals.  The coproduct
is the unique algebra morphism making every vector primitive:

    coproduct(e^a) = sum over 0 <= b <= a of prod(binom(a_i, b_i)) e^b (x) e^(a-b)

The counit extracts the degree-0 coefficient and the primitive projection
the degree-1 part.  Elements double as formal distributions supported at
the origin: the monomial e^a is the derivative operator d^a evaluated at 0,
which pairs with the coefficient of x^a in a power series through the
factor a! = prod(a_i!).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product as iter_product
from math import comb, factorial
from typing import Callable, Iterator, Sequence

from .scalars import Vector, format_rational, parse_rational, rat

Monomial = tuple[int, ...]


def unit_monomial(dim: int) -> Monomial:
    return (0,) * dim


def basis_monomial(dim: int, index: int) -> Monomial:
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    return tuple(1 if i == index else 0 for i in range(dim))


def monomial_degree(mono: Monomial) -> int:
    return sum(mono)


def monomial_factorial(mono: Monomial) -> int:
    out = 1
    for a in mono:
        out *= factorial(a)
    return out


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def monomial_letters(mono: Monomial) -> list[int]:
    """The multiset of basis indices of a monomial, as a sorted list."""
    out: list[int] = []
    for i, a in enumerate(mono):
        out.extend([i] * a)
    return out


def monomials(dim: int, degree: int) -> Iterator[Monomial]:
    """All exponent vectors of the given degree, lexicographically."""
    if dim == 0:
        if degree == 0:
            yield ()
        return
    if dim == 1:
        yield (degree,)
        return
    for head in range(degree, -1, -1):
        for tail in monomials(dim - 1, degree - head):
            yield (head,) + tail


def monomials_up_to(dim: int, max_degree: int) -> Iterator[Monomial]:
    for degree in range(max_degree + 1):
        yield from monomials(dim, degree)


def sym_dim(dim: int, degree: int) -> int:
    """Dimension of the degree-k graded piece of k[V]."""
    return comb(degree + dim - 1, dim - 1)


def submonomials(mono: Monomial, degree: int) -> Iterator[tuple[Monomial, int]]:
    """All b <= mono with |b| = degree, paired with prod(binom(a_i, b_i))."""

    def rec(i: int, left: int) -> Iterator[tuple[tuple[int, ...], int]]:
        if i == len(mono):
            if left == 0:
                yield (), 1
            return
        for take in range(min(mono[i], left) + 1):
            c = comb(mono[i], take)
            for rest, cr in rec(i + 1, left - take):
                yield (take,) + rest, c * cr

    yield from rec(0, degree)


@lru_cache(maxsize=None)
def monomial_splits(mono: Monomial) -> tuple[tuple[Monomial, Monomial, int], ...]:
    """Coproduct support of a monomial: (b, mono - b, binomial weight)."""
    out = []
    for deg in range(monomial_degree(mono) + 1):
        for sub, coeff in submonomials(mono, deg):
            rest = tuple(a - b for a, b in zip(mono, sub))
            out.append((sub, rest, coeff))
    return tuple(out)


class SymElement:
    """A sparse element of k[V]; immutable by convention."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict[Monomial, Fraction] | None = None):
        self.dim = dim
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if coeff != 0:
                if len(mono) != dim:
                    raise ValueError(f"monomial {mono} has wrong dimension, expected {dim}")
                clean[mono] = Fraction(coeff)
        self.terms = clean

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "SymElement":
        return cls(dim, {})

    @classmethod
    def one(cls, dim: int) -> "SymElement":
        return cls(dim, {unit_monomial(dim): Fraction(1)})

    @classmethod
    def basis(cls, dim: int, index: int) -> "SymElement":
        return cls(dim, {basis_monomial(dim, index): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: int | str | Fraction = 1) -> "SymElement":
        return cls(len(exps), {tuple(exps): rat(coeff)})

    @classmethod
    def from_vector(cls, vec: Vector) -> "SymElement":
        dim = len(vec)
        return cls(dim, {basis_monomial(dim, i): c for i, c in enumerate(vec) if c != 0})

    # -- linear structure -------------------------------------------------
    def _check(self, other: "SymElement") -> None:
        if not isinstance(other, SymElement):
            raise TypeError(f"expected SymElement, got {type(other).__name__}")
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "SymElement") -> "SymElement":
        self._check(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        return SymElement(self.dim, terms)

    def __sub__(self, other: "SymElement") -> "SymElement":
        return self + (-other)

    def __neg__(self) -> "SymElement":
        return self.scale(Fraction(-1))

    def scale(self, c: int | Fraction) -> "SymElement":
        if c == 0:
            return SymElement.zero(self.dim)
        return SymElement(self.dim, {m: c * v for m, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __mul__(self, other):
        """Symmetric-algebra product (exponent addition); also scalar scaling."""
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = monomial_mul(m1, m2)
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return SymElement(self.dim, terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SymElement)
            and self.dim == other.dim
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    # -- coalgebra structure ----------------------------------------------
    def counit(self) -> Fraction:
        return self.terms.get(unit_monomial(self.dim), Fraction(0))

    def primitive_part(self) -> Vector:
        out = [Fraction(0)] * self.dim
        for mono, coeff in self.terms.items():
            if monomial_degree(mono) == 1:
                out[mono.index(1)] = coeff
        return tuple(out)

    def coproduct(self) -> "SymTensor":
        terms: dict[tuple[Monomial, ...], Fraction] = {}
        for mono, coeff in self.terms.items():
            for left, right, weight in monomial_splits(mono):
                key = (left, right)
                terms[key] = terms.get(key, Fraction(0)) + coeff * weight
        return SymTensor((self.dim, self.dim), terms)

    def coproduct_terms(self) -> Iterator[tuple[Monomial, Monomial, Fraction]]:
        """Stream the Sweedler terms of the coproduct without building a tensor."""
        for mono, coeff in self.terms.items():
            for left, right, weight in monomial_splits(mono):
                yield left, right, coeff * weight

    # -- grading ------------------------------------------------------------
    def max_degree(self) -> int:
        return max((monomial_degree(m) for m in self.terms), default=0)

    def graded_piece(self, degree: int) -> "SymElement":
        return SymElement(
            self.dim,
            {m: c for m, c in self.terms.items() if monomial_degree(m) == degree},
        )

    def truncate(self, max_degree: int) -> "SymElement":
        return SymElement(
            self.dim,
            {m: c for m, c in self.terms.items() if monomial_degree(m) <= max_degree},
        )

    def map_coefficients(self, fn: Callable[[Fraction], Fraction]) -> "SymElement":
        return SymElement(self.dim, {m: fn(c) for m, c in self.terms.items()})

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: (monomial_degree(mc[0]), mc[0]))

    # -- io -------------------------------------------------------------------
    def __repr__(self) -> str:
        if not self.terms:
            return "SymElement(0)"
        bits = []
        for mono, coeff in self.sorted_terms():
            name = "".join(
                f"e{i + 1}^{a}" if a > 1 else f"e{i + 1}"
                for i, a in enumerate(mono)
                if a
            ) or "1"
            bits.append(f"{format_rational(coeff)}*{name}")
        return "SymElement(" + " + ".join(bits) + ")"

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"exps": list(mono), "coeff": format_rational(coeff)}
                for mono, coeff in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymElement":
        terms = {
            tuple(item["exps"]): parse_rational(item["coeff"]) for item in data["terms"]
        }
        return cls(data["dim"], terms)


class SymTensor:
    """A sparse element of k[V1] (x) ... (x) k[Vn]."""

    __slots__ = ("dims", "terms")

    def __init__(
        self,
        dims: Sequence[int],
        terms: dict[tuple[Monomial, ...], Fraction] | None = None,
    ):
        self.dims = tuple(dims)
        clean: dict[tuple[Monomial, ...], Fraction] = {}
        for key, coeff in (terms or {}).items():
            if coeff != 0:
                if len(key) != len(self.dims) or any(
                    len(m) != d for m, d in zip(key, self.dims)
                ):
                    raise ValueError(f"tensor key {key} does not match dims {self.dims}")
                clean[tuple(key)] = Fraction(coeff)
        self.terms = clean

    @classmethod
    def of(cls, *factors: SymElement) -> "SymTensor":
        dims = tuple(f.dim for f in factors)
        terms: dict[tuple[Monomial, ...], Fraction] = {}
        for combo in iter_product(*(f.terms.items() for f in factors)):
            key = tuple(mono for mono, _ in combo)
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return cls(dims, terms)

    def _check(self, other: "SymTensor") -> None:
        if self.dims != other.dims:
            raise ValueError(f"tensor dims mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._check(other)
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return SymTensor(self.dims, terms)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return self + other.scale(Fraction(-1))

    def scale(self, c: int | Fraction) -> "SymTensor":
        return SymTensor(self.dims, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "SymTensor") -> "SymTensor":
        """Slotwise symmetric product (the algebra structure of the tensor square)."""
        self._check(other)
        terms: dict[tuple[Monomial, ...], Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(monomial_mul(a, b) for a, b in zip(k1, k2))
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return SymTensor(self.dims, terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SymTensor)
            and self.dims == other.dims
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dims, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def counit(self) -> Fraction:
        unit = tuple(unit_monomial(d) for d in self.dims)
        return self.terms.get(unit, Fraction(0))

    def slot(self, index: int) -> int:
        return self.dims[index]

    def truncate(self, max_degree: int) -> "SymTensor":
        return SymTensor(
            self.dims,
            {
                k: c
                for k, c in self.terms.items()
                if sum(monomial_degree(m) for m in k) <= max_degree
            },
        )

    def __repr__(self) -> str:
        return f"SymTensor(dims={self.dims}, nterms={len(self.terms)})"


def merge_slots(tensor: SymTensor, grouping: Sequence[Sequence[int]]) -> SymTensor:
    """Regroup by merging each group of slots into one via the product.

    grouping must be a partition of range(len(dims)) into non-empty groups
    of slots of equal dimension; group order gives the output slot order.
    Counit-compatible: the merged tensor has the same counit.
    """
    nslots = len(tensor.dims)
    seen = [slot for group in grouping for slot in group]
    if sorted(seen) != list(range(nslots)):
        raise ValueError(f"grouping {grouping!r} is not a partition of {nslots} slots")
    dims_out = []
    for group in grouping:
        if not group:
            raise ValueError("empty group in slot partition")
        d = tensor.dims[group[0]]
        if any(tensor.dims[s] != d for s in group):
            raise ValueError(f"group {group!r} mixes slot dimensions")
        dims_out.append(d)
    terms: dict[tuple[Monomial, ...], Fraction] = {}
    for key, coeff in tensor.terms.items():
        out_key = []
        for group in grouping:
            merged = unit_monomial(tensor.dims[group[0]])
            for s in group:
                merged = monomial_mul(merged, key[s])
            out_key.append(merged)
        out = tuple(out_key)
        terms[out] = terms.get(out, Fraction(0)) + coeff
    return SymTensor(dims_out, terms)


def split_slot(tensor: SymTensor, slot: int, count: int) -> SymTensor:
    """Regroup by splitting one slot into `count` slots via the iterated coproduct."""
    if count < 1:
        raise ValueError("a slot splits into at least one slot")
    if not 0 <= slot < len(tensor.dims):
        raise ValueError(f"slot {slot} out of range")
    dim = tensor.dims[slot]
    dims_out = tensor.dims[:slot] + (dim,) * count + tensor.dims[slot + 1 :]

    def splits(mono: Monomial, n: int) -> Iterator[tuple[tuple[Monomial, ...], int]]:
        if n == 1:
            yield (mono,), 1
            return
        for left, rest, weight in monomial_splits(mono):
            for tail, wt in splits(rest, n - 1):
                yield (left,) + tail, weight * wt

    terms: dict[tuple[Monomial, ...], Fraction] = {}
    for key, coeff in tensor.terms.items():
        for parts, weight in splits(key[slot], count):
            out = key[:slot] + parts + key[slot + 1 :]
            terms[out] = terms.get(out, Fraction(0)) + coeff * weight
    return SymTensor(dims_out, terms)


def iterated_coproduct(element: SymElement, slots: int) -> SymTensor:
    """Delta^(slots-1), landing in k[V] tensored with itself `slots` times."""
    tensor = SymTensor.of(element)
    if slots == 1:
        return tensor
    return split_slot(tensor, 0, slots)
