"""Formal vector fields, flat connections, torsion and the induced brackets.

A formal vector field is a linear map k[V] -> V given by a table on the
monomials up to a degree bound; fields combine through the symmetric
algebra product of k[V] (never the loop product).  A flat connection is a
table (monomial, tangent vector) -> vector restricting to the identity on
1 (x) V; the one of a loop is the restriction of the loop to k[V] (x) V.

Covariant differentiation consumes one degree of the bound per
application, which is why an n-fold bracket needs n + 2 <= N.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .maps import FormalLoop
from .scalars import (
    Vector,
    basis_vector,
    vec_add,
    vec_scale,
    vec_sub,
    zero_vector,
)
from .symalg import (
    Monomial,
    SymElement,
    basis_monomial,
    monomial_degree,
    monomial_splits,
    monomials_up_to,
    unit_monomial,
)


class FormalVectorField:
    """A linear map k[V] -> V, total on monomials up to its degree bound.

    Derived fields (brackets, covariant derivatives) are defined by their
    formulas and evaluated on demand with caching; fields built from an
    explicit table must be total and reject anything partial up front.
    """

    def __init__(self, dim: int, max_degree: int, fn: Callable[[Monomial], Vector]):
        if max_degree < 0:
            raise ValueError("vector field degree bound must be >= 0")
        self.dim = dim
        self.max_degree = max_degree
        self._fn = fn
        self._cache: dict[Monomial, Vector] = {}

    @classmethod
    def from_table(cls, dim: int, max_degree: int, table: dict[Monomial, Vector]) -> "FormalVectorField":
        data = {tuple(m): tuple(Fraction(c) for c in v) for m, v in table.items()}
        for mono in monomials_up_to(dim, max_degree):
            if mono not in data:
                raise ValueError(f"partial table: no value at monomial {mono}")
        field = cls(dim, max_degree, lambda mono: data[mono])
        return field

    def at(self, mono: Monomial) -> Vector:
        mono = tuple(mono)
        if monomial_degree(mono) > self.max_degree:
            raise ValueError(
                f"monomial of degree {monomial_degree(mono)} beyond the field bound {self.max_degree}"
            )
        hit = self._cache.get(mono)
        if hit is None:
            hit = self._fn(mono)
            self._cache[mono] = hit
        return hit

    def on_elem(self, elem: SymElement) -> Vector:
        out = zero_vector(self.dim)
        for mono, coeff in elem.terms.items():
            out = vec_add(out, vec_scale(coeff, self.at(mono)))
        return out

    def table(self, max_degree: int | None = None) -> dict[Monomial, Vector]:
        cap = self.max_degree if max_degree is None else max_degree
        return {mono: self.at(mono) for mono in monomials_up_to(self.dim, cap)}

    def __add__(self, other: "FormalVectorField") -> "FormalVectorField":
        self._compatible(other)
        bound = min(self.max_degree, other.max_degree)
        return FormalVectorField(self.dim, bound, lambda m: vec_add(self.at(m), other.at(m)))

    def __sub__(self, other: "FormalVectorField") -> "FormalVectorField":
        self._compatible(other)
        bound = min(self.max_degree, other.max_degree)
        return FormalVectorField(self.dim, bound, lambda m: vec_sub(self.at(m), other.at(m)))

    def scale(self, c: Fraction) -> "FormalVectorField":
        return FormalVectorField(self.dim, self.max_degree, lambda m: vec_scale(c, self.at(m)))

    def _compatible(self, other: "FormalVectorField") -> None:
        if self.dim != other.dim:
            raise ValueError("vector fields on different spaces")

    def __repr__(self) -> str:
        return f"FormalVectorField(dim={self.dim}, max_degree={self.max_degree})"


class FormalFunction:
    """An element of the graded dual, as a finite coefficient table (0 elsewhere)."""

    def __init__(self, dim: int, table: dict[Monomial, Fraction]):
        self.dim = dim
        self.table = {tuple(m): Fraction(c) for m, c in table.items()}

    def at(self, mono: Monomial) -> Fraction:
        return self.table.get(tuple(mono), Fraction(0))

    def on_elem(self, elem: SymElement) -> Fraction:
        return sum((c * self.at(m) for m, c in elem.terms.items()), Fraction(0))


class FlatConnection:
    """A linear map k[V] (x) V -> V whose restriction to 1 (x) V is the identity."""

    def __init__(self, dim: int, max_degree: int, star_fn: Callable[[Monomial, int], Vector]):
        self.dim = dim
        self.max_degree = max_degree  # bound on the k[V] argument
        self._fn = star_fn
        self._star_cache: dict[tuple[Monomial, int], Vector] = {}
        self._inv_cache: dict[tuple[Monomial, int], Vector] = {}
        for j in range(dim):
            if self.star(unit_monomial(dim), j) != basis_vector(dim, j):
                raise ValueError("a flat connection restricts to the identity on 1 (x) V")

    @classmethod
    def from_table(cls, dim: int, max_degree: int, table: dict[tuple[Monomial, int], Vector]) -> "FlatConnection":
        data = {(tuple(m), j): tuple(Fraction(c) for c in v) for (m, j), v in table.items()}
        for mono in monomials_up_to(dim, max_degree):
            for j in range(dim):
                if (mono, j) not in data:
                    raise ValueError(f"partial table: no value at ({mono}, {j})")
        return cls(dim, max_degree, lambda mono, j: data[(mono, j)])

    def star(self, mono: Monomial, j: int) -> Vector:
        mono = tuple(mono)
        if monomial_degree(mono) > self.max_degree:
            raise ValueError(
                f"monomial of degree {monomial_degree(mono)} beyond the connection bound "
                f"{self.max_degree}"
            )
        key = (mono, j)
        hit = self._star_cache.get(key)
        if hit is None:
            hit = self._fn(mono, j)
            self._star_cache[key] = hit
        return hit

    def star_vec(self, mono: Monomial, v: Vector) -> Vector:
        out = zero_vector(self.dim)
        for j, c in enumerate(v):
            if c != 0:
                out = vec_add(out, vec_scale(c, self.star(mono, j)))
        return out

    def star_elem(self, elem: SymElement, v: Vector) -> Vector:
        out = zero_vector(self.dim)
        for mono, coeff in elem.terms.items():
            out = vec_add(out, vec_scale(coeff, self.star_vec(mono, v)))
        return out

    def inv_star(self, mono: Monomial, j: int) -> Vector:
        r"""The inverse transport mu \* v, solved by induction on deg mu."""
        mono = tuple(mono)
        key = (mono, j)
        hit = self._inv_cache.get(key)
        if hit is None:
            if monomial_degree(mono) == 0:
                hit = basis_vector(self.dim, j)
            else:
                degree = monomial_degree(mono)
                acc = zero_vector(self.dim)
                for a, b, coeff in monomial_splits(mono):
                    if monomial_degree(a) == degree:
                        continue
                    transported = self.star(b, j)
                    acc = vec_add(acc, vec_scale(Fraction(coeff), self.inv_star_vec(a, transported)))
                hit = vec_scale(Fraction(-1), acc)
            self._inv_cache[key] = hit
        return hit

    def inv_star_vec(self, mono: Monomial, v: Vector) -> Vector:
        out = zero_vector(self.dim)
        for j, c in enumerate(v):
            if c != 0:
                out = vec_add(out, vec_scale(c, self.inv_star(mono, j)))
        return out

    def inverse_table(self, max_degree: int | None = None) -> dict[tuple[Monomial, int], Vector]:
        cap = self.max_degree if max_degree is None else max_degree
        return {
            (mono, j): self.inv_star(mono, j)
            for mono in monomials_up_to(self.dim, cap)
            for j in range(self.dim)
        }


def connection_from_loop(loop: FormalLoop) -> FlatConnection:
    """The canonical connection: the loop restricted to k[V] (x) V.

    Cached on the loop so repeated bracket evaluations share the transport
    tables.
    """
    cached = getattr(loop, "_canonical_connection", None)
    if cached is not None:
        return cached

    def star_fn(mono: Monomial, j: int) -> Vector:
        return loop.value((mono, basis_monomial(loop.dim, j)))

    conn = FlatConnection(loop.dim, loop.N - 1, star_fn)
    loop._canonical_connection = conn
    return conn


def connection_backslash_star(conn: FlatConnection) -> dict[tuple[Monomial, int], Vector]:
    """The full inverse-transport table of a connection."""
    return conn.inverse_table()


def adapted_field(conn: FlatConnection, v: Vector) -> FormalVectorField:
    """The field adapted to a tangent vector: mu -> mu * v."""
    v = tuple(Fraction(c) for c in v)
    return FormalVectorField(conn.dim, conn.max_degree, lambda mono: conn.star_vec(mono, v))


def _elem_times_vector(dim: int, mono: Monomial, v: Vector) -> SymElement:
    """The symmetric-algebra product of a monomial with a vector."""
    return SymElement(dim, {mono: Fraction(1)}) * SymElement.from_vector(v)


def vf_bracket(a: FormalVectorField, b: FormalVectorField) -> FormalVectorField:
    """[A, B](mu) = sum B(mu_(1) A(mu_(2))) - A(mu_(1) B(mu_(2)))."""
    a._compatible(b)
    dim = a.dim
    bound = min(a.max_degree, b.max_degree) - 1

    def fn(mono: Monomial) -> Vector:
        out = zero_vector(dim)
        for m1, m2, coeff in monomial_splits(mono):
            first = b.on_elem(_elem_times_vector(dim, m1, a.at(m2)))
            second = a.on_elem(_elem_times_vector(dim, m1, b.at(m2)))
            out = vec_add(out, vec_scale(Fraction(coeff), vec_sub(first, second)))
        return out

    return FormalVectorField(dim, bound, fn)


def function_times_field(f: FormalFunction, a: FormalVectorField) -> FormalVectorField:
    """(fA)(mu) = sum f(mu_(1)) A(mu_(2)); the module structure on fields."""

    def fn(mono: Monomial) -> Vector:
        out = zero_vector(a.dim)
        for m1, m2, coeff in monomial_splits(mono):
            weight = f.at(m1)
            if weight != 0:
                out = vec_add(out, vec_scale(Fraction(coeff) * weight, a.at(m2)))
        return out

    return FormalVectorField(a.dim, a.max_degree, fn)


def field_applied_to_function(a: FormalVectorField, f: FormalFunction) -> FormalFunction:
    """A(f)(mu) = sum f(mu_(1) A(mu_(2))); the derivation action on functions."""
    dim = a.dim
    table: dict[Monomial, Fraction] = {}
    for mono in monomials_up_to(dim, a.max_degree):
        value = Fraction(0)
        for m1, m2, coeff in monomial_splits(mono):
            value += coeff * f.on_elem(_elem_times_vector(dim, m1, a.at(m2)))
        table[mono] = value
    return FormalFunction(dim, table)


def _four_splits(mono: Monomial) -> Iterator[tuple[Monomial, Monomial, Monomial, Monomial, int]]:
    for a, rest1, c1 in monomial_splits(mono):
        for b, rest2, c2 in monomial_splits(rest1):
            for c, d, c3 in monomial_splits(rest2):
                yield a, b, c, d, c1 * c2 * c3


def covariant_derivative(
    conn: FlatConnection, a: FormalVectorField, b: FormalVectorField
) -> FormalVectorField:
    """nabla_A(B)(mu) = sum B(mu_(1) A(mu_(2)))
    - (mu_(1) A(mu_(2))) * (mu_(3) \\* B(mu_(4)))."""
    if conn.dim != a.dim or conn.dim != b.dim:
        raise ValueError("connection and fields live on different spaces")
    dim = conn.dim
    bound = min(conn.max_degree, a.max_degree, b.max_degree) - 1

    def fn(mono: Monomial) -> Vector:
        out = zero_vector(dim)
        for m1, m2, coeff in monomial_splits(mono):
            out = vec_add(
                out,
                vec_scale(Fraction(coeff), b.on_elem(_elem_times_vector(dim, m1, a.at(m2)))),
            )
        for m1, m2, m3, m4, coeff in _four_splits(mono):
            moved = _elem_times_vector(dim, m1, a.at(m2))
            if moved.is_zero():
                continue
            pulled = conn.inv_star_vec(m3, b.at(m4))
            out = vec_sub(out, vec_scale(Fraction(coeff), conn.star_elem(moved, pulled)))
        return out

    return FormalVectorField(dim, bound, fn)


def torsion(conn: FlatConnection, a: FormalVectorField, b: FormalVectorField) -> FormalVectorField:
    """T(A, B) = nabla_A(B) - nabla_B(A) - [A, B]; antisymmetric."""
    return covariant_derivative(conn, a, b) - covariant_derivative(conn, b, a) - vf_bracket(a, b)


def ms_brackets(
    loop: FormalLoop, xs: Sequence[Vector], y: Vector, z: Vector
) -> Vector:
    """The connection-side bracket <x_1 .. x_n; y, z> of a loop.

    Covariant derivatives are applied innermost first (the x_n one hits the
    torsion field first) and the result is evaluated at 1.  Each derivative
    consumes a degree, so n + 2 must not exceed the truncation.  Torsion
    and derivative fields are cached on the loop keyed by their argument
    chain, so sweeping over basis tuples shares all intermediate tables.
    """
    if len(xs) + 2 > loop.N:
        raise ValueError(
            f"bracket of arity {len(xs)} needs degree {len(xs) + 2} <= {loop.N}"
        )
    conn = connection_from_loop(loop)
    cache: dict = getattr(loop, "_ms_field_cache", None)
    if cache is None:
        cache = {}
        loop._ms_field_cache = cache
    y = tuple(Fraction(c) for c in y)
    z = tuple(Fraction(c) for c in z)
    key: tuple = (y, z)
    field = cache.get(key)
    if field is None:
        field = torsion(conn, adapted_field(conn, y), adapted_field(conn, z))
        cache[key] = field
    for x in reversed([tuple(Fraction(c) for c in v) for v in xs]):
        key = key + (x,)
        nxt = cache.get(key)
        if nxt is None:
            nxt = covariant_derivative(conn, adapted_field(conn, x), field)
            cache[key] = nxt
        field = nxt
    return field.at(unit_monomial(loop.dim))
