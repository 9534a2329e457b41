"""Catalog of concrete algebras and the formal loops they generate.

An AlgebraTable is a bilinear product on a finite-dimensional rational
space given by structure constants; declared structural flags are verified
exhaustively at construction (multilinear identities on basis tuples,
polynomial identities through their full polarizations, which is enough in
characteristic zero).  Each algebra seeds the loop x + y + x*y, and two
rational-function loops and the quotient map between them are generated
from closed-form geometric series.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product as iter_product

from .maps import FormalLoop, FormalMap, MonoTuple, compose
from .scalars import (
    Vector,
    basis_vector,
    format_rational,
    parse_rational,
    vec_add,
    vec_is_zero,
    vec_scale,
    zero_vector,
)
from .symalg import SymElement, basis_monomial

BUILTIN_ALGEBRAS = (
    "jordan-k3",
    "jordan-spin-normalized",
    "split-octonion",
    "dual-numbers",
    "assoc-2x2-uppertriangular",
)

BUILTIN_LOOPS = (
    "jordan-k3-loop",
    "jordan-spin-loop",
    "split-octonion-loop",
    "dual-numbers-loop",
    "assoc-2x2-uppertriangular-loop",
    "nonlinear-f-loop",
    "x-squared-y-loop",
)


@dataclass(frozen=True)
class AlgebraTable:
    """Structure constants of a bilinear product, with verified flags."""

    dim: int
    constants: tuple[tuple[Vector, ...], ...]  # constants[i][j] = e_i * e_j
    flags: dict[str, bool] = dataclass_field(default_factory=dict)
    distinguished: dict[str, Vector] = dataclass_field(default_factory=dict)

    def __post_init__(self):
        if len(self.constants) != self.dim or any(
            len(row) != self.dim or any(len(v) != self.dim for v in row)
            for row in self.constants
        ):
            raise ValueError("structure constants do not form a dim x dim x dim table")
        for name, expected in self.flags.items():
            actual = _check_flag(self, name)
            if actual != expected:
                raise ValueError(
                    f"flag {name!r} declared {expected} but verification found {actual}"
                )

    def multiply(self, x: Vector, y: Vector) -> Vector:
        out = zero_vector(self.dim)
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                out = vec_add(out, vec_scale(xi * yj, self.constants[i][j]))
        return out

    def basis_product(self, i: int, j: int) -> Vector:
        return self.constants[i][j]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "constants": [
                [[format_rational(c) for c in vec] for vec in row] for row in self.constants
            ],
            "flags": dict(self.flags),
            "distinguished": {
                k: [format_rational(c) for c in v] for k, v in self.distinguished.items()
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "AlgebraTable":
        constants = tuple(
            tuple(tuple(parse_rational(c) for c in vec) for vec in row)
            for row in data["constants"]
        )
        distinguished = {
            k: tuple(parse_rational(c) for c in v)
            for k, v in data.get("distinguished", {}).items()
        }
        return cls(data["dim"], constants, dict(data.get("flags", {})), distinguished)


def _check_flag(table: AlgebraTable, name: str) -> bool:
    checks = {
        "associative": _is_associative,
        "commutative": _is_commutative,
        "alternative": _is_alternative,
        "jordan": _is_jordan,
    }
    if name not in checks:
        raise ValueError(f"unknown algebra flag {name!r}")
    return checks[name](table)


def _basis(table: AlgebraTable) -> list[Vector]:
    return [basis_vector(table.dim, i) for i in range(table.dim)]


def _is_associative(table: AlgebraTable) -> bool:
    basis = _basis(table)
    for a, b, c in iter_product(basis, repeat=3):
        if table.multiply(table.multiply(a, b), c) != table.multiply(a, table.multiply(b, c)):
            return False
    return True


def _is_commutative(table: AlgebraTable) -> bool:
    basis = _basis(table)
    for a, b in iter_product(basis, repeat=2):
        if table.multiply(a, b) != table.multiply(b, a):
            return False
    return True


def _is_alternative(table: AlgebraTable) -> bool:
    # Both alternator identities are quadratic in the repeated slot; the
    # polarized forms below on basis triples are equivalent in char 0.
    basis = _basis(table)
    mul = table.multiply
    for a, b, y in iter_product(basis, repeat=3):
        left = vec_add(mul(a, mul(b, y)), mul(b, mul(a, y)))
        right = mul(vec_add(mul(a, b), mul(b, a)), y)
        if left != right:
            return False
        left = vec_add(mul(mul(y, a), b), mul(mul(y, b), a))
        right = mul(y, vec_add(mul(a, b), mul(b, a)))
        if left != right:
            return False
    return True


def _is_jordan(table: AlgebraTable) -> bool:
    # Commutativity plus the full polarization (cubic in the repeated slot)
    # of (x y) x^2 = x (y x^2) on basis 4-tuples.
    if not _is_commutative(table):
        return False
    basis = _basis(table)
    mul = table.multiply

    def jordan_multilinear(x1: Vector, x2: Vector, x3: Vector, y: Vector) -> Vector:
        return tuple(
            l - r
            for l, r in zip(mul(mul(x1, y), mul(x2, x3)), mul(x1, mul(y, mul(x2, x3))))
        )

    for y in basis:
        for x1, x2, x3 in iter_product(basis, repeat=3):
            total = zero_vector(table.dim)
            for p1, p2, p3 in permutations((x1, x2, x3)):
                total = vec_add(total, jordan_multilinear(p1, p2, p3, y))
            if not vec_is_zero(total):
                return False
    return True


# -- builtin algebras ---------------------------------------------------------------


def _jordan_k3_constants() -> tuple[tuple[Vector, ...], ...]:
    # x * y = (x1 y1 + x2 y3 + x3 y2, x1 y2 + x2 y1, x1 y3 + x3 y1)
    def prod(i: int, j: int) -> Vector:
        x = [Fraction(0)] * 3
        y = [Fraction(0)] * 3
        x[i] = Fraction(1)
        y[j] = Fraction(1)
        return (
            x[0] * y[0] + x[1] * y[2] + x[2] * y[1],
            x[0] * y[1] + x[1] * y[0],
            x[0] * y[2] + x[2] * y[0],
        )

    return tuple(tuple(prod(i, j) for j in range(3)) for i in range(3))


def _cayley_dickson(constants, conj, gamma: Fraction):
    """One doubling step: pairs (a, b) with the product
    (a, b)(c, d) = (a c + gamma conj(d) b, d a + b conj(c))."""
    d = len(conj)

    def emb(v: Vector, slot: int) -> Vector:
        out = [Fraction(0)] * (2 * d)
        for k, c in enumerate(v):
            out[slot * d + k] = c
        return tuple(out)

    def mul_small(i: int, j: int) -> Vector:
        return constants[i][j]

    def conj_vec(v: Vector) -> Vector:
        out = [Fraction(0)] * d
        for k, c in enumerate(v):
            if c != 0:
                out = [a + c * b for a, b in zip(out, conj[k])]
        return tuple(out)

    def lincomb(vec: Vector, table) -> Vector:
        out = [Fraction(0)] * d
        for k, c in enumerate(vec):
            if c != 0:
                out = [a + c * b for a, b in zip(out, table[k])]
        return tuple(out)

    new_constants = []
    for i in range(2 * d):
        row = []
        si, bi = divmod(i, d)
        for j in range(2 * d):
            sj, bj = divmod(j, d)
            if si == 0 and sj == 0:
                row.append(emb(mul_small(bi, bj), 0))
            elif si == 0 and sj == 1:
                # (a,0)(0,d) = (0, d a)
                row.append(emb(mul_small(bj, bi), 1))
            elif si == 1 and sj == 0:
                # (0,b)(c,0) = (0, b conj(c))
                cc = conj_vec(basis_vector(d, bj))
                row.append(emb(lincomb(cc, constants[bi]), 1))
            else:
                # (0,b)(0,d) = (gamma conj(d) b, 0)
                cd = conj_vec(basis_vector(d, bj))
                prod = [Fraction(0)] * d
                for k, c in enumerate(cd):
                    if c != 0:
                        prod = [a + c * b for a, b in zip(prod, mul_small(k, bi))]
                row.append(emb(vec_scale(gamma, tuple(prod)), 0))
        new_constants.append(tuple(row))
    new_conj = []
    for i in range(2 * d):
        si, bi = divmod(i, d)
        if si == 0:
            new_conj.append(emb(conj[bi], 0))
        else:
            new_conj.append(vec_scale(Fraction(-1), emb(basis_vector(d, bi), 1)))
    return tuple(new_constants), tuple(new_conj)


def _split_octonion_constants() -> tuple[tuple[Vector, ...], ...]:
    constants = ((basis_vector(1, 0),),)
    conj = (basis_vector(1, 0),)
    for _ in range(3):
        constants, conj = _cayley_dickson(constants, conj, Fraction(1))
    return constants


@lru_cache(maxsize=None)
def builtin_algebra(name: str) -> AlgebraTable:
    if name == "jordan-k3":
        return AlgebraTable(
            3,
            _jordan_k3_constants(),
            {"jordan": True, "commutative": True, "associative": False},
        )
    if name == "jordan-spin-normalized":
        # Same table; the distinguished pair is scaled so the bilinear form
        # pairing them equals 2, matching the normalized identities.
        return AlgebraTable(
            3,
            _jordan_k3_constants(),
            {"jordan": True, "commutative": True, "associative": False},
            {
                "unit": basis_vector(3, 0),
                "a": basis_vector(3, 1),
                "b": vec_scale(Fraction(2), basis_vector(3, 2)),
            },
        )
    if name == "split-octonion":
        return AlgebraTable(
            8,
            _split_octonion_constants(),
            {"alternative": True, "associative": False},
        )
    if name == "dual-numbers":
        z = zero_vector(2)
        e, eps = basis_vector(2, 0), basis_vector(2, 1)
        return AlgebraTable(
            2,
            ((e, eps), (eps, z)),
            {"associative": True, "commutative": True},
        )
    if name == "assoc-2x2-uppertriangular":
        z = zero_vector(3)
        e11, e12, e22 = (basis_vector(3, i) for i in range(3))
        constants = (
            (e11, e12, z),
            (z, z, e12),
            (z, z, e22),
        )
        return AlgebraTable(3, constants, {"associative": True, "commutative": False})
    raise ValueError(f"unknown builtin algebra {name!r}; known: {BUILTIN_ALGEBRAS}")


# -- loops --------------------------------------------------------------------------


def loop_from_algebra(table: AlgebraTable, max_degree: int, memory_cap: int | None = None) -> FormalLoop:
    """The loop x y = x + y + x*y of a bilinear product."""
    d = table.dim
    comps = FormalLoop.unital_components(d)
    bilinear: dict[MonoTuple, Vector] = {}
    for i in range(d):
        for j in range(d):
            value = table.basis_product(i, j)
            if not vec_is_zero(value):
                bilinear[(basis_monomial(d, i), basis_monomial(d, j))] = value
    if bilinear:
        comps[(1, 1)] = bilinear
    return FormalLoop(d, max_degree, comps, memory_cap)


def nonlinear_loop_F(max_degree: int) -> FormalLoop:
    """The two-dimensional loop (x2+y2, x3+y3) / (1 + x2 y3 + x3 y2).

    The geometric series of the denominator is expanded exactly through the
    truncation degree; variables are ordered (x2, x3, y2, y3).
    """
    N = max_degree
    x2, x3, y2, y3 = (SymElement.basis(4, k) for k in range(4))
    s = x2 * y3 + x3 * y2
    inverse = SymElement.one(4)
    power = SymElement.one(4)
    while True:
        power = (power * s.scale(Fraction(-1))).truncate(N)
        if power.is_zero():
            break
        inverse = inverse + power
    comp1 = ((x2 + y2) * inverse).truncate(N)
    comp2 = ((x3 + y3) * inverse).truncate(N)
    series: dict[MonoTuple, Vector] = {}
    for k, comp in enumerate((comp1, comp2)):
        for mono, coeff in comp.terms.items():
            key = ((mono[0], mono[1]), (mono[2], mono[3]))
            vec = list(series.get(key, zero_vector(2)))
            vec[k] = coeff
            series[key] = tuple(vec)
    return FormalLoop.from_map(FormalMap.from_series((2, 2), 2, N, series))


def phi_G_to_F(max_degree: int) -> FormalMap:
    """The quotient map (x2 / (1 + x1), x3 / (1 + x1)) as a formal map k^3 -> k^2."""
    series: dict[MonoTuple, Vector] = {}
    for k in range(max_degree):
        sign = Fraction((-1) ** k)
        series[((k, 1, 0),)] = (sign, Fraction(0))
        series[((k, 0, 1),)] = (Fraction(0), sign)
    return FormalMap.from_series((3,), 2, max_degree, series)


@dataclass
class HomomorphismVerdict:
    holds: bool
    multidegree: tuple[int, ...] | None = None
    monomials: MonoTuple | None = None
    difference: Vector | None = None


def check_homomorphism(theta: FormalMap, source: FormalLoop, target: FormalLoop) -> HomomorphismVerdict:
    """Does theta carry the source product to the target product?

    Compares H(theta(x), theta(y)) with theta(F(x, y)) componentwise up to
    the truncation.
    """
    if theta.dims != (source.dim,) or theta.target_dim != target.dim:
        raise ValueError("map signature does not connect the two loops")
    if theta.N != source.N or theta.N != target.N:
        raise ValueError("map and loops must share the truncation degree")
    dims = source.dims
    p1 = FormalMap.slot_projection(dims, 0, source.N)
    p2 = FormalMap.slot_projection(dims, 1, source.N)
    lhs = compose(target, [compose(theta, [p1]), compose(theta, [p2])])
    rhs = compose(theta, [source])
    diff = lhs - rhs
    if diff.is_zero():
        return HomomorphismVerdict(holds=True)
    md, monos, value = min(diff.sorted_entries(), key=lambda e: (sum(e[0]), e[0], e[1]))
    return HomomorphismVerdict(holds=False, multidegree=md, monomials=monos, difference=value)


def x_squared_y_loop(max_degree: int) -> FormalLoop:
    """The one-dimensional loop x + y + x^2 y (not right alternative)."""
    series = {
        ((1,), (0,)): (Fraction(1),),
        ((0,), (1,)): (Fraction(1),),
        ((2,), (1,)): (Fraction(1),),
    }
    return FormalLoop.from_map(FormalMap.from_series((1, 1), 1, max_degree, series))


def builtin_loop(name: str, max_degree: int, memory_cap: int | None = None) -> FormalLoop:
    if name == "nonlinear-f-loop":
        return nonlinear_loop_F(max_degree)
    if name == "x-squared-y-loop":
        return x_squared_y_loop(max_degree)
    algebra_names = {
        "jordan-k3-loop": "jordan-k3",
        "jordan-spin-loop": "jordan-spin-normalized",
        "split-octonion-loop": "split-octonion",
        "dual-numbers-loop": "dual-numbers",
        "assoc-2x2-uppertriangular-loop": "assoc-2x2-uppertriangular",
    }
    if name in algebra_names:
        return loop_from_algebra(builtin_algebra(algebra_names[name]), max_degree, memory_cap)
    raise ValueError(f"unknown builtin loop {name!r}; known: {BUILTIN_LOOPS}")


def loop_from_spec(spec: dict, max_degree: int, memory_cap: int | None = None) -> FormalLoop:
    """Build a loop from its JSON description (builtin, from-algebra or components)."""
    kind = spec.get("type")
    if kind == "builtin":
        return builtin_loop(spec["name"], max_degree, memory_cap)
    if kind == "from-algebra":
        return loop_from_algebra(AlgebraTable.from_json(spec["table"]), max_degree, memory_cap)
    if kind == "components":
        fmap = FormalMap.from_json(spec)
        if fmap.N != max_degree:
            fmap = FormalMap(fmap.dims, fmap.target_dim, max_degree, fmap.components)
        return FormalLoop.from_map(fmap, memory_cap)
    raise ValueError(f"unknown loop spec type {kind!r}")
