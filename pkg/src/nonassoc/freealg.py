"""The unital free non-associative algebra on named generators, truncated.

Monomials are leaf-labelled binary trees (the unit is the empty monomial);
elements are sparse maps from monomials to exact rationals.  A FreeAlgebra
context fixes the generator names and the truncation degree: every product
silently discards monomials above the truncation, which realizes the
completed algebra of non-associative power series at finite precision.

The coalgebra structure makes the generators primitive, divisions are
defined by the counit recursions (there is no antipode here), and the
exponential and logarithm live in the coset 1 + (augmentation ideal).
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import factorial
from typing import Iterable, Sequence

from .scalars import format_rational, parse_rational, rat
from . import su_ops
from .trees import PlaneTree, enumerate_trees, tree_stats

# A monomial is None (the unit), an int (generator index), or a pair of
# monomials.  Tuples nest, so hashing and equality are structural.
FAMonomial = None | int | tuple


def mono_degree(mono: FAMonomial) -> int:
    if mono is None:
        return 0
    if isinstance(mono, int):
        return 1
    return mono_degree(mono[0]) + mono_degree(mono[1])


def mono_graft(a: FAMonomial, b: FAMonomial) -> FAMonomial:
    """Tree grafting; the unit is absorbed."""
    if a is None:
        return b
    if b is None:
        return a
    return (a, b)


def mono_encode(mono: FAMonomial, names: Sequence[str]) -> str:
    if mono is None:
        return "1"
    if isinstance(mono, int):
        return names[mono]
    return f"({mono_encode(mono[0], names)} {mono_encode(mono[1], names)})"


def mono_sort_key(mono: FAMonomial, names: Sequence[str]) -> tuple:
    return (mono_degree(mono), mono_encode(mono, names))


def mono_letter_counts(mono: FAMonomial, ngens: int) -> tuple[int, ...]:
    """Exponent vector of the underlying commutative monomial."""
    counts = [0] * ngens
    stack = [mono]
    while stack:
        node = stack.pop()
        if node is None:
            continue
        if isinstance(node, int):
            counts[node] += 1
        else:
            stack.extend(node)
    return tuple(counts)


def mono_from_tree(tree: PlaneTree, gen: int = 0) -> FAMonomial:
    if tree.is_leaf:
        return gen
    return (mono_from_tree(tree.left, gen), mono_from_tree(tree.right, gen))


class FreeAlgebra:
    """Computation context: generator names plus the truncation degree."""

    def __init__(self, names: Sequence[str], max_degree: int):
        if max_degree < 1:
            raise ValueError(f"truncation degree must be >= 1, got {max_degree}")
        if len(set(names)) != len(names) or not names:
            raise ValueError(f"generator names must be distinct and non-empty: {names!r}")
        self.names = tuple(names)
        self.max_degree = max_degree
        self._coproduct_memo: dict[FAMonomial, tuple[tuple[FAMonomial, FAMonomial, Fraction], ...]] = {}
        self._ldiv_memo: dict[tuple[FAMonomial, FAMonomial], "FAElement"] = {}
        self._rdiv_memo: dict[tuple[FAMonomial, FAMonomial], "FAElement"] = {}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FreeAlgebra)
            and self.names == other.names
            and self.max_degree == other.max_degree
        )

    def __hash__(self):
        return hash((self.names, self.max_degree))

    def __repr__(self) -> str:
        return f"FreeAlgebra(names={self.names}, max_degree={self.max_degree})"

    # -- element constructors ------------------------------------------------
    def zero(self) -> "FAElement":
        return FAElement(self, {})

    def one(self) -> "FAElement":
        return FAElement(self, {None: Fraction(1)})

    def gen(self, index: int) -> "FAElement":
        if not 0 <= index < len(self.names):
            raise ValueError(f"generator index {index} out of range")
        return FAElement(self, {index: Fraction(1)})

    def gens(self) -> tuple["FAElement", ...]:
        return tuple(self.gen(i) for i in range(len(self.names)))

    def element(self, terms: dict[FAMonomial, int | str | Fraction]) -> "FAElement":
        return FAElement(self, {m: rat(c) for m, c in terms.items()})

    # -- structural maps on monomials -----------------------------------------
    def mono_coproduct(self, mono: FAMonomial) -> tuple[tuple[FAMonomial, FAMonomial, Fraction], ...]:
        """Sweedler terms of the coproduct of a monomial (generators primitive)."""
        cached = self._coproduct_memo.get(mono)
        if cached is not None:
            return cached
        if mono is None:
            out: tuple = ((None, None, Fraction(1)),)
        elif isinstance(mono, int):
            out = ((mono, None, Fraction(1)), (None, mono, Fraction(1)))
        else:
            left, right = mono
            acc: dict[tuple[FAMonomial, FAMonomial], Fraction] = {}
            for l1, l2, cl in self.mono_coproduct(left):
                for r1, r2, cr in self.mono_coproduct(right):
                    key = (mono_graft(l1, r1), mono_graft(l2, r2))
                    acc[key] = acc.get(key, Fraction(0)) + cl * cr
            out = tuple((a, b, c) for (a, b), c in acc.items())
        self._coproduct_memo[mono] = out
        return out

    def mono_ldiv(self, u: FAMonomial, v: FAMonomial) -> "FAElement":
        r"""Left division u \ v on monomials, by induction on the degree of u.

        Defined so that sum u_(1) \ (u_(2) v) equals counit(u) v; the term
        with u_(1) = u is isolated and everything else has a strictly
        smaller first argument.
        """
        key = (u, v)
        cached = self._ldiv_memo.get(key)
        if cached is not None:
            return cached
        if u is None:
            result = FAElement(self, {v: Fraction(1)})
        else:
            du = mono_degree(u)
            result = self.zero()
            for u1, u2, coeff in self.mono_coproduct(u):
                if u1 is None:
                    prod = mono_graft(u2, v)
                    if mono_degree(prod) <= self.max_degree:
                        result = result - FAElement(self, {prod: coeff})
                elif mono_degree(u1) < du:
                    inner = mono_graft(u2, v)
                    if mono_degree(u1) + mono_degree(inner) <= self.max_degree:
                        result = result - self.mono_ldiv(u1, inner).scale(coeff)
        self._ldiv_memo[key] = result
        return result

    def mono_rdiv(self, u: FAMonomial, v: FAMonomial) -> "FAElement":
        """Right division u / v on monomials, by induction on the degree of v."""
        key = (u, v)
        cached = self._rdiv_memo.get(key)
        if cached is not None:
            return cached
        if v is None:
            result = FAElement(self, {u: Fraction(1)})
        else:
            dv = mono_degree(v)
            result = self.zero()
            for v1, v2, coeff in self.mono_coproduct(v):
                if v1 is None:
                    prod = mono_graft(u, v2)
                    if mono_degree(prod) <= self.max_degree:
                        result = result - FAElement(self, {prod: coeff})
                elif mono_degree(v1) < dv:
                    partial = self.mono_rdiv(u, v1)
                    result = result - (partial * FAElement(self, {v2: coeff}))
        self._rdiv_memo[key] = result
        return result


class FAElement:
    """A free non-associative polynomial, truncated by its context."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: FreeAlgebra, terms: dict[FAMonomial, Fraction] | None = None):
        self.alg = alg
        clean: dict[FAMonomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if coeff != 0 and mono_degree(mono) <= alg.max_degree:
                clean[mono] = Fraction(coeff)
        self.terms = clean

    def _check(self, other: "FAElement") -> None:
        if not isinstance(other, FAElement):
            raise TypeError(f"expected FAElement, got {type(other).__name__}")
        if self.alg != other.alg:
            raise ValueError("context mismatch between free-algebra elements")

    # -- linear structure ------------------------------------------------------
    def __add__(self, other: "FAElement") -> "FAElement":
        self._check(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        return FAElement(self.alg, terms)

    def __sub__(self, other: "FAElement") -> "FAElement":
        return self + other.scale(Fraction(-1))

    def __neg__(self) -> "FAElement":
        return self.scale(Fraction(-1))

    def scale(self, c: int | Fraction) -> "FAElement":
        if c == 0:
            return self.alg.zero()
        return FAElement(self.alg, {m: c * v for m, v in self.terms.items()})

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        cap = self.alg.max_degree
        terms: dict[FAMonomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            d1 = mono_degree(m1)
            for m2, c2 in other.terms.items():
                if d1 + mono_degree(m2) > cap:
                    continue
                key = mono_graft(m1, m2)
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return FAElement(self.alg, terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FAElement)
            and self.alg == other.alg
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.alg, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def max_degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def graded_piece(self, degree: int) -> "FAElement":
        return FAElement(
            self.alg, {m: c for m, c in self.terms.items() if mono_degree(m) == degree}
        )

    def bidegree_piece(self, counts: tuple[int, ...]) -> "FAElement":
        """The part whose monomials use each generator the prescribed number of times."""
        ngens = len(self.alg.names)
        return FAElement(
            self.alg,
            {
                m: c
                for m, c in self.terms.items()
                if mono_letter_counts(m, ngens) == counts
            },
        )

    # -- coalgebra --------------------------------------------------------------
    def counit(self) -> Fraction:
        return self.terms.get(None, Fraction(0))

    def coproduct(self) -> "FATensor":
        terms: dict[tuple[FAMonomial, FAMonomial], Fraction] = {}
        for mono, coeff in self.terms.items():
            for a, b, w in self.alg.mono_coproduct(mono):
                key = (a, b)
                terms[key] = terms.get(key, Fraction(0)) + coeff * w
        return FATensor(self.alg, terms)

    def is_primitive(self) -> bool:
        if self.is_zero():
            return True
        expected = FATensor.of(self, self.alg.one()) + FATensor.of(self.alg.one(), self)
        return self.coproduct() == expected

    # -- misc ---------------------------------------------------------------------
    def associative_collapse(self) -> dict[tuple[int, ...], Fraction]:
        """Image in the polynomial ring obtained by forgetting the tree shapes."""
        out: dict[tuple[int, ...], Fraction] = {}
        ngens = len(self.alg.names)
        for mono, coeff in self.terms.items():
            key = mono_letter_counts(mono, ngens)
            val = out.get(key, Fraction(0)) + coeff
            if val:
                out[key] = val
            else:
                out.pop(key, None)
        return out

    def sorted_terms(self) -> list[tuple[FAMonomial, Fraction]]:
        return sorted(
            self.terms.items(), key=lambda mc: mono_sort_key(mc[0], self.alg.names)
        )

    def __repr__(self) -> str:
        if not self.terms:
            return "FAElement(0)"
        bits = [
            f"{format_rational(c)}*{mono_encode(m, self.alg.names)}"
            for m, c in self.sorted_terms()
        ]
        return "FAElement(" + " + ".join(bits) + ")"

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for mono, coeff in self.sorted_terms():
            enc = mono_encode(mono, self.alg.names)
            if coeff == 1 and mono is not None:
                text = enc
            elif coeff == -1 and mono is not None:
                text = f"-{enc}"
            elif mono is None:
                text = format_rational(coeff)
            else:
                text = f"{format_rational(coeff)} {enc}"
            bits.append(text)
        out = bits[0]
        for bit in bits[1:]:
            out += f" - {bit[1:]}" if bit.startswith("-") else f" + {bit}"
        return out

    def to_json(self) -> list[dict]:
        return [
            {"monomial": mono_encode(m, self.alg.names), "coeff": format_rational(c)}
            for m, c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, alg: FreeAlgebra, data: Iterable[dict]) -> "FAElement":
        terms: dict[FAMonomial, Fraction] = {}
        for item in data:
            mono = parse_fa_monomial(item["monomial"], alg.names)
            terms[mono] = terms.get(mono, Fraction(0)) + parse_rational(item["coeff"])
        return cls(alg, terms)


def parse_fa_monomial(text: str, names: Sequence[str]) -> FAMonomial:
    """Parse the canonical monomial encoding ("1", a name, or "(l r)")."""
    pos = 0
    by_name = {name: i for i, name in enumerate(names)}

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expr() -> FAMonomial:
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise ValueError(f"unexpected end of monomial at offset {pos}")
        if text[pos] == "(":
            pos += 1
            left = expr()
            right = expr()
            skip_ws()
            if pos >= len(text) or text[pos] != ")":
                raise ValueError(f"expected ')' at offset {pos} in monomial")
            pos += 1
            return (left, right)
        if text[pos] == "1":
            pos += 1
            return None
        for name, idx in by_name.items():
            if text.startswith(name, pos):
                pos += len(name)
                return idx
        raise ValueError(f"unknown generator at offset {pos} in monomial {text!r}")

    mono = expr()
    skip_ws()
    if pos != len(text):
        raise ValueError(f"trailing input at offset {pos} in monomial {text!r}")
    return mono


class FATensor:
    """A sparse element of the tensor square of a free algebra."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: FreeAlgebra, terms: dict[tuple[FAMonomial, FAMonomial], Fraction] | None = None):
        self.alg = alg
        cap = alg.max_degree
        clean: dict[tuple[FAMonomial, FAMonomial], Fraction] = {}
        for (a, b), coeff in (terms or {}).items():
            if coeff != 0 and mono_degree(a) <= cap and mono_degree(b) <= cap:
                clean[(a, b)] = Fraction(coeff)
        self.terms = clean

    @classmethod
    def of(cls, x: FAElement, y: FAElement) -> "FATensor":
        x._check(y)
        terms: dict[tuple[FAMonomial, FAMonomial], Fraction] = {}
        for m1, c1 in x.terms.items():
            for m2, c2 in y.terms.items():
                terms[(m1, m2)] = terms.get((m1, m2), Fraction(0)) + c1 * c2
        return cls(x.alg, terms)

    def _check(self, other: "FATensor") -> None:
        if self.alg != other.alg:
            raise ValueError("context mismatch between free-algebra tensors")

    def __add__(self, other: "FATensor") -> "FATensor":
        self._check(other)
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return FATensor(self.alg, terms)

    def __sub__(self, other: "FATensor") -> "FATensor":
        return self + other.scale(Fraction(-1))

    def scale(self, c: int | Fraction) -> "FATensor":
        return FATensor(self.alg, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "FATensor") -> "FATensor":
        """Componentwise product (graft each side), truncating per component."""
        self._check(other)
        cap = self.alg.max_degree
        terms: dict[tuple[FAMonomial, FAMonomial], Fraction] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                a = mono_graft(a1, a2)
                b = mono_graft(b1, b2)
                if mono_degree(a) > cap or mono_degree(b) > cap:
                    continue
                terms[(a, b)] = terms.get((a, b), Fraction(0)) + c1 * c2
        return FATensor(self.alg, terms)

    def truncate_total(self, max_degree: int) -> "FATensor":
        return FATensor(
            self.alg,
            {
                (a, b): c
                for (a, b), c in self.terms.items()
                if mono_degree(a) + mono_degree(b) <= max_degree
            },
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FATensor)
            and self.alg == other.alg
            and self.terms == other.terms
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"FATensor(nterms={len(self.terms)})"


# -- products, divisions, primitive forms -----------------------------------------


def fa_product(x: FAElement, y: FAElement) -> FAElement:
    return x * y


def fa_coproduct(x: FAElement) -> FATensor:
    return x.coproduct()


def fa_counit(x: FAElement) -> Fraction:
    return x.counit()


def fa_divide(u: FAElement, v: FAElement, side: str) -> FAElement:
    """Bilinear division in the free algebra; side is 'left' or 'right'."""
    u._check(v)
    alg = u.alg
    out = alg.zero()
    if side == "left":
        for mu, cu in u.terms.items():
            for mv, cv in v.terms.items():
                out = out + alg.mono_ldiv(mu, mv).scale(cu * cv)
    elif side == "right":
        for mu, cu in u.terms.items():
            for mv, cv in v.terms.items():
                out = out + alg.mono_rdiv(mu, mv).scale(cu * cv)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return out


def fa_associator(x: FAElement, y: FAElement, z: FAElement) -> FAElement:
    return (x * y) * z - x * (y * z)


def fa_commutator(x: FAElement, y: FAElement) -> FAElement:
    return x * y - y * x


class _FAOps:
    """Adapter exposing a FreeAlgebra to the generic primitive-operation engine."""

    def __init__(self, alg: FreeAlgebra):
        self.alg = alg

    def zero(self):
        return self.alg.zero()

    def one(self):
        return self.alg.one()

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def scale(self, a, c):
        return a.scale(c)

    def mul(self, a, b):
        return a * b

    def ldiv(self, a, b):
        return fa_divide(a, b, "left")

    def counit(self, a):
        return a.counit()

    def coproduct_terms(self, a):
        for (m1, m2), c in a.coproduct().terms.items():
            yield FAElement(self.alg, {m1: Fraction(1)}), FAElement(self.alg, {m2: Fraction(1)}), c

    def sum_terms(self, terms):
        acc: dict[FAMonomial, Fraction] = {}
        for elem, coeff in terms:
            if coeff == 0:
                continue
            for mono, c in elem.terms.items():
                acc[mono] = acc.get(mono, Fraction(0)) + coeff * c
        return FAElement(self.alg, acc)

    def is_primitive(self, a):
        return a.is_primitive()


def p_operation(xs: Sequence[FAElement], ys: Sequence[FAElement], z: FAElement) -> FAElement:
    """The primitive operation p(x1..xm; y1..yn; z) in the free algebra."""
    alg = z.alg
    return su_ops.p_operation(_FAOps(alg), xs, ys, z)


def su_bracket(xs: Sequence[FAElement], y: FAElement, z: FAElement) -> FAElement:
    return su_ops.bracket(_FAOps(y.alg), xs, y, z)


def su_multioperator(xs: Sequence[FAElement], ys: Sequence[FAElement]) -> FAElement:
    return su_ops.multioperator(_FAOps(ys[0].alg), xs, ys)


def su_multioperator_component(x: FAElement, y: FAElement, i: int, j: int) -> FAElement:
    """The bidegree-(i, j) polynomial component of the block-symmetric multioperator."""
    return su_ops.multioperator_component(_FAOps(x.alg), x, y, i, j)


# -- exponential and logarithm ---------------------------------------------------


def fa_exp(x: FAElement, base: FAElement | None = None) -> FAElement:
    """Left-normed exponential, optionally based at an invertible point.

    With no base this is 1 + X + X^2/2! + (X^2)X/3! + ... (powers grow on
    the right).  With base b (counit 1) it is the geodesic series
    b + X + X(b\\X)/2! + (X(b\\X))(b\\X)/3! + ...
    """
    if x.counit() != 0:
        raise ValueError("fa_exp needs a series with zero constant term")
    alg = x.alg
    if base is None:
        result = alg.one()
        step = x
    else:
        x._check(base)
        if base.counit() != 1:
            raise ValueError("fa_exp base must have counit 1")
        result = base
        step = fa_loop_divide(base, x, "left")
    term = x
    result = result + term
    for k in range(2, alg.max_degree + 1):
        term = term * step
        if term.is_zero():
            break
        result = result + term.scale(Fraction(1, factorial(k)))
    return result


def fa_loop_divide(a: FAElement, z: FAElement, side: str) -> FAElement:
    """Division in the multiplicative loop 1 + (augmentation ideal).

    For side 'left' returns the unique y with a*y = z, solved degree by
    degree from y = z - r*y where a = 1 + r; 'right' solves y*a = z.
    """
    a._check(z)
    if a.counit() != 1:
        raise ValueError("loop division needs a divisor with counit 1")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    alg = a.alg
    r = a - alg.one()
    y = z
    for _ in range(alg.max_degree + 1):
        nxt = z - (r * y if side == "left" else y * r)
        if nxt == y:
            break
        y = nxt
    return y


def fa_exp_inverse(g: FAElement) -> FAElement:
    """The series L with exp(L) = g, for g with counit 1, degree by degree."""
    if g.counit() != 1:
        raise ValueError("logarithm needs a series with counit 1")
    alg = g.alg
    lo = g - alg.one()
    result = lo
    for _ in range(2, alg.max_degree + 1):
        defect = g - fa_exp(result)
        if defect.is_zero():
            break
        result = result + defect
    return result


def fa_log(max_degree: int, method: str = "trees") -> FAElement:
    """log(1 + x) in one generator, to the requested degree.

    method 'trees' sums B_t / t! over all monomials t (tree shapes);
    method 'inversion' solves exp(L) = 1 + x degree by degree.  The two
    must agree, which the test suite pins.
    """
    alg = FreeAlgebra(("x",), max_degree)
    if method == "trees":
        terms: dict[FAMonomial, Fraction] = {}
        for degree in range(1, max_degree + 1):
            for tree in enumerate_trees(degree):
                bern, fact = tree_stats(tree)
                terms[mono_from_tree(tree)] = bern / fact
        return FAElement(alg, terms)
    if method == "inversion":
        return fa_exp_inverse(alg.one() + alg.gen(0))
    raise ValueError(f"unknown method {method!r}")


def is_primitive(x: FAElement) -> bool:
    return x.is_primitive()


def left_normed(factors: Sequence[FAElement]) -> FAElement:
    """((x1 x2) x3) ... xn; the empty product is 1."""
    if not factors:
        raise ValueError("left_normed needs at least one factor")
    return reduce(lambda a, b: a * b, factors)
