import random
from fractions import Fraction as F
from itertools import product as iter_product

import pytest

from nonassoc.catalog import AlgebraTable, builtin_algebra, loop_from_algebra
from nonassoc.connection import (
    FlatConnection,
    FormalFunction,
    FormalVectorField,
    adapted_field,
    connection_backslash_star,
    connection_from_loop,
    covariant_derivative,
    field_applied_to_function,
    function_times_field,
    ms_brackets,
    torsion,
    vf_bracket,
)
from nonassoc.dist import DistBialgebra, dist_su_ops
from nonassoc.scalars import basis_vector, vec_is_zero, vec_scale, zero_vector
from nonassoc.symalg import SymElement, monomials_up_to, unit_monomial


def random_field(rng, dim, max_degree):
    table = {
        mono: tuple(F(rng.randint(-2, 2)) for _ in range(dim))
        for mono in monomials_up_to(dim, max_degree)
    }
    return FormalVectorField.from_table(dim, max_degree, table)


def random_function(rng, dim, max_degree):
    return FormalFunction(
        dim,
        {
            mono: F(rng.randint(-2, 2))
            for mono in monomials_up_to(dim, max_degree)
        },
    )


@pytest.fixture(scope="module")
def jordan_setting(request):
    loop = loop_from_algebra(builtin_algebra("jordan-k3"), 5)
    return loop, connection_from_loop(loop), DistBialgebra.from_loop(loop)


def test_connection_from_loop_base_cases(jordan_setting):
    loop, conn, _ = jordan_setting
    table = builtin_algebra("jordan-k3")
    for j in range(3):
        assert conn.star(unit_monomial(3), j) == basis_vector(3, j)
    for i in range(3):
        for j in range(3):
            mono = tuple(1 if k == i else 0 for k in range(3))
            assert conn.star(mono, j) == table.basis_product(i, j)


def test_connection_vanishes_on_high_degrees_for_bilinear_loops(jordan_setting):
    loop, conn, _ = jordan_setting
    for mono in monomials_up_to(3, conn.max_degree):
        if sum(mono) >= 2:
            for j in range(3):
                assert vec_is_zero(conn.star(mono, j))


def test_adapted_field_matches_distribution_product(jordan_setting):
    loop, conn, B = jordan_setting
    v = (F(1), F(-2), F(0))
    field = adapted_field(conn, v)
    assert field.at(unit_monomial(3)) == v
    for mono in monomials_up_to(3, 3):
        expected = B.product(
            SymElement(3, {mono: F(1)}), SymElement.from_vector(v)
        ).primitive_part()
        assert field.at(mono) == expected


def test_adapted_field_one_dimensional_cross_check():
    table = AlgebraTable(1, (((F(1),),),), {"associative": True})
    loop = loop_from_algebra(table, 5)
    conn = connection_from_loop(loop)
    B = DistBialgebra.from_loop(loop)
    e = (F(1),)
    field = adapted_field(conn, e)
    for k in range(conn.max_degree + 1):
        expected = B.product(SymElement(1, {(k,): F(1)}), B.basis(0)).primitive_part()
        assert field.at((k,)) == expected


def test_vf_bracket_antisymmetry_and_value_at_one(jordan_setting):
    loop, conn, _ = jordan_setting
    table = builtin_algebra("jordan-k3")
    fx = adapted_field(conn, basis_vector(3, 1))
    fy = adapted_field(conn, basis_vector(3, 2))
    assert all(
        vec_is_zero(vf_bracket(fx, fx).at(m))
        for m in monomials_up_to(3, conn.max_degree - 1)
    )
    value = vf_bracket(fx, fy).at(unit_monomial(3))
    xy = table.multiply(basis_vector(3, 1), basis_vector(3, 2))
    yx = table.multiply(basis_vector(3, 2), basis_vector(3, 1))
    assert value == tuple(a - b for a, b in zip(xy, yx))


def test_vf_bracket_jacobi_on_random_fields():
    rng = random.Random(31)
    fields = [random_field(rng, 2, 3) for _ in range(3)]
    a, b, c = fields
    jacobi = (
        vf_bracket(a, vf_bracket(b, c))
        + vf_bracket(b, vf_bracket(c, a))
        + vf_bracket(c, vf_bracket(a, b))
    )
    for mono in monomials_up_to(2, jacobi.max_degree):
        assert vec_is_zero(jacobi.at(mono))


def test_bracket_module_rule():
    # [A, fB] = A(f) B + f [A, B]
    rng = random.Random(7)
    dim = 2
    a = random_field(rng, dim, 3)
    b = random_field(rng, dim, 3)
    f = random_function(rng, dim, 2)
    lhs = vf_bracket(a, function_times_field(f, b))
    af = field_applied_to_function(a, f)
    rhs = function_times_field(af, b) + function_times_field(f, vf_bracket(a, b))
    for mono in monomials_up_to(dim, min(lhs.max_degree, rhs.max_degree)):
        assert lhs.at(mono) == rhs.at(mono)


def test_inverse_transport(jordan_setting):
    loop, conn, _ = jordan_setting
    table = builtin_algebra("jordan-k3")
    for j in range(3):
        assert conn.inv_star(unit_monomial(3), j) == basis_vector(3, j)
    for i in range(3):
        mono = tuple(1 if k == i else 0 for k in range(3))
        for j in range(3):
            assert conn.inv_star(mono, j) == vec_scale(
                F(-1), table.basis_product(i, j)
            )
    # both defining relations on all monomials
    from nonassoc.symalg import monomial_splits

    for mono in monomials_up_to(3, conn.max_degree):
        for j in range(3):
            first = zero_vector(3)
            second = zero_vector(3)
            for m1, m2, coeff in monomial_splits(mono):
                first = tuple(
                    x + F(coeff) * y
                    for x, y in zip(first, conn.inv_star_vec(m1, conn.star(m2, j)))
                )
                second = tuple(
                    x + F(coeff) * y
                    for x, y in zip(second, conn.star_vec(m1, conn.inv_star(m2, j)))
                )
            expected = basis_vector(3, j) if sum(mono) == 0 else zero_vector(3)
            assert first == expected
            assert second == expected


def test_backslash_star_table_export(jordan_setting):
    _, conn, _ = jordan_setting
    table = connection_backslash_star(conn)
    assert table[(unit_monomial(3), 0)] == basis_vector(3, 0)
    assert len(table) == sum(1 for _ in monomials_up_to(3, conn.max_degree)) * 3


def test_covariant_derivative_of_adapted_fields_vanishes(jordan_setting):
    loop, conn, _ = jordan_setting
    v = adapted_field(conn, (F(1), F(2), F(-1)))
    w = adapted_field(conn, basis_vector(3, 0))
    nabla = covariant_derivative(conn, v, w)
    for mono in monomials_up_to(3, nabla.max_degree):
        assert vec_is_zero(nabla.at(mono))


def test_covariant_derivative_module_rules(jordan_setting):
    loop, conn, _ = jordan_setting
    rng = random.Random(19)
    a = random_field(rng, 3, 3)
    b = random_field(rng, 3, 3)
    f = random_function(rng, 3, 2)
    lhs = covariant_derivative(conn, function_times_field(f, a), b)
    rhs = function_times_field(f, covariant_derivative(conn, a, b))
    for mono in monomials_up_to(3, min(lhs.max_degree, rhs.max_degree)):
        assert lhs.at(mono) == rhs.at(mono)
    lhs = covariant_derivative(conn, a, function_times_field(f, b))
    rhs = function_times_field(field_applied_to_function(a, f), b) + function_times_field(
        f, covariant_derivative(conn, a, b)
    )
    for mono in monomials_up_to(3, min(lhs.max_degree, rhs.max_degree)):
        assert lhs.at(mono) == rhs.at(mono)


def test_covariant_derivative_of_non_adapted_field(jordan_setting):
    loop, conn, _ = jordan_setting
    proj = FormalVectorField(3, conn.max_degree, lambda mono: tuple(
        F(1) if sum(mono) == 1 and mono[k] == 1 else F(0) for k in range(3)
    ))
    v = adapted_field(conn, basis_vector(3, 0))
    nabla = covariant_derivative(conn, v, proj)
    # hand expansion at degree <= 1: at 1 the formula collapses to
    # proj(e0) - e0 * proj(1) = e0 - 0 = e0
    assert nabla.at(unit_monomial(3)) == basis_vector(3, 0)
    assert any(
        not vec_is_zero(nabla.at(mono)) for mono in monomials_up_to(3, nabla.max_degree)
    )


def test_torsion_of_adapted_fields(jordan_setting):
    loop, conn, B = jordan_setting
    x = basis_vector(3, 1)
    y = basis_vector(3, 2)
    fx, fy = adapted_field(conn, x), adapted_field(conn, y)
    t = torsion(conn, fx, fy)
    neg_bracket = vf_bracket(fx, fy).scale(F(-1))
    for mono in monomials_up_to(3, t.max_degree):
        assert t.at(mono) == neg_bracket.at(mono)
        # distribution form of the torsion
        m = SymElement(3, {mono: F(1)})
        ex = SymElement.from_vector(x)
        ey = SymElement.from_vector(y)
        expected = (
            B.product(B.product(m, ey), ex) - B.product(B.product(m, ex), ey)
        ).primitive_part()
        assert t.at(mono) == expected
    # antisymmetry
    t_rev = torsion(conn, fy, fx)
    for mono in monomials_up_to(3, t.max_degree):
        assert t.at(mono) == vec_scale(F(-1), t_rev.at(mono))


def test_ms_brackets_base_cases(jordan_setting):
    loop, conn, B = jordan_setting
    table = builtin_algebra("jordan-k3")
    for j, k in iter_product(range(3), repeat=2):
        value = ms_brackets(loop, [], basis_vector(3, j), basis_vector(3, k))
        jk = table.multiply(basis_vector(3, j), basis_vector(3, k))
        kj = table.multiply(basis_vector(3, k), basis_vector(3, j))
        assert value == tuple(b - a for a, b in zip(jk, kj))


def test_ms_brackets_vanish_for_associative_loops(dual_loop_4):
    for i, j, k in iter_product(range(2), repeat=3):
        value = ms_brackets(
            dual_loop_4, [basis_vector(2, i)], basis_vector(2, j), basis_vector(2, k)
        )
        assert vec_is_zero(value)


def test_ms_equals_su_small(jordan_setting):
    loop, conn, B = jordan_setting
    ops = dist_su_ops(B)
    for idx in iter_product(range(3), repeat=3):
        xs = [basis_vector(3, idx[0])]
        y, z = basis_vector(3, idx[1]), basis_vector(3, idx[2])
        assert ms_brackets(loop, xs, y, z) == ops.bracket_vector(xs, y, z)


def test_ms_equals_su_rest_of_catalog(xsqy_loop_6, spin_loop_6):
    from nonassoc.catalog import builtin_loop

    upper = builtin_loop("assoc-2x2-uppertriangular-loop", 5)
    for loop in (xsqy_loop_6, spin_loop_6, upper):
        B = DistBialgebra.from_loop(loop)
        ops = dist_su_ops(B)
        dim = loop.dim
        cap = min(5, loop.N)
        for arity in range(0, cap - 1):
            for idx in iter_product(range(dim), repeat=arity + 2):
                xs = [basis_vector(dim, i) for i in idx[:arity]]
                y, z = basis_vector(dim, idx[-2]), basis_vector(dim, idx[-1])
                assert ms_brackets(loop, xs, y, z) == ops.bracket_vector(xs, y, z), (
                    dim,
                    idx,
                )


def test_field_table_totality_enforced():
    with pytest.raises(ValueError):
        FormalVectorField.from_table(2, 2, {unit_monomial(2): (F(1), F(0))})
    table = {
        mono: (F(0), F(0)) for mono in monomials_up_to(2, 2)
    }
    field = FormalVectorField.from_table(2, 2, table)
    with pytest.raises(ValueError):
        field.at((3, 0))


def test_connection_identity_restriction_enforced():
    with pytest.raises(ValueError):
        FlatConnection(2, 1, lambda mono, j: zero_vector(2))


def test_ms_brackets_degree_overflow(jordan_setting):
    loop, _, _ = jordan_setting
    xs = [basis_vector(3, 0)] * 4
    with pytest.raises(ValueError):
        ms_brackets(loop, xs, basis_vector(3, 1), basis_vector(3, 2))
