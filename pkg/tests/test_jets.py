"""Jet arithmetic: ring laws, composition, inversion."""

import random
from fractions import Fraction

import pytest

from divlab.jets import (
    JetOrderError,
    JetPoly,
    SingularJetError,
    jet_compose,
    jet_inverse_matrix,
    jet_mul,
    jet_partial,
    jet_scalar_inverse,
)

F = Fraction


def poly(num_vars, order, terms):
    return JetPoly(num_vars, order, {tuple(e): F(c) for e, c in terms.items()})


def random_jet(rng, num_vars=2, order=3, maxterms=6):
    terms = {}
    for _ in range(rng.randint(0, maxterms)):
        exp = tuple(rng.randint(0, order) for _ in range(num_vars))
        if sum(exp) <= order:
            terms[exp] = F(rng.randint(-4, 4), rng.randint(1, 4))
    return JetPoly(num_vars, order, terms)


def test_mul_polynomial_identity():
    # (1 + x)(1 - x) at order 2 -> 1 - x^2
    a = poly(1, 2, {(0,): 1, (1,): 1})
    b = poly(1, 2, {(0,): 1, (1,): -1})
    assert jet_mul(a, b) == poly(1, 2, {(0,): 1, (2,): -1})


def test_mul_truncation_kills_high_degree():
    x = JetPoly.variable(0, 1, 1)
    assert jet_mul(x, x).is_zero()


def test_mul_hand_expanded_product():
    # (1 + 2x + 2x^2)(1 - 2x + 2x^2) = 1 + 0x + 0x^2 + 0x^3 + 4x^4
    a = poly(1, 2, {(0,): 1, (1,): 2, (2,): 2})
    b = poly(1, 2, {(0,): 1, (1,): -2, (2,): 2})
    assert jet_mul(a, b) == poly(1, 2, {(0,): 1})


def test_mul_rejects_order_mixing():
    a = JetPoly.constant(1, 1, 2)
    b = JetPoly.constant(1, 1, 3)
    with pytest.raises(JetOrderError):
        jet_mul(a, b)
    with pytest.raises(JetOrderError):
        jet_mul(JetPoly.constant(1, 2, 2), a)


def test_ring_laws_on_random_instances():
    rng = random.Random(20240)
    for _ in range(60):
        a, b, c = (random_jet(rng) for _ in range(3))
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_scalar_inverse_geometric_series():
    f = poly(1, 2, {(0,): 1, (1,): 1})
    assert jet_scalar_inverse(f) == poly(1, 2, {(0,): 1, (1,): -1, (2,): 1})
    with pytest.raises(SingularJetError):
        jet_scalar_inverse(JetPoly.variable(0, 1, 2))


def test_inverse_matrix_identity():
    eye = [[JetPoly.constant(1 if i == j else 0, 2, 2) for j in range(2)]
           for i in range(2)]
    assert jet_inverse_matrix(eye) == eye


def test_inverse_matrix_1x1_geometric():
    m = [[poly(1, 2, {(0,): 1, (1,): 1})]]
    assert jet_inverse_matrix(m)[0][0] == poly(1, 2, {(0,): 1, (1,): -1, (2,): 1})


def test_inverse_matrix_diagonal_order1():
    m = [[JetPoly.constant(1, 1, 1), JetPoly(1, 1)],
         [JetPoly(1, 1), poly(1, 1, {(0,): 1, (1,): 2})]]
    inv = jet_inverse_matrix(m)
    assert inv[1][1] == poly(1, 1, {(0,): 1, (1,): -2})
    # verify the product is the identity mod degree 2
    prod00 = jet_mul(m[0][0], inv[0][0]) + jet_mul(m[0][1], inv[1][0])
    prod11 = jet_mul(m[1][0], inv[0][1]) + jet_mul(m[1][1], inv[1][1])
    assert prod00 == JetPoly.constant(1, 1, 1)
    assert prod11 == JetPoly.constant(1, 1, 1)


def test_inverse_matrix_random_instances():
    rng = random.Random(7)
    for trial in range(100):
        n = rng.randint(1, 3)
        order = rng.randint(1, 3)
        nv = rng.randint(1, 2)
        mat = []
        for i in range(n):
            row = []
            for j in range(n):
                f = random_jet(rng, nv, order, maxterms=3)
                # force an invertible constant term
                const = F(1 if i == j else 0)
                terms = {e: c for e, c in f.terms.items() if sum(e) > 0}
                terms[(0,) * nv] = const + F(rng.randint(-1, 1), 3) * (i == j)
                row.append(JetPoly(nv, order, terms))
            mat.append(row)
        try:
            inv = jet_inverse_matrix(mat)
        except SingularJetError:
            continue
        for i in range(n):
            for j in range(n):
                s = JetPoly(nv, order)
                for k in range(n):
                    s = s + jet_mul(mat[i][k], inv[k][j])
                assert s == JetPoly.constant(1 if i == j else 0, nv, order)


def test_inverse_matrix_singular_origin():
    m = [[JetPoly.variable(0, 1, 2)]]
    with pytest.raises(SingularJetError):
        jet_inverse_matrix(m)


def test_compose_quadratic():
    # f = x^2 under x -> x + y at order 2 gives x^2 + 2xy + y^2
    f = poly(1, 2, {(2,): 1})
    sub = poly(2, 2, {(1, 0): 1, (0, 1): 1})
    assert jet_compose(f, [sub]) == poly(2, 2, {(2, 0): 1, (1, 1): 2, (0, 2): 1})


def test_compose_identity_law():
    rng = random.Random(3)
    for _ in range(20):
        f = random_jet(rng, 2, 3)
        subs = [JetPoly.variable(i, 2, 3) for i in range(2)]
        assert jet_compose(f, subs) == f


def test_compose_linear_passthrough():
    f = JetPoly.variable(0, 1, 2)
    sub = poly(1, 2, {(1,): 1, (2,): F(-1, 2)})
    assert jet_compose(f, [sub]) == sub


def test_compose_rejects_moving_origin():
    f = JetPoly.variable(0, 1, 2)
    with pytest.raises(ValueError):
        jet_compose(f, [JetPoly.constant(1, 1, 2)])


def test_partial_basics():
    f = poly(2, 3, {(2, 1): 1})       # x^2 y
    assert jet_partial(f, 0) == poly(2, 2, {(1, 1): 2})
    assert jet_partial(JetPoly.constant(5, 2, 3), 0).is_zero()
    with pytest.raises(ValueError):
        jet_partial(f, 2)


def test_mixed_partials_commute():
    rng = random.Random(11)
    for _ in range(30):
        f = random_jet(rng, 3, 4)
        assert jet_partial(jet_partial(f, 0), 1) == jet_partial(jet_partial(f, 1), 0)


def test_partial_lowers_order():
    f = poly(1, 3, {(1,): 1})
    assert jet_partial(f, 0).order == 2


def test_truncate_is_explicit():
    f = poly(1, 3, {(3,): 1, (1,): 2})
    assert f.truncate(2) == poly(1, 2, {(1,): 2})
    with pytest.raises(JetOrderError):
        f.truncate(4)
