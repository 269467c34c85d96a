"""Curvature identities, Lovelock tensors, divergences, coordinate derivatives."""

import math
from fractions import Fraction

import pytest

from divlab.jets import JetPoly, jet_inverse_matrix
from divlab.lovelock import (
    MetricJet,
    OrderUnderflowError,
    OriginCurvatureContext,
    covariant_deriv_riemann_at_origin,
    curvature,
    divergence,
    dual_route_divergence,
    einstein_contravariant,
    form_delta_ratio,
    jet_coordinate_derivative,
    lovelock_delta,
    lovelock_delta_at_origin,
    lovelock_form,
    model_metric_jet,
    random_metric_jet,
    ricci_contravariant,
    riemann_at_origin,
    tensor_functional_derivative,
    weight_check,
)
from divlab.tensors import DOWN, Signature, SlotSpace, SparseTensor, contract

F = Fraction


def surface_jet(order=3):
    """dx^2 + e^{2x} dy^2: constant curvature K = -1."""
    coeffs = {(0, 0): F(1)}
    fact = 1
    for d in range(1, order + 1):
        fact *= d
        coeffs[(d, 0)] = F(2 ** d, fact)
    e2x = JetPoly(2, order, coeffs)
    one = JetPoly.constant(1, 2, order)
    zero = JetPoly(2, order)
    return MetricJet(2, Signature(2, 0), order, [[one, zero], [zero, e2x]])


def test_random_jet_deterministic_and_flat_at_origin():
    sig = Signature(3, 1)
    a = random_metric_jet(4, sig, 3, seed=42)
    b = random_metric_jet(4, sig, 3, seed=42)
    assert all(a.g[i][j] == b.g[i][j] for i in range(4) for j in range(4))
    assert a.value_at_origin() == [[x if i == j else F(0)
                                    for j, x in enumerate(row)]
                                   for i, row in enumerate(
                                       [[1, 0, 0, 0], [0, 1, 0, 0],
                                        [0, 0, 1, 0], [0, 0, 0, -1]])]


def test_flat_metric_has_zero_curvature():
    mj = model_metric_jet(3, Signature(3, 0), 3)
    curv = curvature(mj)
    assert all(curv.riemann[a][b][c][d].is_zero()
               for a in range(3) for b in range(3)
               for c in range(3) for d in range(3))


def test_surface_curvature_value_and_ricci():
    curv = curvature(surface_jet())
    assert curv.riemann[0][1][0][1].constant_term() == -1
    # Ric = K g at the origin with K = -1
    for i in range(2):
        for j in range(2):
            expected = -curv.metric.g[i][j].constant_term()
            assert curv.ricci[i][j].constant_term() == expected
    assert curv.scalar.constant_term() == -2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_riemann_symmetries_and_first_bianchi(n):
    for seed in range(50):
        sig = Signature(n, 0) if seed % 2 == 0 else Signature(n - 1, 1)
        mj = random_metric_jet(n, sig, 2, seed=seed)
        curv = curvature(mj)
        r = curv.riemann
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        assert r[a][b][c][d] == -r[b][a][c][d]
                        assert r[a][b][c][d] == -r[a][b][d][c]
                        assert r[a][b][c][d] == r[c][d][a][b]
                        first_bianchi = r[a][b][c][d] + r[a][c][d][b] \
                            + r[a][d][b][c]
                        assert first_bianchi.is_zero()


@pytest.mark.parametrize("n,seed", [(3, 5), (4, 6)])
def test_second_bianchi(n, seed):
    mj = random_metric_jet(n, Signature(n - 1, 1), 3, seed=seed)
    curv = curvature(mj)
    nabla = covariant_deriv_riemann_at_origin(curv)

    def nr(k, a, b, c, d):
        return nabla.get((k, a, b, c, d), F(0))

    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    for e in range(n):
                        s = nr(e, a, b, c, d) + nr(c, a, b, d, e) \
                            + nr(d, a, b, e, c)
                        assert s == 0


def test_origin_riemann_matches_jet_curvature():
    mj = random_metric_jet(3, Signature(3, 0), 2, seed=8)
    curv = curvature(mj)
    rlow, _ = riemann_at_origin(mj.to_jet2())
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for d in range(3):
                    assert rlow[a][b][c][d] == \
                        curv.riemann[a][b][c][d].constant_term()


def test_lovelock0_is_inverse_metric():
    mj = random_metric_jet(4, Signature(3, 1), 3, seed=7)
    l0 = lovelock_delta(0, mj)
    gi = jet_inverse_matrix(mj.g)
    assert all(l0[i][j] == gi[i][j].truncate(1) for i in range(4)
               for j in range(4))


def test_lovelock1_flat_is_zero():
    mj = model_metric_jet(4, Signature(4, 0), 3)
    l1 = lovelock_delta(1, mj)
    assert all(l1[i][j].is_zero() for i in range(4) for j in range(4))


@pytest.mark.parametrize("sig", [Signature(4, 0), Signature(3, 1)])
def test_einstein_identification(sig):
    # the form-route L_1 equals (-1)^(q+1) (n-3)! (Ric# - r/2 g*), as jets
    mj = random_metric_jet(4, sig, 3, seed=11)
    lf = lovelock_form(1, mj)
    ein = einstein_contravariant(curvature(mj))
    factor = F((-1) ** (sig.minus + 1) * math.factorial(4 - 3))
    assert all(lf[i][j] == ein[i][j] * factor for i in range(4)
               for j in range(4))


def test_form_matches_delta_up_to_fixed_degree_constant():
    for n, k, seeds in [(4, 1, range(20)), (5, 2, range(3))]:
        sig = Signature(n, 0)
        ratio = form_delta_ratio(k, n, sig)
        assert ratio == F(math.factorial(n - 2 * k - 1), 4 ** k)
        for seed in seeds:
            mj = random_metric_jet(n, sig, 3, seed=seed)
            lf = lovelock_form(k, mj)
            ld = lovelock_delta(k, mj)
            assert all(lf[i][j] == ld[i][j] * ratio
                       for i in range(n) for j in range(n))


def test_form_delta_ratio_carries_metric_sign():
    sig = Signature(3, 1)
    assert form_delta_ratio(0, 4, sig) == -math.factorial(3)
    assert form_delta_ratio(1, 4, sig) == -F(1, 4)


def test_delta_route_k1_closed_form():
    # expanding the three-index generalized delta by hand:
    # L_1 = 2 r g* - 4 Ric#  (delta normalization)
    for sig in (Signature(4, 0), Signature(2, 2)):
        mj = random_metric_jet(4, sig, 3, seed=29)
        curv = curvature(mj)
        l1 = lovelock_delta(1, mj)
        ric_up = ricci_contravariant(curv)
        o2 = mj.order - 2
        ginv2 = [[e.truncate(o2) for e in row] for row in curv.ginv]
        from divlab.jets import jet_mul
        for i in range(4):
            for j in range(4):
                expected = 2 * jet_mul(curv.scalar, ginv2[i][j]) \
                    - 4 * ric_up[i][j]
                assert l1[i][j] == expected


def test_lovelock_form_is_symmetric():
    mj = random_metric_jet(4, Signature(4, 0), 3, seed=19)
    lf = lovelock_form(1, mj)
    assert all(lf[i][j] == lf[j][i] for i in range(4) for j in range(4))


def test_divergence_of_dual_metric_vanishes():
    mj = random_metric_jet(3, Signature(3, 0), 3, seed=23)
    assert divergence(lovelock_delta(0, mj), mj) == [F(0)] * 3


@pytest.mark.parametrize("n,k", [(3, 1), (4, 1), (5, 1), (5, 2)])
def test_divergence_of_lovelock_vanishes(n, k):
    for seed in range(3):
        mj = random_metric_jet(n, Signature(n, 0), 3, seed=seed)
        assert divergence(lovelock_delta(k, mj), mj) == [F(0)] * n


def test_ricci_alone_has_nonzero_divergence():
    # the scalar-curvature correction in the Einstein tensor is necessary
    mj = random_metric_jet(3, Signature(3, 0), 3, seed=13)
    div = divergence(ricci_contravariant(curvature(mj)), mj)
    assert div == [F(-4095, 8192), F(-411, 512), F(-521, 1024)]


def test_divergence_order_underflow():
    mj = random_metric_jet(3, Signature(3, 0), 2, seed=1)
    with pytest.raises(OrderUnderflowError):
        divergence(lovelock_delta(0, mj), mj)


@pytest.mark.parametrize("k,lam", [(0, F(2)), (1, F(3)), (2, F(1, 2)),
                                   (0, F(1)), (1, F(1))])
def test_weight_homogeneity(k, lam):
    n = 5
    mj = random_metric_jet(n, Signature(n, 0), 2, seed=31)
    report = weight_check(k, mj, lam)
    assert report["ok"]
    assert report["weight"] == -2 - 2 * k


def test_weight_check_k0_quarter():
    mj = random_metric_jet(3, Signature(3, 0), 2, seed=2)
    scaled = mj.scaled(F(4))
    l0 = lovelock_delta_at_origin(0, mj.to_jet2())
    l0s = lovelock_delta_at_origin(0, scaled.to_jet2())
    assert all(l0s[i][j] == l0[i][j] / 4 for i in range(3) for j in range(3))


def test_coordinate_derivative_k0_vanishes():
    mj = random_metric_jet(3, Signature(3, 0), 2, seed=3)
    assert not jet_coordinate_derivative(0, mj).comps


def test_coordinate_derivative_cyclic_identity_flat_base():
    mj = model_metric_jet(4, Signature(4, 0), 2)
    d = jet_coordinate_derivative(1, mj)
    assert d.comps    # the linearized tensor is not trivial
    assert d.max_cyclic_residual() == 0


@pytest.mark.parametrize("n,k,seed", [(3, 1, 4), (4, 1, 5), (5, 2, 6)])
def test_coordinate_derivative_identities(n, k, seed):
    mj = random_metric_jet(n, Signature(n, 0), 2, seed=seed)
    d = jet_coordinate_derivative(k, mj)
    assert d.max_cyclic_residual() == 0      # divergence-free linear symmetry
    assert d.s3_residual() == 0              # lands in the normal-tensor space


def test_dual_route_divergence_on_ricci():
    # the resolved index placement reproduces the divergence of a tensor
    # that is *not* divergence-free
    n = 3
    sig = Signature(3, 0)
    for seed in (13, 17):
        mj = random_metric_jet(n, sig, 3, seed=seed)
        curv = curvature(mj)
        lhs = divergence(ricci_contravariant(curv), mj)
        jet2 = mj.to_jet2()
        ctx = OriginCurvatureContext(n, jet2.g0, jet2.d1, sig)
        g0inv = ctx.g0inv

        def eval_ric(j2):
            rl = ctx.riemann_low(j2)
            ric = [[sum(g0inv[a][c] * rl[a][b][c][d] for a in range(n)
                        for c in range(n)) for d in range(n)]
                   for b in range(n)]
            return [[sum(g0inv[i][b] * ric[b][d] * g0inv[d][j]
                         for b in range(n) for d in range(n))
                     for j in range(n)] for i in range(n)]

        deriv = tensor_functional_derivative(eval_ric, jet2, degree=1)
        rhs = dual_route_divergence(
            deriv, covariant_deriv_riemann_at_origin(curv))
        assert rhs == lhs


def test_dual_route_divergence_on_lovelock_is_zero():
    n, k = 4, 1
    mj = random_metric_jet(n, Signature(n, 0), 3, seed=21)
    deriv = jet_coordinate_derivative(k, mj)
    nabla = covariant_deriv_riemann_at_origin(curvature(mj))
    assert dual_route_divergence(deriv, nabla) == [F(0)] * n


def test_ricci_contraction_matches_tensor_core():
    # lowering the Riemann tensor into a SparseTensor and contracting slots
    # 1 and 3 with the inverse metric reproduces the Ricci tensor
    mj = surface_jet()
    curv = curvature(mj)
    n = 2
    o2 = mj.order - 2
    space = SlotSpace(n, (DOWN,) * 4)
    riem = SparseTensor(space)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    val = curv.riemann[a][b][c][d]
                    if not val.is_zero():
                        riem.set((a + 1, b + 1, c + 1, d + 1), val)
    ginv2 = [[e.truncate(o2) for e in row] for row in curv.ginv]
    ric = contract(riem, [(0, 2)], g_inv=ginv2)
    for b in range(n):
        for d in range(n):
            assert ric.get((b + 1, d + 1)) == curv.ricci[b][d]
