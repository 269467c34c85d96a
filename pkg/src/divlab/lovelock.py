"""Metric-jet differential geometry and the Lovelock tensors.

Everything is exact: metrics are jets with rational coefficients, curvature
is computed symbolically, and the divergence of a Lovelock tensor comes out
as the literal zero vector.

Curvature convention (fixed; all identities are convention-covariant):

    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},

lowered with the metric, Ric_{bd} = R^a_{bad}, scalar = g^{bd} Ric_{bd}.
With this choice the unit-disk-style surface  dx^2 + e^{2x} dy^2  has
R_{1212}(0) = -1 = K.

Two constructions of the Lovelock tensors are implemented:

* ``lovelock_delta`` — the generalized-Kronecker-delta contraction
  delta^{i a1 b1 ... }_{l c1 d1 ...} R_{a1 b1}^{c1 d1} ... raised with g*,
  with unit leading constant, so L_0 = g* exactly;
* ``lovelock_form`` — the wedge of curvature and metric factors seen as
  valued forms, carried to a 2-tensor by contraction with the volume form
  (both volume factors contribute, so only |det g| enters: no square roots).

The two differ by the per-degree constant  sign(det g) (n-2k-1)! / 4^k:
the sign and the k = 0 value are measured on the model metric, while the
factorial/4^k refinement is forced by the wedge combinatorics (k curvature
factors each carry two antisymmetrized pairs, and the n-2k-1 metric factors
contribute their permutations).  ``form_delta_ratio`` packages it.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .jets import (JetPoly, jet_inverse_matrix, jet_mul, jet_partial,
                   jet_scalar_inverse)
from .normal import MetricJet2, _g0_inverse
from .tensors import Signature

F = Fraction
ZERO = F(0)


class OrderUnderflowError(ValueError):
    """A computation needs more jet order than the input carries."""


@dataclass
class MetricJet:
    """Order-r Taylor data of a metric: symmetric matrix of jets."""
    n: int
    signature: Signature
    order: int
    g: list

    def __post_init__(self):
        for a in range(self.n):
            for b in range(self.n):
                if self.g[a][b] != self.g[b][a]:
                    raise ValueError("metric jet must be symmetric")
                if self.g[a][b].order != self.order:
                    raise ValueError("metric entries must carry the declared order")

    def value_at_origin(self):
        return [[self.g[a][b].constant_term() for b in range(self.n)]
                for a in range(self.n)]

    def scaled(self, factor: F) -> "MetricJet":
        return MetricJet(self.n, self.signature, self.order,
                         [[self.g[a][b] * factor for b in range(self.n)]
                          for a in range(self.n)])

    def truncated(self, order: int) -> "MetricJet":
        return MetricJet(self.n, self.signature, order,
                         [[self.g[a][b].truncate(order) for b in range(self.n)]
                          for a in range(self.n)])

    def to_jet2(self) -> MetricJet2:
        return MetricJet2.from_jets(
            [[self.g[a][b].truncate(2) for b in range(self.n)]
             for a in range(self.n)], self.signature)


def random_metric_jet(n: int, signature: Signature, order: int,
                      seed: int) -> MetricJet:
    """Model metric plus a seeded random polynomial perturbation.

    The perturbation vanishes at the origin and has small rational
    coefficients with denominators in {1, 2, 4, 8, 16}, so the signature at
    the origin is exactly the requested one and all downstream arithmetic
    stays cheap.
    """
    if order < 2:
        raise ValueError("metric jets need order >= 2")
    rng = random.Random(f"jet:{n}:{signature.plus}:{signature.minus}:"
                        f"{order}:{seed}")
    eta = signature.eta()
    monomials = [e for e in itertools.product(range(order + 1), repeat=n)
                 if 1 <= sum(e) <= order]
    g = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            terms = {}
            if a == b:
                terms[(0,) * n] = eta[a]
            for _ in range(3):
                exp = rng.choice(monomials)
                num = rng.choice([-2, -1, 1, 2])
                den = rng.choice([1, 2, 4, 8, 16])
                coeff = F(num, den)
                terms[exp] = terms.get(exp, ZERO) + coeff
            entry = JetPoly(n, order, {e: c for e, c in terms.items() if c})
            g[a][b] = entry
            g[b][a] = entry
    return MetricJet(n, signature, order, g)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

@dataclass
class CurvatureData:
    n: int
    order: int                  # of the input metric
    metric: MetricJet
    ginv: list                  # jets at metric order
    gamma: list                 # Gamma^a_{bc}, order-1 less
    riemann_up: list            # R^a_{bcd}
    riemann: list               # R_{abcd}
    ricci: list                 # Ric_{ab}
    scalar: JetPoly


def curvature(mj: MetricJet) -> CurvatureData:
    if mj.order < 2:
        raise OrderUnderflowError("curvature needs a metric of order >= 2")
    n = mj.n
    ginv = jet_inverse_matrix(mj.g)
    o1, o2 = mj.order - 1, mj.order - 2
    ginv1 = [[e.truncate(o1) for e in row] for row in ginv]
    dg = [[[jet_partial(mj.g[a][b], c) for c in range(n)] for b in range(n)]
          for a in range(n)]
    half = F(1, 2)
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                s = JetPoly(n, o1)
                for e in range(n):
                    if ginv1[a][e].is_zero():
                        continue
                    tmp = dg[e][b][c] + dg[e][c][b] - dg[b][c][e]
                    if tmp.is_zero():
                        continue
                    s = s + jet_mul(ginv1[a][e], tmp)
                s = s * half
                gamma[a][b][c] = s
                gamma[a][c][b] = s
    gamma2 = [[[gamma[a][b][c].truncate(o2) for c in range(n)]
               for b in range(n)] for a in range(n)]
    riemann_up = [[[[None] * n for _ in range(n)] for _ in range(n)]
                  for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    s = jet_partial(gamma[a][d][b], c) - \
                        jet_partial(gamma[a][c][b], d)
                    for e in range(n):
                        if not gamma2[a][c][e].is_zero() and \
                                not gamma2[e][d][b].is_zero():
                            s = s + jet_mul(gamma2[a][c][e], gamma2[e][d][b])
                        if not gamma2[a][d][e].is_zero() and \
                                not gamma2[e][c][b].is_zero():
                            s = s - jet_mul(gamma2[a][d][e], gamma2[e][c][b])
                    riemann_up[a][b][c][d] = s
    g2 = [[e.truncate(o2) for e in row] for row in mj.g]
    riemann = [[[[None] * n for _ in range(n)] for _ in range(n)]
               for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    s = JetPoly(n, o2)
                    for e in range(n):
                        if not g2[a][e].is_zero() and \
                                not riemann_up[e][b][c][d].is_zero():
                            s = s + jet_mul(g2[a][e], riemann_up[e][b][c][d])
                    riemann[a][b][c][d] = s
    ricci = [[None] * n for _ in range(n)]
    for b in range(n):
        for d in range(n):
            s = JetPoly(n, o2)
            for a in range(n):
                s = s + riemann_up[a][b][a][d]
            ricci[b][d] = s
    ginv2 = [[e.truncate(o2) for e in row] for row in ginv]
    scalar = JetPoly(n, o2)
    for b in range(n):
        for d in range(n):
            if not ginv2[b][d].is_zero() and not ricci[b][d].is_zero():
                scalar = scalar + jet_mul(ginv2[b][d], ricci[b][d])
    return CurvatureData(n=n, order=mj.order, metric=mj, ginv=ginv,
                         gamma=gamma, riemann_up=riemann_up, riemann=riemann,
                         ricci=ricci, scalar=scalar)


def covariant_deriv_riemann_at_origin(curv: CurvatureData):
    """(nabla_k R)_{abcd} at the origin; needs a metric of order >= 3."""
    if curv.order < 3:
        raise OrderUnderflowError("covariant derivative of R needs order >= 3")
    n = curv.n
    gamma0 = [[[curv.gamma[a][b][c].constant_term() for c in range(n)]
               for b in range(n)] for a in range(n)]
    r0 = [[[[curv.riemann[a][b][c][d].constant_term() for d in range(n)]
            for c in range(n)] for b in range(n)] for a in range(n)]
    out = {}
    for k in range(n):
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        exp = [0] * n
                        exp[k] = 1
                        val = curv.riemann[a][b][c][d].coefficient(tuple(exp))
                        for e in range(n):
                            val -= gamma0[e][k][a] * r0[e][b][c][d]
                            val -= gamma0[e][k][b] * r0[a][e][c][d]
                            val -= gamma0[e][k][c] * r0[a][b][e][d]
                            val -= gamma0[e][k][d] * r0[a][b][c][e]
                        if val:
                            out[(k, a, b, c, d)] = val
    return out


# ---------------------------------------------------------------------------
# Lovelock tensors, delta route
# ---------------------------------------------------------------------------

def _ascending_pair_sequences(letters, k):
    """Ordered sequences of k disjoint ascending pairs covering ``letters``."""
    letters = tuple(letters)
    if k == 0:
        yield ()
        return
    for pair in itertools.combinations(letters, 2):
        rest = tuple(x for x in letters if x not in pair)
        for tail in _ascending_pair_sequences(rest, k - 1):
            yield (pair,) + tail


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _delta_terms(n: int, k: int):
    """Precomputed index data for the generalized-delta contraction.

    Yields (i, l, a_pairs, c_pairs, sign); the orientation restriction to
    ascending pairs is repaid by the overall factor 4**k.
    """
    s = n - 2 * k - 1
    if s < 0:
        return
    for u_set in itertools.combinations(range(n), s):
        letters = tuple(x for x in range(n) if x not in u_set)
        for i in letters:
            rest_i = tuple(x for x in letters if x != i)
            for a_pairs in _ascending_pair_sequences(rest_i, k):
                sign_a = _perm_sign((i,) + tuple(itertools.chain(*a_pairs))
                                    + u_set)
                for l in letters:
                    rest_l = tuple(x for x in letters if x != l)
                    for c_pairs in _ascending_pair_sequences(rest_l, k):
                        sign_c = _perm_sign((l,) + tuple(
                            itertools.chain(*c_pairs)) + u_set)
                        yield i, l, a_pairs, c_pairs, sign_a * sign_c


_DELTA_CACHE: dict = {}


def delta_terms(n: int, k: int):
    key = (n, k)
    if key not in _DELTA_CACHE:
        _DELTA_CACHE[key] = list(_delta_terms(n, k))
    return _DELTA_CACHE[key]


def lovelock_delta(k: int, mj: MetricJet):
    """L_k by the generalized-Kronecker-delta contraction; L_0 = g*.

    Returns the n x n matrix of jets at order (metric order - 2).  Unit
    leading constant: the identity permutation inside the delta carries
    coefficient 1.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    n = mj.n
    o2 = mj.order - 2
    if k == 0:
        ginv = jet_inverse_matrix(mj.g)
        return [[e.truncate(o2) for e in row] for row in ginv]
    curv = curvature(mj)
    ginv2 = [[e.truncate(o2) for e in row] for row in curv.ginv]
    rmix = _mixed_riemann(curv, ginv2)
    zero = JetPoly(n, o2)
    factor = F(4) ** k
    lmix = [[zero for _ in range(n)] for _ in range(n)]
    for i, l, a_pairs, c_pairs, sign in delta_terms(n, k):
        prod = None
        for (a, b), (c, d) in zip(a_pairs, c_pairs):
            rj = rmix[a][b][c][d]
            if rj.is_zero():
                prod = None
                break
            prod = rj if prod is None else jet_mul(prod, rj)
        if prod is None:
            continue
        lmix[i][l] = lmix[i][l] + (prod * (sign * factor))
    out = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = zero
            for l in range(n):
                if not lmix[i][l].is_zero() and not ginv2[l][j].is_zero():
                    s = s + jet_mul(lmix[i][l], ginv2[l][j])
            out[i][j] = s
    return out


def _mixed_riemann(curv: CurvatureData, ginv2):
    n = curv.n
    o2 = curv.order - 2
    zero = JetPoly(n, o2)
    rmix = [[[[zero] * n for _ in range(n)] for _ in range(n)]
            for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(n):
                for d in range(c + 1, n):
                    s = zero
                    for e in range(n):
                        if ginv2[e][c].is_zero():
                            continue
                        for f in range(n):
                            if ginv2[f][d].is_zero():
                                continue
                            rlow = curv.riemann[a][b][e][f]
                            if rlow.is_zero():
                                continue
                            s = s + jet_mul(jet_mul(rlow, ginv2[e][c]),
                                            ginv2[f][d])
                    rmix[a][b][c][d] = s
                    rmix[b][a][c][d] = -s
                    rmix[a][b][d][c] = -s
                    rmix[b][a][d][c] = s
    return rmix


# ---------------------------------------------------------------------------
# Lovelock tensors, valued-form route
# ---------------------------------------------------------------------------

def _merge_sign(a: tuple, b: tuple):
    """Sign of sorting the concatenation of two sorted disjoint tuples."""
    inv = 0
    for x in b:
        inv += sum(1 for y in a if y > x)
    merged = tuple(sorted(a + b))
    return merged, (-1) ** inv


def _wedge(alpha: dict, beta: dict, zero: JetPoly) -> dict:
    out: dict = {}
    for (a1, b1), va in alpha.items():
        for (a2, b2), vb in beta.items():
            if set(a1) & set(a2) or set(b1) & set(b2):
                continue
            ka, sa = _merge_sign(a1, a2)
            kb, sb = _merge_sign(b1, b2)
            term = jet_mul(va, vb) * (sa * sb)
            key = (ka, kb)
            cur = out.get(key)
            s = term if cur is None else cur + term
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return out


def det_jet(mat) -> JetPoly:
    n = len(mat)
    nv, order = mat[0][0].num_vars, mat[0][0].order
    total = JetPoly(nv, order)
    for perm in itertools.permutations(range(n)):
        prod = None
        dead = False
        for i in range(n):
            e = mat[i][perm[i]]
            if e.is_zero():
                dead = True
                break
            prod = e if prod is None else jet_mul(prod, e)
        if dead:
            continue
        total = total + prod * _perm_sign(perm)
    return total


def lovelock_form(k: int, mj: MetricJet):
    """L_k via the wedge of k curvature and n-2k-1 metric factors.

    The wedge lives in (n-1)-forms valued in (n-1)-forms; contraction with
    the volume form on both factors brings it back to a 2-contravariant
    tensor.  The volume form appears twice, so only |det g| enters and the
    computation stays rational.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    n = mj.n
    if 2 * k > n - 1:
        raise ValueError("the wedge needs 2k <= n-1")
    o2 = mj.order - 2
    if k == 0:
        g_used = mj.truncated(o2) if o2 < mj.order else mj
        comps = {((a,), (b,)): g_used.g[a][b] for a in range(n)
                 for b in range(n) if not g_used.g[a][b].is_zero()}
        curv = None
    else:
        curv = curvature(mj)
        comps = None
    zero = JetPoly(n, o2)

    g2 = [[e.truncate(o2) for e in row] for row in mj.g]
    g_form = {((a,), (b,)): g2[a][b] for a in range(n) for b in range(n)
              if not g2[a][b].is_zero()}
    acc = {((), ()): JetPoly.constant(1, n, o2)}
    if k:
        r_form = {}
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(n):
                    for d in range(c + 1, n):
                        val = curv.riemann[a][b][c][d]
                        if not val.is_zero():
                            r_form[((a, b), (c, d))] = val
        for _ in range(k):
            acc = _wedge(acc, r_form, zero)
    for _ in range(n - 2 * k - 1):
        acc = _wedge(acc, g_form, zero)

    det = det_jet(g2)
    sigma = 1 if det.constant_term() > 0 else -1
    inv_absdet = jet_scalar_inverse(det * sigma)
    out = [[zero for _ in range(n)] for _ in range(n)]
    full = tuple(range(n))
    for i in range(n):
        ci = tuple(x for x in full if x != i)
        for j in range(n):
            cj = tuple(x for x in full if x != j)
            coeff = acc.get((ci, cj))
            if coeff is None or coeff.is_zero():
                continue
            out[i][j] = jet_mul(coeff, inv_absdet) * ((-1) ** (i + j))
    return out


def form_delta_ratio(k: int, n: int, signature: Signature) -> F:
    """Constant with lovelock_form = ratio * lovelock_delta at degree k.

    The k = 0 value (sign and (n-1)!) is measured on the model metric; the
    degree dependence (n-2k-1)!/(n-1)! / 4^k is forced by the wedge
    combinatorics.
    """
    c0 = _measured_c0(n, signature)
    return c0 * F(math.factorial(n - 2 * k - 1), math.factorial(n - 1)) \
        / F(4) ** k


_C0_CACHE: dict = {}


def _measured_c0(n: int, signature: Signature) -> F:
    key = (n, signature.plus, signature.minus)
    if key not in _C0_CACHE:
        eta_jet = model_metric_jet(n, signature, 2)
        form0 = lovelock_form(0, eta_jet)
        delta0 = lovelock_delta(0, eta_jet)
        ratio = None
        for i in range(n):
            if not delta0[i][i].is_zero():
                ratio = form0[i][i].constant_term() / \
                    delta0[i][i].constant_term()
                break
        _C0_CACHE[key] = ratio
    return _C0_CACHE[key]


def model_metric_jet(n: int, signature: Signature, order: int) -> MetricJet:
    eta = signature.eta()
    g = [[JetPoly.constant(eta[a] if a == b else 0, n, order)
          for b in range(n)] for a in range(n)]
    return MetricJet(n, signature, order, g)


def einstein_contravariant(curv: CurvatureData):
    """Ric^{ij} - (r/2) g*^{ij} as jets at order - 2."""
    n = curv.n
    o2 = curv.order - 2
    ginv2 = [[e.truncate(o2) for e in row] for row in curv.ginv]
    half = F(1, 2)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = JetPoly(n, o2)
            for a in range(n):
                for b in range(n):
                    if not ginv2[i][a].is_zero() and \
                            not curv.ricci[a][b].is_zero() and \
                            not ginv2[b][j].is_zero():
                        s = s + jet_mul(jet_mul(ginv2[i][a], curv.ricci[a][b]),
                                        ginv2[b][j])
            s = s - jet_mul(curv.scalar, ginv2[i][j]) * half
            out[i][j] = s
    return out


def ricci_contravariant(curv: CurvatureData):
    n = curv.n
    o2 = curv.order - 2
    ginv2 = [[e.truncate(o2) for e in row] for row in curv.ginv]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = JetPoly(n, o2)
            for a in range(n):
                for b in range(n):
                    if not ginv2[i][a].is_zero() and \
                            not curv.ricci[a][b].is_zero() and \
                            not ginv2[b][j].is_zero():
                        s = s + jet_mul(jet_mul(ginv2[i][a], curv.ricci[a][b]),
                                        ginv2[b][j])
            out[i][j] = s
    return out


# ---------------------------------------------------------------------------
# divergence and homogeneity
# ---------------------------------------------------------------------------

def divergence(t_matrix, mj: MetricJet):
    """(div T)^j = d_k T^{jk} + Gamma^j_{sk} T^{sk} + Gamma^k_{sk} T^{js} at 0.

    ``t_matrix`` is an n x n matrix of jets of order >= 1 built from a
    metric of order >= 3 (so the Christoffel values at the origin exist).
    """
    n = mj.n
    if mj.order < 3:
        raise OrderUnderflowError("divergence needs the metric to order >= 3")
    for row in t_matrix:
        for e in row:
            if e.order < 1:
                raise OrderUnderflowError("tensor must carry jet order >= 1")
    jet2 = mj.to_jet2()
    from .normal import christoffel_at_origin
    gamma0 = christoffel_at_origin(jet2)
    t0 = [[t_matrix[a][b].constant_term() for b in range(n)] for a in range(n)]
    out = []
    for j in range(n):
        val = ZERO
        for kk in range(n):
            exp = [0] * n
            exp[kk] = 1
            val += t_matrix[j][kk].coefficient(tuple(exp))
        for s in range(n):
            for kk in range(n):
                val += gamma0[j][s][kk] * t0[s][kk]
                val += gamma0[kk][s][kk] * t0[j][s]
        out.append(val)
    return out


def weight_check(k: int, mj: MetricJet, lam: F) -> dict:
    """L_k(lambda^2 g) = lambda^(-2-2k) L_k(g) at the origin, exactly."""
    lam = F(lam)
    if not lam:
        raise ValueError("lambda must be nonzero")
    scaled = mj.scaled(lam * lam)
    l_base = lovelock_delta(k, mj)
    l_scaled = lovelock_delta(k, scaled)
    expect = lam ** (-2 - 2 * k)
    n = mj.n
    ok = all(l_scaled[i][j].constant_term()
             == expect * l_base[i][j].constant_term()
             for i in range(n) for j in range(n))
    return {"k": k, "lambda": str(lam), "weight": -2 - 2 * k, "ok": ok}


# ---------------------------------------------------------------------------
# origin-only fast path and coordinate derivatives
# ---------------------------------------------------------------------------

class OriginCurvatureContext:
    """Shared g0/d1 data for repeated origin-curvature evaluations.

    The lowered Riemann at the origin splits as a fixed part (products of
    first derivatives) plus the classical linear pattern in the second
    derivatives

        (1/2) (g_{ad,bc} + g_{bc,ad} - g_{bd,ac} - g_{ac,bd}),

    so sweeping d2 (as the coordinate-derivative interpolation does) costs
    only the linear part per evaluation.
    """

    def __init__(self, n: int, g0, d1: dict, signature=None):
        self.n = n
        self.g0 = g0
        self.signature = signature
        self.g0inv = _g0_inverse(g0)
        probe = MetricJet2(n, g0, d1, {}, signature)
        half = F(1, 2)
        gam_low = [[[half * (probe.get_d1(e, d, b) + probe.get_d1(e, b, d)
                             - probe.get_d1(d, b, e))
                     for b in range(n)] for d in range(n)] for e in range(n)]
        g0inv = self.g0inv
        self.gamma0 = [[[sum((g0inv[a][e] * gam_low[e][d][b]
                              for e in range(n) if g0inv[a][e]), ZERO)
                         for b in range(n)] for d in range(n)]
                       for a in range(n)]
        dginv = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for c in range(n):
            for a in range(n):
                for e in range(n):
                    s = ZERO
                    for p in range(n):
                        if not g0inv[a][p]:
                            continue
                        for q in range(n):
                            if g0inv[q][e]:
                                s -= g0inv[a][p] * probe.get_d1(p, q, c) \
                                    * g0inv[q][e]
                    dginv[c][a][e] = s
        # d2-independent part of R^a_{bcd}(0), then lowered with g0
        fixed_up = [[[[ZERO] * n for _ in range(n)] for _ in range(n)]
                    for _ in range(n)]
        gamma0 = self.gamma0
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        val = ZERO
                        for e in range(n):
                            if dginv[c][a][e]:
                                val += dginv[c][a][e] * gam_low[e][d][b]
                            if dginv[d][a][e]:
                                val -= dginv[d][a][e] * gam_low[e][c][b]
                            val += gamma0[a][c][e] * gamma0[e][d][b]
                            val -= gamma0[a][d][e] * gamma0[e][c][b]
                        fixed_up[a][b][c][d] = val
        self.fixed_low = [[[[sum((g0[a][e] * fixed_up[e][b][c][d]
                                  for e in range(n) if g0[a][e]), ZERO)
                             for d in range(n)] for c in range(n)]
                           for b in range(n)] for a in range(n)]

    def riemann_low(self, jet2: MetricJet2):
        """Lowered Riemann at the origin for the context's g0/d1 and the
        given second derivatives."""
        n = self.n
        half = F(1, 2)
        out = [[[[ZERO] * n for _ in range(n)] for _ in range(n)]
               for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        out[a][b][c][d] = self.fixed_low[a][b][c][d] + half * (
                            jet2.get_d2(a, d, b, c) + jet2.get_d2(b, c, a, d)
                            - jet2.get_d2(b, d, a, c) - jet2.get_d2(a, c, b, d))
        return out


def riemann_at_origin(jet2: MetricJet2):
    """R_{abcd}(0) and the inverse metric value, pure rational arithmetic."""
    ctx = OriginCurvatureContext(jet2.n, jet2.g0, jet2.d1, jet2.signature)
    return ctx.riemann_low(jet2), ctx.g0inv


def lovelock_delta_at_origin(k: int, jet2: MetricJet2,
                             ctx: OriginCurvatureContext | None = None):
    """L_k(0) as a rational matrix (delta normalization).

    ``ctx`` may carry precomputed g0/d1 data when sweeping many second
    derivative values at the same 1-jet.
    """
    n = jet2.n
    if k == 0:
        return _g0_inverse(jet2.g0)
    if ctx is None:
        ctx = OriginCurvatureContext(n, jet2.g0, jet2.d1, jet2.signature)
    riem_low, g0inv = ctx.riemann_low(jet2), ctx.g0inv
    rmix = [[[[ZERO] * n for _ in range(n)] for _ in range(n)]
            for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(n):
                for d in range(c + 1, n):
                    s = ZERO
                    for e in range(n):
                        if not g0inv[e][c]:
                            continue
                        for f in range(n):
                            if g0inv[f][d] and riem_low[a][b][e][f]:
                                s += riem_low[a][b][e][f] * g0inv[e][c] \
                                    * g0inv[f][d]
                    rmix[a][b][c][d] = s
                    rmix[b][a][c][d] = -s
                    rmix[a][b][d][c] = -s
                    rmix[b][a][d][c] = s
    factor = F(4) ** k
    lmix = [[ZERO] * n for _ in range(n)]
    for i, l, a_pairs, c_pairs, sign in delta_terms(n, k):
        prod = F(sign)
        for (a, b), (c, d) in zip(a_pairs, c_pairs):
            r = rmix[a][b][c][d]
            if not r:
                prod = ZERO
                break
            prod *= r
        if prod:
            lmix[i][l] += prod * factor
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = ZERO
            for l in range(n):
                if lmix[i][l] and g0inv[l][j]:
                    s += lmix[i][l] * g0inv[l][j]
            out[i][j] = s
    return out


class CoordinateDerivative:
    """Derivative of a 2-tensor functional along the second-derivative
    coordinates of the metric, as a fully symmetric-pair tensor.

    Components are polarized: D^{ij;abcd} pairs against symmetric
    perturbations via the unrestricted sum over a, b, c, d.
    """

    def __init__(self, n: int, comps: dict):
        self.n = n
        self.comps = comps      # (i, j, a<=b, c<=d) -> Fraction

    def get(self, i, j, a, b, c, d) -> F:
        a, b = min(a, b), max(a, b)
        c, d = min(c, d), max(c, d)
        return self.comps.get((i, j, a, b, c, d), ZERO)

    def cyclic_residual(self, i, j, a, b, c, d) -> F:
        """The three-term cyclic sum over (j, c, d); zero iff the identity holds."""
        return (self.get(i, j, a, b, c, d) + self.get(i, d, a, b, j, c)
                + self.get(i, c, a, b, d, j))

    def max_cyclic_residual(self) -> F:
        worst = ZERO
        n = self.n
        for i, j, a, b, c, d in itertools.product(range(n), repeat=6):
            if a > b:
                continue
            r = self.cyclic_residual(i, j, a, b, c, d)
            if r:
                return r
        return worst

    def s3_residual(self) -> F:
        """Symmetrization over the last three of (a, b, c, d); zero iff the
        derivative lies in the contravariant normal-tensor space."""
        n = self.n
        for i, j, a, b, c, d in itertools.product(range(n), repeat=6):
            r = self.get(i, j, a, b, c, d) + self.get(i, j, a, c, b, d) \
                + self.get(i, j, a, d, b, c)
            if r:
                return r
        return ZERO


def tensor_functional_derivative(evaluate, jet2: MetricJet2, degree: int
                                 ) -> CoordinateDerivative:
    """d(evaluate)/d g_{ab,cd} at a 2-jet, by exact interpolation.

    ``evaluate(jet2) -> n x n rational matrix``; it must be polynomial of
    degree <= ``degree`` in the second-derivative coordinates jointly, so
    degree+1 exact evaluations along each coordinate direction determine
    the linear coefficient.  Never a floating-point difference.
    """
    n = jet2.n
    base = evaluate(jet2)
    comps = {}
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                for d in range(c, n):
                    values = [base]
                    for t in range(1, degree + 1):
                        d2 = dict(jet2.d2)
                        key = (a, b, c, d)
                        d2[key] = d2.get(key, ZERO) + t
                        pert = MetricJet2(n, jet2.g0, jet2.d1, d2,
                                          jet2.signature)
                        values.append(evaluate(pert))
                    mult = (1 if a == b else 2) * (1 if c == d else 2)
                    for i in range(n):
                        for j in range(n):
                            samples = [v[i][j] for v in values]
                            coeff = _linear_coefficient(samples)
                            if coeff:
                                comps[(i, j, a, b, c, d)] = coeff / mult
    return CoordinateDerivative(n, comps)


def _linear_coefficient(samples) -> F:
    """Coefficient of t in the polynomial with values samples[t], t=0..deg."""
    deg = len(samples) - 1
    if deg == 0:
        return ZERO
    if deg == 1:
        return samples[1] - samples[0]
    if deg == 2:
        return (4 * samples[1] - samples[2] - 3 * samples[0]) / 2
    # general finite-difference/Newton form for higher degrees
    coeffs = _newton_to_monomial(samples)
    return coeffs[1]


def _newton_to_monomial(samples):
    """Monomial coefficients of the polynomial with p(t) = samples[t]."""
    k = len(samples)
    table = [list(samples)]
    for lvl in range(1, k):
        prev = table[-1]
        table.append([prev[i + 1] - prev[i] for i in range(len(prev) - 1)])
    poly = [ZERO] * k
    basis = [F(1)]         # expansion of prod_{r<lvl} (t - r)
    for lvl in range(k):
        coeff = table[lvl][0] / math.factorial(lvl)
        for idx, b in enumerate(basis):
            poly[idx] += coeff * b
        new_basis = [ZERO] * (len(basis) + 1)
        for idx, b in enumerate(basis):
            new_basis[idx + 1] += b
            new_basis[idx] -= b * lvl
        basis = new_basis
    return poly


# Index placement of the dual-route divergence formula
#     (div T)^j = (2/3) sum D^{jk;abcd} nabla_k R_{cabd},
# resolved once against an independent divergence computation on seeded
# non-divergence-free tensors: with this module's curvature convention the
# formula holds verbatim, positive sign, R slots filled in the order
# (c, a, b, d).
REMARK_SLOT_ORDER = (2, 0, 1, 3)
REMARK_SIGN = 1


def dual_route_divergence(deriv: CoordinateDerivative, nabla_r: dict) -> list:
    """(div T)^j recomputed from the coordinate derivative of T.

    ``nabla_r`` maps (k, four Riemann slots) to the covariant derivative of
    the lowered curvature at the origin.  The sum over a, b, c, d is
    unrestricted: the derivative tensor is pair-symmetric but the curvature
    slots are not, so no multiplicity shortcut applies.
    """
    n = deriv.n
    # regroup the stored components by (j, k) once, then expand arrangements
    out = []
    for j in range(n):
        total = ZERO
        for (i, jj, a0, b0, c0, d0), dv in deriv.comps.items():
            if i != j:
                continue
            for a, b in {(a0, b0), (b0, a0)}:
                for c, d in {(c0, d0), (d0, c0)}:
                    idx = (a, b, c, d)
                    slots = tuple(idx[p] for p in REMARK_SLOT_ORDER)
                    rv = nabla_r.get((jj,) + slots, ZERO)
                    if rv:
                        total += dv * rv
        out.append(F(2, 3) * REMARK_SIGN * total)
    return out


def jet_coordinate_derivative(k: int, mj: MetricJet,
                              normalization: str = "form"
                              ) -> CoordinateDerivative:
    """Derivative of L_k^{ij} along the g_{ab,cd} coordinates at the origin.

    L_k is a degree-k polynomial in the second derivatives, so k+1 exact
    evaluations per direction suffice.  ``normalization`` chooses between
    the delta-route tensor and the volume-form-route tensor (a global
    rational factor at fixed degree).
    """
    jet2 = mj.to_jet2()
    ratio = F(1) if normalization == "delta" else \
        form_delta_ratio(k, mj.n, mj.signature)
    ctx = OriginCurvatureContext(mj.n, jet2.g0, jet2.d1, mj.signature)

    def evaluate(j2):
        mat = lovelock_delta_at_origin(k, j2, ctx=ctx)
        return [[ratio * mat[i][j] for j in range(mj.n)] for i in range(mj.n)]

    return tensor_functional_derivative(evaluate, jet2, degree=k)
