"""End-to-end integration: the geometric side (Lovelock tensors built from
curvature) meets the algebraic side (invariant lines in the divergence
spaces computed by pure linear algebra) on the same one-dimensional space.
"""

import itertools
from fractions import Fraction

import pytest

from divlab.divspaces import div_space, explicit_component
from divlab.lovelock import jet_coordinate_derivative, model_metric_jet
from divlab.tensors import Signature

F = Fraction


@pytest.mark.parametrize("n,seed", [(2, 5), (3, 5), (3, 8), (4, 2)])
def test_normal_tensor_is_minus_third_curvature_sum(n, seed):
    """The reduction meets the curvature module: in normal coordinates the
    second derivatives are -(1/3)(R_{ikjl} + R_{iljk}), and the curvature
    value at the origin is untouched by the reduction chart."""
    import random
    from divlab.normal import MetricJet2, normal_jet_reduction
    from divlab.lovelock import riemann_at_origin

    rng = random.Random(seed)
    eye = [[F(1) if i == j else F(0) for j in range(n)] for i in range(n)]
    d1, d2 = {}, {}
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                if rng.random() < 0.6:
                    d1[(a, b, c)] = F(rng.randint(-2, 2), rng.randint(1, 3))
                for d in range(c, n):
                    if rng.random() < 0.6:
                        d2[(a, b, c, d)] = F(rng.randint(-2, 2),
                                             rng.randint(1, 3))
    jet = MetricJet2(n, eye, d1, d2)
    reduced, normal = normal_jet_reduction(jet)
    r_orig, _ = riemann_at_origin(jet)
    r_red, _ = riemann_at_origin(reduced)
    third = F(-1, 3)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    assert r_orig[i][j][k][l] == r_red[i][j][k][l]
                    expected = third * (r_red[i][k][j][l] + r_red[i][l][j][k])
                    assert normal.get((i + 1, j + 1, k + 1, l + 1)) == expected


def lovelock_derivative_in_div_coordinates(n):
    """The derivative of L_1 at the flat point, as an ambient element of
    the degree-1 divergence space (word (i, j), one basis label)."""
    mj = model_metric_jet(n, Signature(n, 0), 2)
    deriv = jet_coordinate_derivative(1, mj)
    ds = div_space(n, 2, 1)
    problem = ds.problem
    nspace = problem.nspace
    coords = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            # collect the (abcd) part and expand over the basis by reading
            # the free words of each multidegree block
            comp_map = {}
            for (ii, jj, a, b, c, d), v in deriv.comps.items():
                if (ii + 1, jj + 1) != (i, j):
                    continue
                comp_map[(a + 1, b + 1, c + 1, d + 1)] = v
            if not comp_map:
                continue
            residual = dict(comp_map)
            for beta, vec in enumerate(nspace.vectors):
                coeff = comp_map.get(vec.free_word, F(0))
                if coeff:
                    coords[problem.coord((i, j), (beta,))] = coeff
                    for w4, bval in vec.comps.items():
                        s = residual.get(w4, F(0)) - coeff * bval
                        if s:
                            residual[w4] = s
                        else:
                            residual.pop(w4, None)
            assert not residual, "derivative did not expand over the basis"
    return ds, coords


@pytest.mark.parametrize("n", [3, 4])
def test_lovelock_derivative_spans_the_invariant_line(n):
    ds, coords = lovelock_derivative_in_div_coordinates(n)
    assert coords, "the linearized tensor vanished"

    # (1) it satisfies every defining equation (it is in the kernel)
    for block in ds.problem.blocks:
        for row in ds.problem.rows_for_block(block):
            s = sum(v * coords.get(c, F(0)) for c, v in row.items())
            assert s == 0

    # (2) the invariant line is one-dimensional, and the geometric element
    # lives on all-even blocks (reflection-fixed support)
    from divlab.invariants import invariant_div_space
    from divlab.normal import word_multidegree
    line_basis = invariant_div_space(n, 2, 1)
    assert len(line_basis) == 1
    for col in coords:
        w, ms = ds.problem.coord_pair(col)
        mdeg = list(word_multidegree(w, n))
        for beta in ms:
            for k, c in enumerate(ds.problem.nspace.vectors[beta].multidegree):
                mdeg[k] += c
        assert all(x % 2 == 0 for x in mdeg)

    # (3) proportionality against the algebraic line, via explicit components
    line = line_basis[0]
    ratio = None
    for word in itertools.product(range(1, n + 1), repeat=2):
        for q in itertools.product(range(1, n + 1), repeat=4):
            a = explicit_component(ds.problem, coords, word, (q,))
            b = explicit_component(ds.problem, line, word, (q,))
            if (a == 0) != (b == 0):
                pytest.fail(f"support mismatch at {word};{q}")
            if a:
                r = a / b
                if ratio is None:
                    ratio = r
                else:
                    assert r == ratio
    assert ratio is not None
