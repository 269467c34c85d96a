"""The acceptance suite: every headline identity and dimension claim, run
at concrete sizes with exact arithmetic and no tolerances.

Each criterion is a callable raising AssertionError on failure; the runner
prints one pass/fail line per criterion.  ``cost`` is the largest ambient
dimension a criterion touches, used by the --ceiling gate of the CLI to
skip (not fail) oversized items on constrained runs.

Vanishing dimensions certified through a modular rank are exact: a mod-p
rank never exceeds the exact rank, so full column rank mod a single prime
already proves the kernel is zero.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .divspaces import DivVariant, div_space
from .graphs import (ComponentKey, HairyForestCertificate, KeyEdge,
                     classify_hairy, connected_to_cycle, graph_of_component,
                     key_edge, random_multigraph, replay_trace,
                     vanish_by_cycle, zero_functional_oracle)
from .invariants import (coords_to_tensor, invariant_div_dim,
                         invariant_subspace, matching_span_dim, ortho_data)
from .linalg import dense_rank_oracle, kernel_basis
from .normal import s3_matrix, s3_target_dim
from .tensors import Signature, SlotSpace, SparseTensor, UP, symmetrize

F = Fraction


@dataclass
class Criterion:
    ident: int
    title: str
    cost: int
    fn: object


def _c1_normal_dims() -> str:
    expected = {1: 0, 2: 1, 3: 6, 4: 20, 5: 50}
    for n in range(1, 6):
        m = s3_matrix(n)
        production = kernel_basis(m).dim
        assert production == expected[n], f"n={n}: {production}"
        dense = [[m.entries.get((r, c), F(0)) for c in range(m.cols)]
                 for r in range(m.rows)]
        oracle_rank = dense_rank_oracle(dense)
        assert m.cols - oracle_rank == expected[n], f"oracle disagrees at n={n}"
        assert oracle_rank == s3_target_dim(n), f"not surjective at n={n}"
    return "kernel ranks 0,1,6,20,50 confirmed by the dense oracle"


def _c2_vanishing() -> str:
    dims = []
    for (n, m, p) in [(2, 1, 2), (2, 2, 2), (3, 2, 2), (4, 2, 2)]:
        ds = div_space(n, p, m, with_basis=False, policy="two-prime")
        assert ds.dim == 0, f"(n={n},m={m}): dim {ds.dim}"
        dims.append(f"({n},{m})=0")
    return "divergence spaces vanish for m >= n/2: " + " ".join(dims)


def _c3_invariant_line() -> str:
    assert invariant_div_dim(2, 2, 1) == 0, "n=2 should have no line"
    out = []
    for (n, m) in [(3, 1), (4, 1), (5, 1), (5, 2)]:
        d = invariant_div_dim(n, 2, m)
        assert d == 1, f"(n={n},m={m}): invariant dim {d}"
        out.append(f"({n},{m})=1")
    return "one invariant line per degree: " + " ".join(out) + "; (2,1)=0"


def _c4_sym3_vanishing() -> str:
    count = 0
    for n in (1, 2, 3, 4):
        for p in (4, 5):
            for m in (1, 2):
                ds = div_space(n, p, m, DivVariant.sym_last3(p),
                               with_basis=False, policy="two-prime")
                assert ds.dim == 0, f"sym3 (n={n},p={p},m={m}): {ds.dim}"
                count += 1
    return f"the symmetric-triple divergence space vanished in {count} cases"


def _c5_skew() -> str:
    for n in (2, 3, 4):
        for p in (2, 4):
            if p > n:
                continue
            for m in (1, 2):
                d = invariant_div_dim(n, p, m, DivVariant.fully_skew(p))
                assert d == 0, f"skew (n={n},p={p},m={m}): {d}"
            space = SlotSpace(n, (UP,) * p, blocks=[("skew", tuple(range(p)))])
            inv = invariant_subspace(space, ortho_data(n, Signature(n, 0)))
            assert inv.dim == 0, f"(Lambda^{p}T)^O at n={n}: {inv.dim}"
    return "no invariant skew tensors, at any computed degree"


def _c6_fully_symmetric() -> str:
    details = []
    for (k, n) in [(1, 2), (1, 3), (1, 4), (2, 4), (2, 5), (3, 6)]:
        space = SlotSpace(n, (UP,) * (2 * k),
                          blocks=[("sym", tuple(range(2 * k)))])
        group = ortho_data(n, Signature(n, 0))
        inv = invariant_subspace(space, group)
        assert inv.dim == 1, f"(S^{2 * k}T)^O at n={n}: {inv.dim}"
        # the line is spanned by the symmetrized metric power
        line = coords_to_tensor(space, inv.vectors[0])
        sym_power = _sym_metric_power(n, k)
        assert _proportional(line, sym_power), \
            f"invariant line at (k={k}, n={n}) is not sym(g* x ... x g*)"
        details.append(f"S^{2 * k}@n={n}")
    for (n, p, m) in [(4, 4, 1), (4, 4, 2), (6, 6, 1)]:
        d = invariant_div_dim(n, p, m, DivVariant.fully_sym(p))
        assert d == 0, f"fullsym (n={n},p={p},m={m}): {d}"
    return "single invariant line " + ", ".join(details) + \
        "; positive degrees all vanish"


def _sym_metric_power(n: int, k: int) -> SparseTensor:
    eta = Signature(n, 0).eta()
    plain = SlotSpace(n, (UP,) * (2 * k))
    t = SparseTensor(plain)
    for letters in itertools.product(range(1, n + 1), repeat=k):
        word = tuple(x for letter in letters for x in (letter, letter))
        t.add(word, F(1))
    return symmetrize(t, blocks=[("sym", tuple(range(2 * k)))])


def _proportional(a: SparseTensor, b: SparseTensor) -> bool:
    words = set(a.components) | set(b.components)
    ratio = None
    for w in sorted(words):
        va, vb = a.get(w), b.get(w)
        if (va == 0) != (vb == 0):
            return False
        if va:
            r = va / vb
            if ratio is None:
                ratio = r
            elif r != ratio:
                return False
    return True


def _c7_odd_p() -> str:
    for n in (2, 3, 4):
        for p in (1, 3):
            for m in (1, 2):
                d = invariant_div_dim(n, p, m)
                assert d == 0, f"odd p (n={n},p={p},m={m}): {d}"
    return "odd index counts give no invariants"


def _c8_lovelock_divergence() -> str:
    from .lovelock import (curvature, divergence, einstein_contravariant,
                           lovelock_delta, lovelock_form, random_metric_jet)
    combos = [(3, 1), (4, 1), (5, 1), (5, 2)]
    checked = 0
    for (n, k) in combos:
        for sig in (Signature(n, 0), Signature(n - 1, 1)):
            for seed in range(10):
                mj = random_metric_jet(n, sig, 3, seed=seed)
                lk = lovelock_delta(k, mj)
                residual = divergence(lk, mj)
                assert residual == [F(0)] * n, \
                    f"div L_{k} != 0 at n={n} sig={sig} seed={seed}"
                if k == 1:
                    lf = lovelock_form(1, mj)
                    ein = einstein_contravariant(curvature(mj))
                    factor = F((-1) ** (sig.minus + 1)
                               * math.factorial(n - 3))
                    assert all(lf[i][j] == ein[i][j] * factor
                               for i in range(n) for j in range(n)), \
                        f"Einstein identification failed at n={n} sig={sig}"
                checked += 1
    return f"zero divergence and Einstein identification on {checked} seeded jets"


def _c9_weight() -> str:
    from .lovelock import random_metric_jet, weight_check
    n = 5
    mj = random_metric_jet(n, Signature(n, 0), 2, seed=2024)
    for k in (0, 1, 2):
        for lam in (F(2), F(3), F(1, 2)):
            report = weight_check(k, mj, lam)
            assert report["ok"], f"weight failed at k={k}, lambda={lam}"
    return "homogeneity of weight -2-2k for k in {0,1,2}, lambda in {2,3,1/2}"


def _c10_coordinate_derivative() -> str:
    from .lovelock import jet_coordinate_derivative, random_metric_jet
    combos = [(3, 1), (4, 1), (5, 1), (5, 2)]
    checked = 0
    for (n, k) in combos:
        for seed in range(5):
            mj = random_metric_jet(n, Signature(n, 0), 2, seed=seed)
            deriv = jet_coordinate_derivative(k, mj)
            assert deriv.max_cyclic_residual() == 0, \
                f"cyclic identity failed at n={n}, k={k}, seed={seed}"
            assert deriv.s3_residual() == 0, \
                f"derivative left the normal space at n={n}, k={k}"
            checked += 1
    return f"cyclic identity exact on {checked} derivative tensors"


def _c11_graphs() -> str:
    rng = random.Random("acceptance-graphs")
    edges_found = 0
    certificates = 0
    for _ in range(500):
        g = random_multigraph(rng)
        result = key_edge(g)
        if isinstance(result, KeyEdge):
            edges_found += 1
            k, l, idx = result.k, result.l, result.edge_index
            assert not g.is_simple_vertex(k) and not g.is_simple_vertex(l)
            assert {k, l} == set(g.edges[idx]) or g.edges[idx] == (k, k)
            assert connected_to_cycle(g.without_edge(idx), k)
        else:
            assert isinstance(result, HairyForestCertificate)
            certificates += 1
            for vs, deco in result.components:
                sub_edges = [i for i, e in enumerate(g.edges) if e[0] in vs]
                assert len(sub_edges) == len(vs), "hairy component with e != v"
                assert classify_hairy(g, component=(vs, set(sub_edges))) \
                    is not None
        # contrapositive: not a hairy forest => an edge was found
        hairy_forest = all(
            es and classify_hairy(g, component=(vs, es)) is not None
            for vs, es in g.components())
        if not hairy_forest:
            assert isinstance(result, KeyEdge), "contrapositive violated"

    # the worked example graph, edge for edge
    example = ComponentKey(6, (1, 2, 1), ((1, 1, 4, 3), (1, 2, 1, 2),
                                          (6, 2, 6, 1)))
    g = graph_of_component(example)
    assert sorted(g.edges) == [(1, 1), (1, 2), (1, 2), (1, 6), (2, 6), (3, 4)]
    assert vanish_by_cycle(example) is not None

    # every produced trace is confirmed by the linear-algebra oracle
    traces = 0
    for (n, m) in [(2, 1), (3, 1), (4, 1), (2, 2), (3, 2), (4, 2)]:
        ds = div_space(n, 2, m)
        keys = _keys_for(n, m, rng, exhaustive=(n ** (2 + 4 * m) <= 1000))
        for key in keys:
            trace = vanish_by_cycle(key)
            if trace is None:
                continue
            traces += 1
            assert zero_functional_oracle(key, ds), \
                f"oracle contradicts trace for {key}"
            assert replay_trace(trace, ds), f"replay failed for {key}"
    return (f"{edges_found} edges + {certificates} certificates validated; "
            f"{traces} rewrite traces oracle-confirmed")


def _keys_for(n: int, m: int, rng: random.Random, exhaustive: bool):
    if exhaustive:
        for word in itertools.product(range(1, n + 1), repeat=2):
            for qs in itertools.product(
                    itertools.product(range(1, n + 1), repeat=4), repeat=m):
                yield ComponentKey(n, word, qs)
    else:
        for _ in range(120):
            word = tuple(rng.randint(1, n) for _ in range(2))
            qs = tuple(tuple(rng.randint(1, n) for _ in range(4))
                       for _ in range(m))
            yield ComponentKey(n, word, qs)


def _c12_matchings() -> str:
    checked = 0
    for n in (1, 2, 3, 4):
        signatures = [Signature(n, 0)]
        if n >= 1:
            signatures.append(Signature(n - 1, 1))
        for sig in signatures:
            group = ortho_data(n, sig)
            for r in range(1, 7):
                space = SlotSpace(n, (UP,) * r)
                fixed = invariant_subspace(space, group).dim
                span = matching_span_dim(space, group)
                assert fixed == span, \
                    f"n={n} sig={sig} r={r}: fixed {fixed} != span {span}"
                checked += 1
    return f"matching spans equal fixed-point dimensions in {checked} cases"


CRITERIA = [
    Criterion(1, "normal-tensor dimensions n(n^2)(n^2-1)/12, dense oracle",
              225, _c1_normal_dims),
    Criterion(2, "divergence spaces vanish for m >= n/2", 3360, _c2_vanishing),
    Criterion(3, "a single invariant line per degree (2-index case)", 31875,
              _c3_invariant_line),
    Criterion(4, "symmetric-triple divergence spaces vanish", 67200,
              _c4_sym3_vanishing),
    Criterion(5, "no skew-symmetric divergence-free invariants", 1260,
              _c5_skew),
    Criterion(6, "fully symmetric tensors reduce to powers of the dual metric",
              48510, _c6_fully_symmetric),
    Criterion(7, "odd index counts vanish", 5120, _c7_odd_p),
    Criterion(8, "Lovelock tensors are divergence-free; Einstein factor",
              625, _c8_lovelock_divergence),
    Criterion(9, "weight homogeneity -2-2k", 625, _c9_weight),
    Criterion(10, "cyclic identity of the coordinate derivative", 625,
              _c10_coordinate_derivative),
    Criterion(11, "graph dichotomy, worked example, rewrite traces", 4096,
              _c11_graphs),
    Criterion(12, "matching spans equal fixed-point dimensions", 4096,
              _c12_matchings),
]


def run_suite(ceiling: int = 200000, stream=None, idents=None):
    results = []
    for crit in CRITERIA:
        if idents is not None and crit.ident not in idents:
            continue
        if crit.cost > ceiling:
            status, detail, elapsed = "SKIPPED", \
                f"cost {crit.cost} above ceiling {ceiling}", 0.0
        else:
            start = time.time()
            try:
                detail = crit.fn()
                status = "PASS"
            except AssertionError as exc:
                detail = str(exc)
                status = "FAIL"
            elapsed = time.time() - start
        results.append({"id": crit.ident, "title": crit.title,
                        "status": status, "detail": detail,
                        "seconds": round(elapsed, 2)})
        if stream is not None:
            stream.write(f"[{status:>7}] {crit.ident:>2}. {crit.title} "
                         f"({elapsed:.1f}s) — {detail}\n")
    return results
