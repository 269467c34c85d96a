"""Slot spaces, canonical storage, symmetrizers, contractions, gl action."""

import random
from fractions import Fraction

import pytest

from divlab.tensors import (
    DOWN,
    UP,
    InvalidPairingError,
    InvalidSymmetryError,
    Signature,
    SlotSpace,
    SparseTensor,
    contract,
    enumerate_basis,
    gl_derivation,
    symmetrize,
    tensor_product,
)

F = Fraction


def sym2_space(n, variance=DOWN):
    return SlotSpace(n, (variance, variance), blocks=[("sym", (0, 1))])


def s22_space(n, variance=DOWN):
    return SlotSpace(n, (variance,) * 4,
                     blocks=[("sym", (0, 1)), ("sym", (2, 3))])


def random_tensor(rng, space, maxentries=6):
    t = SparseTensor(space)
    words = space.basis_words()
    for _ in range(maxentries):
        w = rng.choice(words)
        t.add(w, F(rng.randint(-3, 3), rng.randint(1, 3)))
    return t


def test_enumerate_sym2():
    assert enumerate_basis(sym2_space(2)) == [(1, 1), (1, 2), (2, 2)]


def test_enumerate_skew2():
    space = SlotSpace(2, (UP, UP), blocks=[("skew", (0, 1))])
    assert enumerate_basis(space) == [(1, 2)]
    assert space.dimension == 1


def test_enumerate_s22():
    assert len(enumerate_basis(s22_space(2))) == 9


def test_s22_dimension_formula():
    for n in range(1, 6):
        assert s22_space(n).dimension == (n * (n + 1) // 2) ** 2


def test_canonical_roundtrip_readback():
    space = s22_space(3)
    t = SparseTensor(space)
    t.set((2, 1, 3, 1), F(5))
    assert t.get((1, 2, 1, 3)) == F(5)
    assert t.get((1, 2, 3, 1)) == F(5)
    assert t.get((2, 1, 1, 3)) == F(5)


def test_skew_readback_sign():
    space = SlotSpace(3, (UP, UP), blocks=[("skew", (0, 1))])
    t = SparseTensor(space)
    t.set((1, 2), F(4))
    assert t.get((2, 1)) == F(-4)
    assert t.get((1, 1)) == 0


def test_invalid_symmetry_across_variances():
    with pytest.raises(InvalidSymmetryError):
        SlotSpace(2, (UP, DOWN), blocks=[("sym", (0, 1))])


def test_symmetrize_idempotent():
    rng = random.Random(42)
    space = SlotSpace(3, (UP,) * 3)
    for _ in range(15):
        t = random_tensor(rng, space)
        once = symmetrize(t, blocks=[("sym", (0, 1, 2))])
        twice = symmetrize(once, blocks=[("sym", (0, 1, 2))])
        assert once.components == twice.components


def test_antisymmetrize_symmetric_is_zero():
    # dual metric is symmetric, so its alternation vanishes
    eta = Signature(2, 1).eta()
    space = SlotSpace(3, (UP, UP), blocks=[("sym", (0, 1))])
    g_star = SparseTensor(space)
    for i in range(1, 4):
        g_star.set((i, i), eta[i - 1])
    alt = symmetrize(g_star, blocks=[("skew", (0, 1))])
    assert alt.is_zero()


def brute_force_sym4(t, word):
    """4!-term average oracle for the full symmetrizer on 4 slots."""
    import itertools
    total = F(0)
    for perm in itertools.permutations(range(4)):
        total += t.get(tuple(word[p] for p in perm))
    return total / 24


def test_sym_of_gg_component_against_bruteforce():
    # sym(g* x g*) at n=2 on the word (1,1,2,2) for a perturbed diagonal metric
    space = s22_space(2, UP)
    g = SparseTensor(sym2_space(2, UP))
    g.set((1, 1), F(3, 2))
    g.set((2, 2), F(-2))
    g.set((1, 2), F(1, 3))
    gg = SparseTensor(space)
    for (i, j) in [(1, 1), (1, 2), (2, 2)]:
        for (k, l) in [(1, 1), (1, 2), (2, 2)]:
            gg.set((i, j, k, l), g.get((i, j)) * g.get((k, l)))
    symd = symmetrize(gg, blocks=[("sym", (0, 1, 2, 3))])
    expected = (g.get((1, 1)) * g.get((2, 2)) + 2 * g.get((1, 2)) ** 2) / 3
    assert symd.get((1, 1, 2, 2)) == expected
    assert brute_force_sym4(gg, (1, 1, 2, 2)) == expected


def test_contract_full_trace_gives_dimension():
    for n in (2, 3, 4):
        sig = Signature(n, 0)
        eta = sig.eta()
        g = [[eta[i] if i == j else F(0) for j in range(n)] for i in range(n)]
        space = SlotSpace(n, (UP, UP))
        g_star = SparseTensor(space)
        for i in range(1, n + 1):
            g_star.set((i, i), eta[i - 1])
        traced = contract(g_star, [(0, 1)], g=g)
        assert traced.get(()) == n


def test_contract_skew_pair_against_symmetric_is_zero():
    # contraction of two skew-symmetric slots with a symmetric weight dies
    n = 3
    space = SlotSpace(n, (UP, UP), blocks=[("skew", (0, 1))])
    t = SparseTensor(space)
    t.set((1, 2), F(2))
    t.set((1, 3), F(-1))
    t.set((2, 3), F(5))
    g = [[F(1) if i == j else F(0) for j in range(n)] for i in range(n)]
    traced = contract(t, [(0, 1)], g=g)
    assert traced.is_zero()


def test_contract_overlapping_pairs_rejected():
    space = SlotSpace(2, (UP, UP, UP))
    t = SparseTensor(space)
    with pytest.raises(InvalidPairingError):
        contract(t, [(0, 1), (1, 2)])


def test_gl_derivation_kills_metric_for_so_matrices():
    # A in so(p, q) acts trivially on the model metric
    sig = Signature(2, 1)
    eta = sig.eta()
    n = 3
    gspace = SlotSpace(n, (DOWN, DOWN), blocks=[("sym", (0, 1))])
    g = SparseTensor(gspace)
    for i in range(1, n + 1):
        g.set((i, i), eta[i - 1])
    for i in range(n):
        for j in range(i + 1, n):
            a = [[F(0)] * n for _ in range(n)]
            a[i][j] = eta[j]
            a[j][i] = -eta[i]
            assert gl_derivation(g, a).is_zero()


def test_gl_derivation_zero_matrix():
    space = SlotSpace(2, (UP, UP))
    t = SparseTensor(space, {(1, 2): F(3)})
    zero = [[F(0)] * 2 for _ in range(2)]
    assert gl_derivation(t, zero).is_zero()


def test_gl_derivation_leibniz_on_product():
    rng = random.Random(99)
    n = 2
    vec = SlotSpace(n, (UP,))
    for _ in range(20):
        u = random_tensor(rng, vec, 2)
        v = random_tensor(rng, vec, 2)
        a = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        uv = tensor_product(u, v)
        lhs = gl_derivation(uv, a)
        rhs = tensor_product(gl_derivation(u, a), v) + \
            tensor_product(u, gl_derivation(v, a))
        assert lhs.components == rhs.components


def test_gl_derivation_commutator_identity():
    rng = random.Random(123)
    n = 2
    space = SlotSpace(n, (UP, DOWN))
    for _ in range(15):
        t = random_tensor(rng, space)
        a = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        b = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        ab = [[sum(a[i][k] * b[k][j] for k in range(n)) -
               sum(b[i][k] * a[k][j] for k in range(n))
               for j in range(n)] for i in range(n)]
        lhs = gl_derivation(t, ab)
        rhs = gl_derivation(gl_derivation(t, b), a) - \
            gl_derivation(gl_derivation(t, a), b)
        assert lhs.components == rhs.components


def test_gl_derivation_linear_in_a():
    rng = random.Random(7)
    n = 3
    space = SlotSpace(n, (UP, UP))
    t = random_tensor(rng, space)
    a = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
    b = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
    apb = [[a[i][j] + b[i][j] for j in range(n)] for i in range(n)]
    lhs = gl_derivation(t, apb)
    rhs = gl_derivation(t, a) + gl_derivation(t, b)
    assert lhs.components == rhs.components


def test_tensor_json_has_canonical_words_only():
    space = sym2_space(2, UP)
    t = SparseTensor(space)
    t.set((2, 1), F(5))
    obj = t.to_json()
    assert obj["components"] == [[[1, 2], "5/1"]]
    assert obj["space"]["dim"] == 2


def test_contract_symmetrize_commute_on_disjoint_slots():
    rng = random.Random(55)
    n = 2
    eta = Signature(n, 0).eta()
    g = [[eta[i] if i == j else F(0) for j in range(n)] for i in range(n)]
    space = SlotSpace(n, (UP, UP, UP, UP))
    for _ in range(10):
        t = random_tensor(rng, space)
        # symmetrize slots (0,1); contract slots (2,3)
        s_then_c = contract(symmetrize(t, blocks=[("sym", (0, 1))]), [(2, 3)], g=g)
        c_then_s = symmetrize(contract(t, [(2, 3)], g=g), blocks=[("sym", (0, 1))])
        # same tensor, possibly stored on spaces with different declared symmetry
        import itertools
        for w in itertools.product(range(1, n + 1), repeat=2):
            assert s_then_c.get(w) == c_then_s.get(w)
