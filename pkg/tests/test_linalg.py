"""Exact kernels, modular ranks, serialization round-trips."""

import random
from fractions import Fraction

import pytest

from divlab.linalg import (
    BadPrimeError,
    SparseMatrix,
    SubspaceBasis,
    dense_rank_oracle,
    is_prime,
    kernel_basis,
    rank,
    rank_mod_p,
    two_prime_rank,
)

F = Fraction


def random_matrix(rng, rows, cols, density=0.4):
    m = SparseMatrix(rows, cols)
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                m.entries[(r, c)] = F(rng.randint(-5, 5), rng.randint(1, 6))
    m.entries = {k: v for k, v in m.entries.items() if v}
    return m


def test_kernel_zero_matrix():
    assert kernel_basis(SparseMatrix(3, 3)).dim == 3


def test_kernel_identity():
    eye = SparseMatrix(3, 3, [(i, i, 1) for i in range(3)])
    assert kernel_basis(eye).dim == 0


def test_kernel_vectors_annihilate():
    rng = random.Random(5)
    for _ in range(40):
        m = random_matrix(rng, rng.randint(1, 8), rng.randint(1, 8))
        basis = kernel_basis(m)
        assert basis.dim == m.cols - rank(m)
        for v in basis.vectors:
            assert not m.matvec(v)
        assert basis.verify_independent()


def test_rank_against_dense_oracle():
    rng = random.Random(17)
    for _ in range(40):
        rows, cols = rng.randint(1, 7), rng.randint(1, 7)
        m = random_matrix(rng, rows, cols)
        dense = [[m.entries.get((r, c), F(0)) for c in range(cols)]
                 for r in range(rows)]
        assert rank(m) == dense_rank_oracle(dense)


def test_rank_mod_p_identity():
    eye = SparseMatrix(4, 4, [(i, i, 1) for i in range(4)])
    assert rank_mod_p(eye, 10007) == 4


def test_rank_mod_p_outer_product():
    u = [1, 2, 3]
    v = [2, -1, 4, 5]
    m = SparseMatrix(3, 4, [(r, c, u[r] * v[c]) for r in range(3) for c in range(4)])
    assert rank_mod_p(m, 10007) == 1


def test_rank_mod_p_rejects_bad_prime():
    m = SparseMatrix(1, 1, [(0, 0, F(1, 10007))])
    with pytest.raises(BadPrimeError):
        rank_mod_p(m, 10007)
    with pytest.raises(BadPrimeError):
        rank_mod_p(m, 4)


def test_two_prime_agrees_with_exact_rank():
    rng = random.Random(23)
    m = random_matrix(rng, 60, 60, density=0.15)
    r, agreed = two_prime_rank(m.row_dicts(), m.cols, seed=1)
    assert agreed
    assert r == rank(m)


def test_modular_rank_never_exceeds_exact():
    rng = random.Random(29)
    for trial in range(25):
        m = random_matrix(rng, rng.randint(1, 10), rng.randint(1, 10))
        exact = rank(m)
        for p in (10007, 2147483647):
            assert rank_mod_p(m, p) <= exact


def test_matrix_json_roundtrip():
    rng = random.Random(31)
    m = random_matrix(rng, 5, 7)
    assert SparseMatrix.from_json(m.to_json()) == m


def test_basis_json_roundtrip():
    basis = SubspaceBasis(4, [{0: F(1), 2: F(-2, 3)}, {3: F(5)}])
    again = SubspaceBasis.from_json(basis.to_json())
    assert again.ambient_dim == 4
    assert again.vectors == basis.vectors


def test_is_prime_smoke():
    assert is_prime(2147483647)
    assert not is_prime(2147483647 * 3)
