from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from monoerasure.errors import FieldError
from monoerasure.field import (
    FieldMatrix, block_diag, hstack, identity, kronecker, matmul, rank,
    smallest_prime_at_least, solve_left, vandermonde, vecmat, vstack, zeros,
)
from oracles import rank_by_span, smallest_prime_trial, solve_by_search

SMALL_PRIMES = [2, 3, 5, 7]


def M(rows, q):
    return FieldMatrix.from_rows(rows, q)


@pytest.mark.parametrize("bound,expected", [(1, 2), (3, 3), (8, 11), (0, 2), (2, 2), (90, 97)])
def test_smallest_prime(bound, expected):
    assert smallest_prime_at_least(bound) == expected


def test_smallest_prime_matches_trial_division():
    for b in range(0, 400):
        assert smallest_prime_at_least(b) == smallest_prime_trial(b)


def test_vandermonde_values():
    assert vandermonde(3, 3, 3).tolist() == [[1, 1, 1], [0, 1, 2], [0, 1, 1]]
    assert vandermonde(2, 3, 3).tolist() == [[1, 1, 1], [0, 1, 2]]
    assert vandermonde(1, 5, 7).tolist() == [[1] * 5]


def test_vandermonde_needs_enough_points():
    with pytest.raises(FieldError):
        vandermonde(2, 4, 3)


def test_modulus_must_be_prime():
    with pytest.raises(FieldError):
        identity(2, 4)
    with pytest.raises(FieldError):
        identity(2, (1 << 61) + 1)


@pytest.mark.parametrize("q", [2, 3, 5, 7, 11])
def test_every_k_columns_of_vandermonde_are_independent(q):
    for k in range(1, q + 1):
        v = vandermonde(k, q, q)
        for cols in combinations(range(q), k):
            assert rank(v.select_columns(cols)) == k


def test_kronecker_with_identity_block_pattern():
    q = 3
    a = vandermonde(3, 3, q)
    i2 = identity(2, q)
    z = zeros(2, 2, q)
    expected = vstack([hstack([i2, i2, i2]), hstack([z, i2, i2.scale(2)]), hstack([z, i2, i2])])
    assert kronecker(a, i2) == expected


def test_kronecker_small_scalar():
    assert kronecker(M([[2]], 5), M([[1, 3]], 5)).tolist() == [[2, 1]]


def test_kronecker_field_mismatch():
    with pytest.raises(FieldError):
        kronecker(identity(2, 3), identity(2, 5))


def test_rank_examples():
    assert rank(zeros(2, 2, 3)) == 0
    assert rank(M([[1, 1, 1], [0, 1, 2]], 3)) == 2
    assert rank(zeros(3, 0, 5)) == 0


def test_solve_left_examples():
    assert solve_left(identity(2, 7), (4, 6)) == (4, 6)
    assert solve_left(M([[1, 1], [0, 1]], 7), (1, 2)) == (1, 1)
    assert solve_left(M([[1], [0]], 7), (3,)) is None


def test_solve_left_inconsistent_returns_none():
    g = M([[1, 0, 1], [0, 1, 1]], 5)
    assert solve_left(g, (1, 1, 2)) == (1, 1)
    assert solve_left(g, (1, 1, 3)) is None


def test_solve_left_dimension_mismatch():
    with pytest.raises(FieldError):
        solve_left(identity(2, 7), (1, 2, 3))


def test_large_modulus_arithmetic():
    q = (1 << 61) - 1
    g = M([[1, 1], [0, q - 1]], q)
    f = (q - 2, 12345678901234567)
    assert solve_left(g, vecmat(f, g)) == f
    assert rank(g) == 2


def test_block_diag_and_matmul():
    q = 5
    a, b = M([[1, 2]], q), M([[3], [4]], q)
    d = block_diag([a, b])
    assert d.tolist() == [[1, 2, 0], [0, 0, 3], [0, 0, 4]]
    assert matmul(identity(3, q), d) == d


@st.composite
def matrices(draw, max_rows=3, max_cols=4):
    q = draw(st.sampled_from(SMALL_PRIMES))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    rows = draw(st.lists(st.lists(st.integers(0, q - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    return M(rows, q)


@given(matrices())
def test_rank_matches_span_enumeration(m):
    assert rank(m) == rank_by_span(m.tolist(), m.q)
    assert rank(m) == rank(m.transpose())


@given(matrices(), st.integers(1, 3))
def test_rank_of_kronecker_with_identity_scales(m, s):
    assert rank(kronecker(m, identity(s, m.q))) == s * rank(m)


@given(matrices(), st.data())
def test_solve_left_round_trip(m, data):
    f = tuple(data.draw(st.lists(st.integers(0, m.q - 1), min_size=m.nrows, max_size=m.nrows)))
    target = vecmat(f, m)
    sols = solve_by_search(m.tolist(), list(target), m.q)
    got = solve_left(m, target)
    if rank(m) == m.nrows:
        assert got == f and sols == [f]
    else:
        assert got is None and len(sols) > 1


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.data())
def test_lifted_block_product_is_invertible(q, t, data):
    # (A (x) I_s) diag(R_1..R_t) with A square Vandermonde and R_a invertible.
    s = data.draw(st.integers(1, 2))
    a = vandermonde(t, t, q)
    blocks = []
    for _ in range(t):
        # Unit lower times nonsingular upper triangular is invertible.
        lower = [[1 if i == j else (data.draw(st.integers(0, q - 1)) if j < i else 0)
                  for j in range(s)] for i in range(s)]
        upper = [[data.draw(st.integers(1, q - 1)) if i == j else
                  (data.draw(st.integers(0, q - 1)) if j > i else 0)
                  for j in range(s)] for i in range(s)]
        blocks.append(matmul(M(lower, q), M(upper, q)))
    prod = matmul(kronecker(a, identity(s, q)), block_diag(blocks))
    assert rank(prod) == s * t
