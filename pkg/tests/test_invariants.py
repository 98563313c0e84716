"""Newton polynomial, generalized Kronecker symbol and the sigma oracles."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnt_lab.invariants import (
    EndoSystem,
    falling_factorial,
    format_scalar,
    identity,
    kronecker_delta,
    kronecker_trace_sum,
    newton_polynomial,
    parse_scalar,
    permutation_sign,
    sigma_derivative_exact_table,
    sigma_kronecker,
)
from gnt_lab.multiindex import EnumerationCapError, MultiIndex, multi_indices_upto
from strategies import systems


def elementary(eigs, k):
    return sum(math.prod(c) for c in itertools.combinations(eigs, k))


def test_one_matrix_gives_characteristic_coefficients():
    a = EndoSystem.from_lists([[[2, 1, 0], [0, 3, 0], [0, 0, -1]]])
    table = newton_polynomial(a)
    for k in range(4):
        assert table[MultiIndex.of(k)] == elementary([2, 3, -1], k)
    assert table[MultiIndex.of(4)] == 0


@given(systems())
def test_sigma_zero_and_linear_terms(sys_):
    table = newton_polynomial(sys_)
    assert table[MultiIndex.zero(sys_.q)] == 1
    for a in range(1, sys_.q + 1):
        assert table[MultiIndex.unit(sys_.q, a)] == np.trace(sys_[a])


@settings(max_examples=30, deadline=None)
@given(systems(max_p=3))
def test_kronecker_oracle_matches_determinant(sys_):
    table = newton_polynomial(sys_)
    for u in multi_indices_upto(sys_.q, sys_.p):
        axes = [a for a in range(1, sys_.q + 1) for _ in range(u[a])]
        assert sigma_kronecker(sys_, axes) == table[u]


@given(systems(max_p=3), st.integers(-2, 2))
def test_sigma_is_homogeneous(sys_, c):
    base = newton_polynomial(sys_)
    scaled = newton_polynomial(sys_.scaled(Fraction(c)))
    for u in multi_indices_upto(sys_.q, sys_.p):
        assert scaled[u] == base[u] * Fraction(c) ** u.length


def test_sigma_invariant_under_orthogonal_conjugation(rng):
    sys_ = EndoSystem(rng.standard_normal((2, 3, 3)))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a, b = newton_polynomial(sys_), newton_polynomial(sys_.conjugated(Q))
    for u in multi_indices_upto(2, 3):
        assert a[u] == pytest.approx(b[u], abs=1e-12)


def test_float_and_exact_agree(rng):
    ints = EndoSystem.random_integer(3, 2, rng)
    exact = newton_polynomial(ints)
    approx = newton_polynomial(EndoSystem(ints.matrices.astype(float)))
    for u in multi_indices_upto(2, 3):
        assert float(exact[u]) == pytest.approx(approx[u], abs=1e-12)


def test_table_lookups_beyond_p_are_zero():
    table = newton_polynomial(EndoSystem(np.array([identity(2)] * 2)))
    assert table[(2, 1)] == 0
    assert table[None] == 0
    with pytest.raises(KeyError):
        table[(1,)]


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([1, 2, 0]) == 1


def test_kronecker_delta_values():
    assert kronecker_delta((0, 1), (0, 1)) == 1
    assert kronecker_delta((0, 1), (1, 0)) == -1
    assert kronecker_delta((0, 0), (0, 0)) == 0
    assert kronecker_delta((0, 1), (0, 2)) == 0
    with pytest.raises(ValueError):
        kronecker_delta((0,), (0, 1))


@pytest.mark.parametrize("p", range(1, 5))
def test_trace_of_kronecker_is_falling_factorial(p):
    for r in range(p + 2):
        assert kronecker_trace_sum(p, r) == falling_factorial(p, r)


def test_kronecker_cap():
    sys_ = EndoSystem(np.array([identity(8)]))
    with pytest.raises(EnumerationCapError):
        sigma_kronecker(sys_, [1] * 7)


@given(systems(max_p=3, max_q=2), systems(max_p=3, max_q=2))
def test_derivative_table_is_linear_in_direction(sys_, other):
    if other.p != sys_.p or other.q != sys_.q:
        return
    d1 = sigma_derivative_exact_table(sys_, other)
    d2 = sigma_derivative_exact_table(sys_, other.scaled(Fraction(2)))
    for u, v in d1.items():
        assert d2.get(u, 0) == 2 * v


def test_scalar_parsing():
    assert parse_scalar("3/4") == Fraction(3, 4)
    assert parse_scalar(2) == 2
    assert format_scalar(Fraction(1, 3)) == "1/3"


def test_json_round_trip(rng):
    sys_ = EndoSystem.random_integer(2, 2, rng)
    again = EndoSystem.from_json(sys_.to_json())
    assert (again.matrices == sys_.matrices).all()
    with pytest.raises(ValueError):
        EndoSystem.from_json({"p": 3, "matrices": sys_.to_json()["matrices"]})


def test_bad_shape():
    with pytest.raises(ValueError):
        EndoSystem(np.zeros((2, 2, 3)))
