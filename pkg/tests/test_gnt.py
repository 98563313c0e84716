"""Generalized Newton transformations: recurrence, identities and the variational property."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnt_lab.gnt import (
    basis_directions,
    check_cayley_hamilton,
    check_gn1,
    check_gn2,
    check_gn3,
    check_left_right,
    check_self_adjoint,
    check_variational,
    identity_sweep,
    is_zero_matrix,
    leverrier,
    newton_family_explicit,
    newton_family_recurrence,
    sigma_gn1,
    uniqueness_witness,
)
from gnt_lab.invariants import EndoSystem, newton_polynomial
from gnt_lab.multiindex import MultiIndex, multi_indices, multi_indices_upto
from strategies import systems


@settings(max_examples=40, deadline=None)
@given(systems())
def test_identities_hold_exactly(sys_):
    fam = newton_family_recurrence(sys_, sys_.p + 1)
    for u in multi_indices_upto(sys_.q, sys_.p):
        if u.length >= 1:
            assert check_gn1(fam, u) == 0
        assert check_gn2(fam, u) == 0
        if u.length >= 2:
            assert check_gn3(fam, u) == 0
        assert is_zero_matrix(check_left_right(fam, u))


@settings(max_examples=30, deadline=None)
@given(systems())
def test_cayley_hamilton(sys_):
    for u in multi_indices(sys_.q, sys_.p) + multi_indices(sys_.q, sys_.p + 1):
        assert is_zero_matrix(check_cayley_hamilton(sys_, u))


def test_cayley_hamilton_rejects_short_u():
    sys_ = EndoSystem.from_lists([[[1, 0], [0, 2]]])
    with pytest.raises(ValueError):
        check_cayley_hamilton(sys_, MultiIndex.of(1))


@settings(max_examples=25, deadline=None)
@given(systems(max_p=3, max_q=2))
def test_explicit_formula_equals_recurrence(sys_):
    fam = newton_family_recurrence(sys_, 4)
    for u in multi_indices_upto(sys_.q, 4):
        assert is_zero_matrix(newton_family_explicit(sys_, u) - fam.T(u))


@given(systems())
def test_gn1_sigma_route_matches_determinant(sys_):
    a, b = sigma_gn1(sys_), newton_polynomial(sys_)
    assert all(a[u] == b[u] for u in multi_indices_upto(sys_.q, sys_.p))


def test_single_matrix_is_classical_newton_transformation():
    A = EndoSystem.from_lists([[[1, 2], [0, 3]]])
    fam = newton_family_recurrence(A)
    eye = A.identity()
    assert is_zero_matrix(fam[(1,)] - (eye * 4 - A[1]))
    assert is_zero_matrix(fam[(2,)])


def test_T_zero_is_identity_and_empty_sum():
    sys_ = EndoSystem.from_lists([[[1, 2], [3, 4]], [[0, 1], [1, 0]]])
    fam = newton_family_recurrence(sys_)
    assert is_zero_matrix(fam[(0, 0)] - sys_.identity())
    assert is_zero_matrix(fam.T(None))
    with pytest.raises(KeyError):
        fam[(2, 1)]


@settings(max_examples=30, deadline=None)
@given(systems(symmetric=True))
def test_symmetric_systems_give_self_adjoint_T(sys_):
    assert check_self_adjoint(newton_family_recurrence(sys_))


def test_self_adjoint_report_names_witness():
    sys_ = EndoSystem.from_lists([[[0, 1], [0, 0]]])
    report = check_self_adjoint(newton_family_recurrence(sys_))
    assert not report and report.witness == MultiIndex.of(1)


@settings(max_examples=15, deadline=None)
@given(systems(max_p=3, max_q=2), st.data())
def test_variational_property_exact(sys_, data):
    fam = newton_family_recurrence(sys_, sys_.p)
    for label, d in basis_directions(sys_.p, sys_.q):
        for u in multi_indices_upto(sys_.q, sys_.p)[1:]:
            assert check_variational(sys_, d, u, fam=fam) == 0


def test_variational_property_finite_difference(rng):
    sys_ = EndoSystem(rng.standard_normal((2, 3, 3)))
    d = EndoSystem(rng.standard_normal((2, 3, 3)))
    fam = newton_family_recurrence(sys_, 3)
    for u in multi_indices_upto(2, 3)[1:]:
        assert abs(check_variational(sys_, d, u, fam=fam)) < 1e-8


def test_uniqueness_witness_detects_tampering():
    sys_ = EndoSystem.from_lists([[[1, 2], [3, 4]], [[2, 0], [1, 1]]])
    fam = newton_family_recurrence(sys_, 2)
    good = dict(fam.table)
    for u in multi_indices_upto(2, 2)[1:]:
        assert uniqueness_witness(sys_, good, u) is None
    bad = dict(good)
    w = MultiIndex.of(1, 0)
    bad[w] = good[w] + sys_.identity() * Fraction(1, 7)
    assert uniqueness_witness(sys_, bad, MultiIndex.of(1, 1)) is not None


def test_leverrier_batched_matches_pointwise(rng):
    mats = rng.standard_normal((2, 5, 3, 3))
    sig, T = leverrier(mats, 3)
    for k in range(5):
        sys_ = EndoSystem(mats[:, k])
        fam = newton_family_recurrence(sys_, 3)
        for u in multi_indices_upto(2, 3):
            assert sig[u][k] == pytest.approx(float(fam.sigma[u]), abs=1e-10)
            np.testing.assert_allclose(T[u][k], fam.T(u), atol=1e-10)


def test_identity_sweep_rows_are_zero(rng):
    sys_ = EndoSystem.random_integer(3, 2, rng)
    for row in identity_sweep(sys_):
        assert row["lhs"] == row["rhs"], row
