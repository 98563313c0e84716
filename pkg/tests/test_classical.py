"""Classical mean curvatures S_r, T_r and T^a_k against the GNT reduction."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnt_lab.classical import (
    OddOrderError,
    check_R_identities,
    classical_direct,
    compare_families,
    even_family,
    reduce_from_gnt,
    reduction_weight,
)
from gnt_lab.gnt import newton_family_recurrence
from gnt_lab.invariants import EndoSystem
from gnt_lab.multiindex import EnumerationCapError, MultiIndex, MultiIndexError, even_multi_indices, multinomial
from strategies import systems


def test_reduction_weights():
    assert reduction_weight(MultiIndex.of(2, 0)) == 1
    assert reduction_weight(MultiIndex.of(2, 2)) == Fraction(2, 6)
    with pytest.raises(MultiIndexError):
        reduction_weight(MultiIndex.of(1, 1))


@given(st.integers(1, 4), st.integers(0, 3))
def test_weighted_multinomials_sum_to_power(q, half):
    r = 2 * half
    assert sum(reduction_weight(u) * multinomial(r, u) for u in even_multi_indices(q, r)) == q ** half


@settings(max_examples=20, deadline=None)
@given(systems(max_p=3, max_q=2))
def test_direct_equals_reduction(sys_):
    direct = classical_direct(sys_, 4)
    red = even_family(sys_, 4)
    for row in compare_families(direct, red):
        assert row["lhs"] == row["rhs"], row


@settings(max_examples=20, deadline=None)
@given(systems(max_p=4, max_q=3))
def test_R1_R2_exact(sys_):
    fam = newton_family_recurrence(sys_, sys_.p)
    for row in check_R_identities(reduce_from_gnt(fam, 4)):
        assert row["lhs"] == row["rhs"], row


@settings(max_examples=10, deadline=None)
@given(systems(max_p=3, max_q=2), st.data())
def test_R3_variation(sys_, data):
    flat = data.draw(st.lists(st.integers(-2, 2), min_size=sys_.q * sys_.p ** 2,
                              max_size=sys_.q * sys_.p ** 2))
    d = EndoSystem(np.array([Fraction(v) for v in flat], dtype=object).reshape(sys_.matrices.shape))
    rows = check_R_identities(even_family(sys_, 4), direction=d)
    for row in rows:
        assert row["lhs"] == row["rhs"], row
    assert any(row["check"] == "R3" for row in rows)


def test_codimension_one_is_elementary_symmetric():
    a = EndoSystem.from_lists([[[1, 0, 0], [0, 2, 0], [0, 0, 3]]])
    ev = even_family(a, 2)
    assert ev.S_of(2) == 11
    assert ev.S_of(0) == 1


def test_odd_orders_rejected():
    sys_ = EndoSystem.from_lists([[[1, 0], [0, 1]]])
    ev = even_family(sys_, 2)
    with pytest.raises(OddOrderError):
        ev.S_of(1)
    with pytest.raises(OddOrderError):
        ev.Talpha_of(2, 1)
    with pytest.raises(OddOrderError):
        even_family(sys_, 3)
    assert ev.Talpha_of(1, 1).shape == (2, 2)


def test_direct_cap():
    sys_ = EndoSystem.from_lists([[[1]]])
    with pytest.raises(EnumerationCapError):
        classical_direct(sys_, 8)


def test_float_systems_agree(rng):
    sys_ = EndoSystem(rng.standard_normal((2, 3, 3)))
    direct = classical_direct(sys_, 4)
    red = even_family(sys_, 4)
    for row in compare_families(direct, red):
        assert abs(row["lhs"] - row["rhs"]) < 1e-10
