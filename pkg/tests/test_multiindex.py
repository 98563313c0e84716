"""Multi-index operators, enumeration and the index-matrix set I(q, s)."""

import math

import pytest
from hypothesis import given, strategies as st

from gnt_lab.multiindex import (
    EnumerationCapError,
    IndexMatrix,
    MultiIndex,
    MultiIndexError,
    enumerate_I,
    even_multi_indices,
    iter_index_matrices,
    multi_indices,
    multi_indices_upto,
    multinomial,
)
from strategies import multi_index


@given(multi_index(), st.data())
def test_sharp_then_flat_is_identity(u, data):
    a = data.draw(st.integers(1, u.q))
    assert u.sharp(a).flat(a) == u
    assert u.sharp(a).length == u.length + 1


@given(multi_index(), st.data())
def test_sharps_commute(u, data):
    a = data.draw(st.integers(1, u.q))
    b = data.draw(st.integers(1, u.q))
    assert u.sharp(a).sharp(b) == u.sharp(b).sharp(a)


def test_flat_of_zero_entry_raises():
    with pytest.raises(MultiIndexError):
        MultiIndex.of(0, 2).flat(1)
    assert MultiIndex.of(0, 2).try_flat(1) is None
    assert MultiIndex.of(1, 2).try_flat_chain(1, 1) is None
    assert MultiIndex.of(1, 2).try_flat_chain(2, 1) == MultiIndex.of(0, 1)


def test_axis_out_of_range_and_negative_entries():
    with pytest.raises(MultiIndexError):
        MultiIndex.of(1, 1).sharp(3)
    with pytest.raises(MultiIndexError):
        MultiIndex.of(1, -1)
    with pytest.raises(MultiIndexError):
        MultiIndex.of(1) + MultiIndex.of(1, 0)


def test_from_axes_and_unit():
    assert MultiIndex.from_axes(3, [1, 3, 1]) == MultiIndex.of(2, 0, 1)
    assert MultiIndex.unit(2, 2) == MultiIndex.of(0, 1)
    assert MultiIndex.of(3, 1)[1] == 3


@given(st.integers(1, 4), st.integers(0, 6))
def test_multi_indices_count_is_stars_and_bars(q, r):
    us = multi_indices(q, r)
    assert len(us) == math.comb(r + q - 1, q - 1)
    assert len(set(us)) == len(us)
    assert all(u.length == r and u.q == q for u in us)


def test_upto_is_graded():
    us = multi_indices_upto(2, 3)
    assert [u.length for u in us] == sorted(u.length for u in us)
    assert us[0] == MultiIndex.zero(2)
    assert us == sorted(us)


@given(st.integers(1, 4), st.integers(0, 6))
def test_multinomial_sums_to_power(q, r):
    assert sum(multinomial(r, u) for u in multi_indices(q, r)) == q ** r


def test_even_multi_indices():
    assert even_multi_indices(2, 3) == []
    assert even_multi_indices(2, 4) == [MultiIndex.of(0, 4), MultiIndex.of(2, 2), MultiIndex.of(4, 0)]
    assert MultiIndex.of(2, 4).halve() == MultiIndex.of(1, 2)
    with pytest.raises(MultiIndexError):
        MultiIndex.of(1, 2).halve()


@given(st.integers(1, 3), st.integers(0, 4))
def test_enumerate_I_has_q_to_the_s_elements(q, s):
    elems = enumerate_I(q, s)
    assert len(elems) == q ** s
    assert len(set(elems)) == len(elems)
    assert all(i.in_I() and i.norm == s for i in elems)


@given(st.integers(1, 2), st.integers(1, 3))
def test_enumerate_I_matches_brute_force_filter(q, s):
    brute = {i for i in iter_index_matrices(q, s, max_entry=1) if i.in_I()}
    assert brute == set(enumerate_I(q, s))


def test_membership_predicates_are_independent():
    two_in_column = IndexMatrix(((1, 0), (1, 0)))
    assert two_in_column.entries_binary() and two_in_column.norm_equals_width()
    assert not two_in_column.one_per_column()
    entry_two = IndexMatrix(((2, 0), (0, 0)))
    assert not entry_two.entries_binary() and entry_two.norm_equals_width()


def test_empty_matrix_and_prepend():
    (empty,) = enumerate_I(3, 0)
    assert empty.weight == MultiIndex.zero(3)
    assert empty.word() == []
    i = empty.prepend(2).prepend(1)
    assert i.in_I()
    assert i.word() == [1, 2]
    assert i.weight == MultiIndex.of(1, 1, 0)


def test_word_order_is_column_major():
    i = IndexMatrix.from_choices(2, [2, 1, 2])
    assert i.word() == [2, 1, 2]


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        enumerate_I(2, 13)
    assert len(enumerate_I(1, 13, cap=None)) == 1


def test_json_round_trip():
    u = MultiIndex.of(1, 0, 2)
    assert MultiIndex.from_json(u.to_json()) == u
