"""Integral formulas, pointwise lemmas and refinement on torus geometries."""

import numpy as np
import pytest

from gnt_lab.fiber import haar_rule, vanishing_by_symmetry
from gnt_lab.multiindex import MultiIndex
from gnt_lab.torus.checks import (
    DIVT_SIGN,
    ROUNDOFF_FLOOR,
    IntegralCheck,
    check_div_lemma,
    check_div_T_star,
    check_main_theorem,
    check_walczak,
    codazzi_residual,
    div_T_star_recurrence,
    div_T_star_unrolled,
    extrinsic_curvature,
    fiber_average_consistency,
    lem_loc_residual,
    one_operator_reduction,
    refinement,
    stokes_residual,
)
from gnt_lab.gnt import leverrier
from gnt_lab.torus.frames import random_givens, t2_rotating, t3_two_angle
from gnt_lab.torus.geometry import build_geometry, fiber_view


def errors(measure, ms):
    return refinement(ms, measure)


def test_main_theorem_converges_on_t2():
    rule = haar_rule("O", 1)
    study = errors(lambda m: check_main_theorem(build_geometry(t2_rotating(), m), rule, MultiIndex.of(2)).residual,
                   (16, 32, 64))
    assert min(study.orders) > 1.8 or max(study.values) < ROUNDOFF_FLOOR


def test_main_theorem_on_t3_small():
    geom = build_geometry(t3_two_angle(), 32)
    res = check_main_theorem(geom, haar_rule("SO", 2, 32), MultiIndex.of(2, 0))
    assert res.relative < 1e-3
    assert set(res.terms) == {"div", "H", "cc"}


def test_divT_sign_matters():
    geom = build_geometry(random_givens(2, 1, seed=5), 32)
    g = np.eye(1)
    u = MultiIndex.of(3)
    good = check_div_T_star(geom, g, u)
    bad = check_div_T_star(geom, g, u, sign=-DIVT_SIGN)
    assert good.relative < 0.1 < bad.relative


def test_divT_unrolled_matches_recurrence(rng):
    A = rng.standard_normal((2, 4, 3, 3))
    c = rng.standard_normal((2, 2, 4, 3))
    _, T = leverrier(A, 3)
    u = MultiIndex.of(2, 1)
    rec = div_T_star_recurrence(A, c, T, u)
    np.testing.assert_allclose(rec[u], div_T_star_unrolled(A, c, T, u), atol=1e-10)


@pytest.mark.parametrize("divT", ["fd", "recurrence"])
def test_div_lemma_converges(divT):
    fr = random_givens(2, 1, seed=5)
    u = MultiIndex.of(2)
    study = errors(lambda m: check_div_lemma(build_geometry(fr, m), np.eye(1), u, divT=divT).max_residual,
                   (16, 32))
    assert study.orders[0] > 1.7


def test_fiber_average_consistency():
    geom = build_geometry(t3_two_angle(), 16)
    chk = fiber_average_consistency(geom, haar_rule("SO", 2, 8), MultiIndex.of(2, 0))
    assert chk.scale > 1e-3 and chk.relative < 1e-10


def test_stokes_is_main_defect():
    geom = build_geometry(t3_two_angle(), 16)
    rule = haar_rule("SO", 2, 16)
    u = MultiIndex.of(0, 2)
    assert stokes_residual(geom, rule, u).residual == pytest.approx(check_main_theorem(geom, rule, u).residual)


def test_walczak_pointwise_identities_and_integral():
    rep = check_walczak(build_geometry(t3_two_angle(), 32))
    assert max(rep.pointwise.values()) < 1e-10
    assert rep.integral.residual < 1e-3


def test_codazzi_sign():
    geom = build_geometry(random_givens(2, 1, seed=5), 32)
    assert codazzi_residual(geom).relative < codazzi_residual(geom, sign=1.0).relative / 5
    with pytest.raises(ValueError):
        codazzi_residual(build_geometry(t3_two_angle(), 8))


def test_lem_loc_converges():
    fr = random_givens(2, 1, seed=5)
    study = errors(lambda m: lem_loc_residual(build_geometry(fr, m)).max_residual, (16, 32))
    assert study.orders[0] > 1.7


def test_symmetry_vanishing_on_random_geometry():
    geom = build_geometry(random_givens(2, 2, seed=8), 8, smooth_tol=None)
    rule = haar_rule("SO", 2, 32)
    for u in (MultiIndex.of(1, 0), MultiIndex.of(0, 1)):
        assert vanishing_by_symmetry(u, "SO")
        assert abs(extrinsic_curvature(geom, rule, u).sigma_M) < 1e-12
    assert not vanishing_by_symmetry(MultiIndex.of(2, 0), "SO")
    assert abs(extrinsic_curvature(geom, rule, MultiIndex.of(2, 0)).sigma_M) > 1e-8


def test_one_operator_reduction_matches_group():
    geom = build_geometry(random_givens(2, 2, seed=9), 8, smooth_tol=None)
    for k in (1, 2):
        full = extrinsic_curvature(geom, haar_rule("O", 2, 32), MultiIndex.of(k, 0)).sigma_M
        assert one_operator_reduction(geom, k, 24) == pytest.approx(full, abs=1e-12)
    assert one_operator_reduction(geom, 0) == 1.0


def test_fiber_view_rotation_is_lazy_and_consistent(rng):
    geom = build_geometry(random_givens(1, 2, seed=10), 8, smooth_tol=None)
    g = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    v = fiber_view(geom, g)
    np.testing.assert_allclose(v.E, geom.E @ g)
    assert "A" not in vars(v)
    v.A
    assert "A" in vars(v)


def test_relative_residual_floor():
    assert IntegralCheck("x", None, 0.0, 1e-16, {"a": 1e-16}).relative == pytest.approx(1e-16)
    assert IntegralCheck("x", None, 1.0, 1.5, {"a": 2.0}).relative == pytest.approx(0.25)


def test_refinement_orders():
    study = refinement((8, 16, 32), lambda m: m ** -2.0)
    assert study.orders == pytest.approx([2.0, 2.0])
    assert study.rows()[0]["order"] is None
