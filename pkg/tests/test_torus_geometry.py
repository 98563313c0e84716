"""Frame fields on the flat torus and the extracted connection blocks."""

import numpy as np
import pytest

from gnt_lab.torus.frames import (
    constant_frame,
    frame_from_config,
    grid_points,
    random_givens,
    t2_rotating,
    t2_rotating_oracle,
    t3_two_angle,
)
from gnt_lab.torus.geometry import ResolutionError, build_geometry, central_diff, sample_geometry, spectral_diff


def test_frames_are_orthogonal():
    fr = random_givens(2, 2, seed=3)
    Q = fr.frame(grid_points(4, 4))
    np.testing.assert_allclose(np.swapaxes(Q, -1, -2) @ Q, np.broadcast_to(np.eye(4), Q.shape), atol=1e-13)


def test_jacobian_matches_finite_differences():
    fr = t3_two_angle()
    X = np.array([[0.1, 0.7, 0.3]])
    _, dQ = fr.frame_and_jacobian(X)
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (fr.frame(X + e) - fr.frame(X - e)) / (2 * h)
        np.testing.assert_allclose(dQ[k], fd, atol=1e-8)


def test_constant_frame_has_no_curvature():
    geom = build_geometry(constant_frame(1, 2), 4)
    assert np.max(np.abs(geom.A)) == 0 and np.max(np.abs(geom.c)) == 0


@pytest.mark.parametrize("deriv,tol", [("analytic", 1e-12), ("spectral", 1e-10), ("fd", 5e-3)])
def test_t2_shape_operator_against_closed_form(deriv, tol):
    m = 32
    geom = build_geometry(t2_rotating(0.3), m, deriv=deriv)
    x = np.arange(m) / m
    expected = t2_rotating_oracle(0.3, x)[:, None]
    np.testing.assert_allclose(geom.A[0, ..., 0, 0], np.broadcast_to(expected, (m, m)), atol=tol)


def test_fd_error_is_second_order():
    errs = []
    for m in (16, 32, 64):
        geom = build_geometry(t2_rotating(0.3), m)
        x = np.arange(m) / m
        errs.append(np.max(np.abs(geom.A[0, :, 0, 0, 0] - t2_rotating_oracle(0.3, x))))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_block_symmetries():
    geom = build_geometry(random_givens(2, 2, seed=4), 8, smooth_tol=None)
    np.testing.assert_allclose(geom.B_D, np.swapaxes(geom.B_D, -3, -2))
    np.testing.assert_allclose(geom.T_D, -np.swapaxes(geom.T_D, -3, -2))
    np.testing.assert_allclose(geom.omega_perp, -np.swapaxes(geom.omega_perp, -1, -2))
    tr = np.trace(geom.A, axis1=-2, axis2=-1)
    np.testing.assert_allclose(np.moveaxis(tr, 0, -1), geom.H_D, atol=1e-12)


def test_sample_geometry_rotates_consistently(rng):
    geom = build_geometry(random_givens(1, 2, seed=5), 8, smooth_tol=None)
    g = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    s = sample_geometry(geom, (1, 2, 3), g)
    base = sample_geometry(geom, (1, 2, 3))
    np.testing.assert_allclose(s.A, np.tensordot(g, base.A, axes=([0], [0])))
    assert sample_geometry(geom, (0, 0, 0), kappa=2.0).R[0, 0, 0, 0] == 2.0
    with pytest.raises(ValueError):
        sample_geometry(geom, (0, 0))


def test_resolution_guard():
    with pytest.raises(ResolutionError):
        build_geometry(random_givens(1, 1, seed=6, amp=1.5, kmax=3), 6)


def test_difference_operators():
    m = 32
    x = np.arange(m) / m
    f = np.sin(2 * np.pi * x)
    np.testing.assert_allclose(spectral_diff(f, 0), 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-10)
    assert np.max(np.abs(central_diff(f, 0, 1 / m) - 2 * np.pi * np.cos(2 * np.pi * x))) < 0.05


def test_frame_config_round_trip():
    fr = frame_from_config({"name": "t3_two_angle", "params": {"a": 0.2}})
    assert fr.n == 3 and fr.p == 1 and fr.params["a"] == 0.2
    custom = frame_from_config({"n": 2, "p": 1, "factors": [{"a": 0, "b": 1, "modes": [{"amp": 0.1, "k": [1, 0]}]}]})
    assert custom.q == 1
    with pytest.raises(ValueError):
        frame_from_config({"n": 2, "p": 2})
