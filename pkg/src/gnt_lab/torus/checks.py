"""Integral formulas and pointwise identities on a sampled torus geometry.

Pointwise quantities are built from the blocks of
:class:`~gnt_lab.torus.geometry.TorusGeometry` and the batched GNT kernel.
Fiber integrals loop over the nodes of a :class:`~gnt_lab.fiber.FiberRule`,
and base integrals use the periodic trapezoidal rule.

Two derivative paths exist for anything that needs a covariant derivative
along the base:

* closed forms (the divergence lemma right-hand side, the recurrence for
  ``div T*_u``), which only involve first derivatives of the frame;
* gauge-fixed central differences: at each centre ``x`` the normal frame at
  the neighbours ``x +- h e_k`` is rotated by ``expm(-+h omega_k(x))`` so the
  section is parallel at ``x``.  This realizes horizontal derivatives on the
  frame bundle without any closed form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.linalg import expm

from ..fiber import FiberRule, sphere_rule
from ..gnt import leverrier
from ..multiindex import MultiIndex, multi_indices_upto
from .geometry import (TorusGeometry, central_diff, fiber_view, rotate_A, rotate_vec_pairs)

#: sign of the (A_b - A*_b) term in the div T* recurrence, fixed by the finite-difference path
DIVT_SIGN = 1.0

#: integrals smaller than this are treated as vanishing identically
ROUNDOFF_FLOOR = 1e-12


def matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", M, v)


def dot(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", v, w)


def star(M: np.ndarray) -> np.ndarray:
    return np.swapaxes(M, -1, -2)


def _flat2(u: MultiIndex, a: int, b: int) -> MultiIndex | None:
    """``b_flat a_flat u`` with 1-based axes, or None."""
    return u.try_flat_chain(a, b)


def _below(u: MultiIndex) -> list[MultiIndex]:
    return [v for v in multi_indices_upto(u.q, u.length) if u.minus(v) is not None]


# ---------------------------------------------------------------------------
# extrinsic curvatures


@dataclass
class ExtrinsicCurvature:
    u: MultiIndex
    sigma_hat: np.ndarray
    sigma_M: float
    error: float


def extrinsic_curvatures(geom: TorusGeometry, rule: FiberRule, us: Sequence[MultiIndex]) -> dict[MultiIndex, ExtrinsicCurvature]:
    """Fiber averages ``sigma_hat_u`` and totals ``sigma^M_u`` for every ``u`` in ``us``.

    ``error`` is the Monte-Carlo standard error of ``sigma^M_u`` (0 for
    deterministic rules).
    """
    us = list(us)
    top = max((u.length for u in us), default=0)
    acc = {u: np.zeros(geom.grid_shape) for u in us}
    per_node = {u: [] for u in us}
    for g, w in zip(rule.nodes, rule.weights):
        A = rotate_A(geom.A, g)
        sig, _ = leverrier(A, min(top, geom.p))
        for u in us:
            s = sig[u] if u.length <= geom.p else np.zeros(geom.grid_shape)
            acc[u] += w * s
            per_node[u].append(geom.integrate(s))
    out = {}
    for u in us:
        vals = np.asarray(per_node[u])
        err = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if rule.kind == "mc" and len(vals) > 1 else 0.0
        out[u] = ExtrinsicCurvature(u, acc[u], geom.integrate(acc[u]), err)
    return out


def extrinsic_curvature(geom: TorusGeometry, rule: FiberRule, u: MultiIndex) -> ExtrinsicCurvature:
    return extrinsic_curvatures(geom, rule, [u])[u]


# ---------------------------------------------------------------------------
# the section Y_u


@dataclass
class YSection:
    u: MultiIndex
    D_part: np.ndarray      # (*grid, n) ambient
    perp_part: np.ndarray   # (*grid, n) ambient

    @property
    def total(self) -> np.ndarray:
        return self.D_part + self.perp_part


def _Y_parts(F, E, A, c, u: MultiIndex, p: int):
    """Ambient ``D`` and normal components of ``Y_u`` for one normal frame."""
    q = A.shape[0]
    sig, T = leverrier(A, max(u.length - 1, 0))
    coeff = np.zeros(A.shape[1:-1])
    sperp = np.zeros(A.shape[1:-2] + (q,))
    for a in range(1, q + 1):
        wa = u.try_flat(a)
        if wa is None:
            continue
        if wa.length <= p:
            sperp[..., a - 1] = sig[wa]
        for b in range(1, q + 1):
            w = wa.try_flat(b)
            if w is not None:
                coeff = coeff + matvec(T[w], c[a - 1, b - 1])
    return matvec(F, coeff), matvec(E, sperp)


def Y_section(geom: TorusGeometry, rule: FiberRule, u: MultiIndex) -> YSection:
    """Fiber average of ``Y_u = sum T_{b_flat a_flat u} (nabla_{e_a} e_b)^T + sum sigma_{a_flat u} e_a``."""
    if u.length < 1:
        raise ValueError("Y_u needs |u| >= 1")
    Dp = np.zeros(geom.grid_shape + (geom.n,))
    Pp = np.zeros_like(Dp)
    for g, w in zip(rule.nodes, rule.weights):
        v = fiber_view(geom, g)
        d, pp = _Y_parts(geom.F, v.E, v.A, v.c, u, geom.p)
        Dp += w * d
        Pp += w * pp
    return YSection(u, Dp, Pp)


def divergence(geom: TorusGeometry, Y: np.ndarray) -> np.ndarray:
    """Central-difference divergence of an ambient vector field."""
    return sum(central_diff(Y[..., k], k, geom.h) for k in range(geom.n))


# ---------------------------------------------------------------------------
# div T*


def div_T_star_recurrence(A: np.ndarray, c: np.ndarray, T: dict, u: MultiIndex,
                          sign: float = DIVT_SIGN) -> dict[MultiIndex, np.ndarray]:
    """``div T*_v`` for every ``v <= u`` with zero curvature.

    ``div T*_v = -sum_a A*_a div T*_{a_flat v} + sign * sum_{a,b} (A_b - A*_b) T_{a_flat v} c_{ba}``
    with ``div T*_0 = 0``.  The gauge-fixed finite differences converge to
    ``sign = +1``; ``sign = -1`` leaves an O(1) defect whenever some ``A_b``
    is not self-adjoint.
    """
    q = A.shape[0]
    shape = A.shape[1:-1]
    As = star(A)
    X = A - As
    out: dict[MultiIndex, np.ndarray] = {}
    for v in _below(u):
        acc = np.zeros(shape)
        for a in range(1, q + 1):
            w = v.try_flat(a)
            if w is None:
                continue
            acc = acc - matvec(As[a - 1], out[w])
            for b in range(1, q + 1):
                acc = acc + sign * matvec(X[b - 1], matvec(T[w], c[b - 1, a - 1]))
        out[v] = acc
    return out


def div_T_star_unrolled(A: np.ndarray, c: np.ndarray, T: dict, u: MultiIndex,
                        sign: float = DIVT_SIGN) -> np.ndarray:
    """Closed expansion of the recurrence as a sum over flat chains ``a_1, ..., a_s``."""
    q = A.shape[0]
    As = star(A)
    X = A - As
    total = np.zeros(A.shape[1:-1])

    def walk(v: MultiIndex, prefix: list[int], s: int):
        nonlocal total
        for a in range(1, q + 1):
            w = v.try_flat(a)
            if w is None:
                continue
            vec = sum(matvec(X[b - 1], matvec(T[w], c[b - 1, a - 1])) for b in range(1, q + 1))
            for a_prev in reversed(prefix):
                vec = matvec(As[a_prev - 1], vec)
            total = total + sign * (-1) ** (s - 1) * vec
            walk(w, prefix + [a], s + 1)

    walk(u, [], 1)
    return total


# ---------------------------------------------------------------------------
# integrand of the main formula


@dataclass
class TheoremTerms:
    lhs: np.ndarray       # |u| sigma_u
    div: np.ndarray       # sum g(div T*_w, c_ab)
    H: np.ndarray         # -sum g(H_perp, T_w c_ab)
    cc: np.ndarray        # sum g(c_ag, T_w c_gb)
    curv: np.ndarray      # sum tr(R_ab T_w)

    @property
    def rhs(self) -> np.ndarray:
        return self.div + self.H + self.cc + self.curv


def theorem_terms(A: np.ndarray, c: np.ndarray, H_perp: np.ndarray, u: MultiIndex, p: int,
                  divT: dict | None = None, R: np.ndarray | None = None,
                  sign: float = DIVT_SIGN, kernel: tuple[dict, dict] | None = None) -> TheoremTerms:
    """Pointwise integrand pieces for one normal frame.

    ``divT`` defaults to the recurrence; ``R`` (shape ``(q, q, ..., p, p)``)
    adds the curvature trace and is zero on the flat torus.  ``kernel`` is a
    precomputed ``leverrier(A, L)`` with ``L >= |u|``.
    """
    q = A.shape[0]
    shape = A.shape[1:-2]
    sig, T = kernel if kernel is not None else leverrier(A, u.length)
    if divT is None:
        divT = div_T_star_recurrence(A, c, T, u, sign)
    t_div = np.zeros(shape)
    t_H = np.zeros(shape)
    t_cc = np.zeros(shape)
    t_R = np.zeros(shape)
    for a in range(1, q + 1):
        for b in range(1, q + 1):
            w = _flat2(u, a, b)
            if w is None:
                continue
            Tw = T[w]
            cab = c[a - 1, b - 1]
            t_div = t_div + dot(divT[w], cab)
            t_H = t_H - dot(H_perp, matvec(Tw, cab))
            for g in range(q):
                t_cc = t_cc + dot(c[a - 1, g], matvec(Tw, c[g, b - 1]))
            if R is not None:
                t_R = t_R + np.trace(R[a - 1, b - 1] @ Tw, axis1=-2, axis2=-1)
    lhs = u.length * (sig[u] if u.length <= p else np.zeros(shape))
    return TheoremTerms(lhs, t_div, t_H, t_cc, t_R)


@dataclass
class IntegralCheck:
    """Two-sided integral identity with its scale-aware relative residual."""

    name: str
    u: MultiIndex | None
    lhs: float
    rhs: float
    terms: dict[str, float]
    error: float = 0.0

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def scale(self) -> float:
        return max(abs(self.lhs), sum(abs(v) for v in self.terms.values()))

    @property
    def relative(self) -> float:
        """Residual over scale; below the roundoff floor both sides vanish and the residual is returned."""
        s = self.scale
        return self.residual / s if s > ROUNDOFF_FLOOR else self.residual


def check_main_theorems(geom: TorusGeometry, rule: FiberRule, us: Sequence[MultiIndex],
                        sign: float = DIVT_SIGN) -> dict[MultiIndex, IntegralCheck]:
    """``|u| sigma^M_u`` against the integral of the bracketed terms (flat, so no curvature term).

    One pass over the fiber nodes serves every ``u``.  The relative residual
    divides by ``max(|lhs|, sum |integral of each term|)``, because for
    ``|u| > p`` the left side vanishes identically.
    """
    us = list(us)
    if any(u.length < 1 for u in us):
        raise ValueError("the integral formula needs |u| >= 1")
    top = max(u.length for u in us)
    sums = {u: {"lhs": 0.0, "div": 0.0, "H": 0.0, "cc": 0.0} for u in us}
    for g, w in zip(rule.nodes, rule.weights):
        v = fiber_view(geom, g)
        kernel = leverrier(v.A, top)
        for u in us:
            t = theorem_terms(v.A, v.c, v.H_perp, u, geom.p, sign=sign, kernel=kernel)
            acc = sums[u]
            acc["lhs"] += w * geom.integrate(t.lhs)
            acc["div"] += w * geom.integrate(t.div)
            acc["H"] += w * geom.integrate(t.H)
            acc["cc"] += w * geom.integrate(t.cc)
    out = {}
    for u in us:
        terms = {k: sums[u][k] for k in ("div", "H", "cc")}
        out[u] = IntegralCheck("main", u, sums[u]["lhs"], sum(terms.values()), terms)
    return out


def check_main_theorem(geom: TorusGeometry, rule: FiberRule, u: MultiIndex,
                       sign: float = DIVT_SIGN) -> IntegralCheck:
    return check_main_theorems(geom, rule, [u], sign)[u]


# ---------------------------------------------------------------------------
# gauge-fixed finite differences


def _gauge(geom: TorusGeometry, k: int, side: int, g: np.ndarray) -> np.ndarray:
    """Per-point normal rotation making the section parallel at each centre along axis k."""
    R = expm(-side * geom.h * geom.omega_perp[k])
    return R @ g


def _shift(F: np.ndarray, k: int, side: int, lead: int) -> np.ndarray:
    """Values at ``x + side * h e_k`` for a field whose grid axes start at ``lead``."""
    return np.roll(F, -side, axis=lead + k)


@dataclass
class FDDivergences:
    div_Y: np.ndarray                      # div_E Y_u at (x, e g)
    div_T: dict[MultiIndex, np.ndarray]    # f-components of div T*_w for |w| = |u| - 2


def fd_divergences(geom: TorusGeometry, g: np.ndarray, u: MultiIndex) -> FDDivergences:
    """``div_E Y_u`` and ``div T*_w`` at the frame ``e g`` by gauge-fixed central differences."""
    g = np.asarray(g, float)
    q, p = geom.q, geom.p
    ws = sorted({w for a in range(1, q + 1) for b in range(1, q + 1)
                 if (w := _flat2(u, a, b)) is not None})
    divY = np.zeros(geom.grid_shape)
    dS = {w: np.zeros(geom.grid_shape + (geom.n,)) for w in ws}
    P = geom.F @ star(geom.F)
    for k in range(geom.n):
        for side in (1, -1):
            G = _gauge(geom, k, side, g)
            A = rotate_A(_shift(geom.A, k, side, 1), G)
            c = rotate_vec_pairs(_shift(geom.c, k, side, 2), G)
            F = _shift(geom.F, k, side, 0)
            E = _shift(geom.E, k, side, 0) @ G
            d, pp = _Y_parts(F, E, A, c, u, p)
            divY += side * (d + pp)[..., k] / (2 * geom.h)
            if ws:
                _, T = leverrier(A, max(w.length for w in ws))
                for w in ws:
                    S = F @ star(T[w]) @ star(F)
                    dS[w] += side * matvec(S, P[..., :, k]) / (2 * geom.h)
    divT = {w: matvec(star(geom.F), dS[w]) for w in ws}
    return FDDivergences(divY, divT)


@dataclass
class PointwiseCheck:
    name: str
    u: MultiIndex | None
    max_residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.max_residual / self.scale if self.scale > 0 else self.max_residual


def check_div_lemma(geom: TorusGeometry, g: np.ndarray, u: MultiIndex, divT: str = "fd",
                    sign: float = DIVT_SIGN) -> PointwiseCheck:
    """Pointwise ``div_E Y_u`` (gauge-fixed FD) against the lemma's closed form.

    ``divT="fd"`` feeds the closed form with the finite-difference ``div T*``,
    ``divT="recurrence"`` with the algebraic recurrence.
    """
    if u.length < 1:
        raise ValueError("the divergence lemma needs |u| >= 1")
    fd = fd_divergences(geom, g, u)
    v = fiber_view(geom, g)
    dT = fd.div_T if divT == "fd" else None
    t = theorem_terms(v.A, v.c, v.H_perp, u, geom.p, divT=dT, sign=sign)
    closed = -t.lhs + t.rhs
    res = fd.div_Y - closed
    # scale by the individual terms: both sides vanish identically when |u| > p
    scale = max(float(np.max(np.abs(x))) for x in (fd.div_Y, t.lhs, t.div, t.H, t.cc))
    return PointwiseCheck(f"div_lemma[{divT}]", u, float(np.max(np.abs(res))), scale)


def check_div_T_star(geom: TorusGeometry, g: np.ndarray, u: MultiIndex, sign: float = DIVT_SIGN) -> PointwiseCheck:
    """Finite-difference ``div T*_w`` against the recurrence, for every ``w = b_flat a_flat u``."""
    fd = fd_divergences(geom, g, u)
    v = fiber_view(geom, g)
    _, T = leverrier(v.A, u.length)
    rec = div_T_star_recurrence(v.A, v.c, T, u, sign)
    worst, scale = 0.0, 0.0
    for w, val in fd.div_T.items():
        worst = max(worst, float(np.max(np.abs(val - rec[w]))))
        scale = max(scale, float(np.max(np.abs(val))))
    return PointwiseCheck("div_T_star", u, worst, scale)


def fiber_average_consistency(geom: TorusGeometry, rule: FiberRule, u: MultiIndex) -> PointwiseCheck:
    """Fiber average of the gauge-fixed ``div_E Y_u`` against the FD divergence of ``Y_hat_u``."""
    avg = np.zeros(geom.grid_shape)
    for g, w in zip(rule.nodes, rule.weights):
        avg += w * fd_divergences(geom, g, u).div_Y
    direct = divergence(geom, Y_section(geom, rule, u).total)
    return PointwiseCheck("fiber_average", u, float(np.max(np.abs(avg - direct))),
                          float(np.max(np.abs(direct))))


def stokes_residual(geom: TorusGeometry, rule: FiberRule, u: MultiIndex) -> IntegralCheck:
    """Integral over M of the fiber-averaged closed-form ``div_E Y_u`` (zero on a closed manifold).

    A discrete central divergence of ``Y_hat_u`` telescopes to exactly zero on
    the periodic grid, so the measurable Stokes defect is the integral of the
    closed-form divergence; it is reported together with its two halves.
    """
    mt = check_main_theorem(geom, rule, u)
    return IntegralCheck("stokes", u, 0.0, mt.rhs - mt.lhs, {"lhs": mt.lhs, **mt.terms})


# ---------------------------------------------------------------------------
# Walczak


@dataclass
class WalczakReport:
    integral: IntegralCheck
    pointwise: dict[str, float]


def walczak_fields(geom: TorusGeometry) -> dict[str, np.ndarray]:
    H_D2 = np.sum(geom.H_D ** 2, axis=-1)
    H_P2 = np.sum(geom.H_perp ** 2, axis=-1)
    B_D2 = np.sum(geom.B_D ** 2, axis=(-3, -2, -1))
    T_D2 = np.sum(geom.T_D ** 2, axis=(-3, -2, -1))
    B_P2 = np.sum(geom.B_perp ** 2, axis=(0, 1, -1))
    T_P2 = np.sum(geom.T_perp ** 2, axis=(0, 1, -1))
    return {"H_D": H_D2, "H_perp": H_P2, "B_D": B_D2, "B_perp": B_P2, "T_D": T_D2, "T_perp": T_P2}


def check_walczak(geom: TorusGeometry) -> WalczakReport:
    """Walczak's integral identity (mixed curvature 0) and its three pointwise ingredients."""
    f = walczak_fields(geom)
    signs = {"H_D": -1, "H_perp": -1, "B_D": 1, "B_perp": 1, "T_D": -1, "T_perp": -1}
    terms = {k: signs[k] * geom.integrate(v) for k, v in f.items()}
    integral = IntegralCheck("walczak", None, 0.0, sum(terms.values()), terms)
    A = geom.A
    q = geom.q
    trA = np.trace(A, axis1=-2, axis2=-1)
    id1 = np.sum(trA ** 2, axis=0) - f["H_D"]
    id2 = np.sum(np.trace(A @ A, axis1=-2, axis2=-1), axis=0) - (f["B_D"] - f["T_D"])
    cc = sum(dot(geom.c[a, b], geom.c[b, a]) for a in range(q) for b in range(q))
    id3 = cc - (f["B_perp"] - f["T_perp"])
    point = {"trace_squares": float(np.max(np.abs(id1))),
             "trace_of_squares": float(np.max(np.abs(id2))),
             "normal_pairing": float(np.max(np.abs(id3)))}
    return WalczakReport(integral, point)


# ---------------------------------------------------------------------------
# Codazzi and the adapted-frame lemma


def codazzi_residual(geom: TorusGeometry, sign: float = -1.0) -> PointwiseCheck:
    """``(nabla_X A_N) Y - (nabla_Y A_N) X - sign * (nabla_{[X,Y]^perp} N)^T`` on D, flat case.

    Needs codimension one, where ``N = e_1`` is automatically normal-parallel.
    ``sign = -1`` is the value obtained by antisymmetrizing the second
    derivative of ``N``; ``sign = +1`` reproduces the printed form.
    """
    if geom.q != 1:
        raise ValueError("codazzi_residual needs codimension one (normal-parallel unit normal)")
    F = geom.F
    Ahat = F @ geom.A[0] @ star(F)
    lhs = None
    for k in range(geom.n):
        dA = central_diff(Ahat, k, geom.h)
        # (d_{f_i} Ahat) f_j with i, j in D
        term = np.einsum("...i,...ab,...bj->...ija", F[..., k, :], dA, F)
        lhs = term if lhs is None else lhs + term
    lhs = lhs - np.swapaxes(lhs, -3, -2)
    lhs = np.einsum("...ka,...ijk->...ija", F, lhs)
    rhs = sign * 2.0 * geom.T_D[..., 0][..., None] * geom.c[0, 0][..., None, None, :]
    res = lhs - rhs
    return PointwiseCheck(f"codazzi[{sign:+.0f}]", None, float(np.max(np.abs(res))), float(np.max(np.abs(lhs))))


def lem_loc_residual(geom: TorusGeometry, g: np.ndarray | None = None) -> PointwiseCheck:
    """Second-order identity for ``e_a((A_b)_{ij})`` in an adapted gauge, flat case.

    At every centre the normal and tangential frames at the neighbours are
    rotated so that ``nabla^perp e`` and ``nabla^T f`` vanish at the centre.
    Components use ``(A)_{ij} = -g(nabla_{f_i} e, f_j)``, the transpose of the
    column-vector matrices stored in the geometry.
    """
    q, p = geom.q, geom.p
    g = np.eye(q) if g is None else np.asarray(g, float)
    dAt = []
    dC = []
    for k in range(geom.n):
        vals = {}
        for side in (1, -1):
            Rn = expm(-side * geom.h * geom.omega_perp[k]) @ g
            Rd = expm(-side * geom.h * geom.omega_D[k])
            A = rotate_A(_shift(geom.A, k, side, 1), Rn)
            A = star(Rd) @ A @ Rd
            c = rotate_vec_pairs(_shift(geom.c, k, side, 2), Rn)
            C = np.einsum("...ni,ab...i->ab...n", _shift(geom.F, k, side, 0), c)
            vals[side] = (star(A), C)
        dAt.append((vals[1][0] - vals[-1][0]) / (2 * geom.h))
        dC.append((vals[1][1] - vals[-1][1]) / (2 * geom.h))
    v = fiber_view(geom, g)
    At = star(v.A)
    F = geom.F
    lhs = sum(np.einsum("...a,b...ij->ab...ij", v.E[..., k, :], dAt[k]) for k in range(geom.n))
    # derivative of the ambient c_ab along f_i, paired with f_j
    dCf = sum(np.einsum("...i,ab...n->ab...in", F[..., k, :], dC[k]) for k in range(geom.n))
    term_c = np.einsum("ab...in,...nj->ab...ij", dCf, F)
    prod = np.einsum("a...ik,b...kj->ab...ij", At, At)
    quad = np.einsum("ag...i,gb...j->ab...ij", v.c, v.c)
    rhs = prod - term_c + quad
    res = lhs - rhs
    return PointwiseCheck("lem_loc", None, float(np.max(np.abs(res))), float(np.max(np.abs(lhs))))


# ---------------------------------------------------------------------------
# one shape operator


def one_operator_reduction(geom: TorusGeometry, k: int, n_sphere: int = 64, group: str = "O") -> float:
    """``sigma^M_{(k,0,...,0)}`` as a base integral of the sphere average of ``sigma_k(A_N)``.

    ``A_N = sum_a N_a A_a`` for unit ``N`` in D-perp; only the first normal
    vector of a frame enters ``sigma_{(k,0,...,0)}``, so the group integral
    collapses onto the orbit of ``e_1``.
    """
    if k == 0:
        return 1.0
    Ns, ws = sphere_rule(geom.q, n_sphere, group)
    total = 0.0
    for N, w in zip(Ns, ws):
        AN = np.tensordot(N, geom.A, axes=([0], [0]))[None]
        sig, _ = leverrier(AN, min(k, geom.p))
        if k <= geom.p:
            total += w * geom.integrate(sig[MultiIndex.of(k)])
    return total


# ---------------------------------------------------------------------------
# refinement


@dataclass
class RefinementStudy:
    ms: list[int]
    values: list[float]

    @property
    def orders(self) -> list[float]:
        out = []
        for (m1, v1), (m2, v2) in zip(zip(self.ms, self.values), zip(self.ms[1:], self.values[1:])):
            if v1 == 0 or v2 == 0:
                out.append(float("inf"))
            else:
                out.append(float(np.log(v1 / v2) / np.log(m2 / m1)))
        return out

    def rows(self) -> list[dict[str, Any]]:
        orders = [None] + self.orders
        return [{"m": m, "value": v, "order": o} for m, v, o in zip(self.ms, self.values, orders)]


def refinement(ms: Sequence[int], measure: Callable[[int], float]) -> RefinementStudy:
    return RefinementStudy(list(ms), [float(measure(m)) for m in ms])
