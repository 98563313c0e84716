"""Generalized Newton transformations ``T_u`` of an endomorphism system.

The production path is the recurrence

    T_0 = 1,    T_u = sigma_u 1 - sum_alpha A_alpha T_{alpha_flat(u)},

filled bottom-up in graded order.  The explicit sum over I(q, s) and the
variational characterisation are kept as independent oracles.

The kernels below operate on arrays of shape ``(q, *batch, p, p)`` so the same
code serves one exact system (object arrays of Fractions, empty batch) and
millions of float samples on a torus grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping

import numpy as np

from .invariants import EndoSystem, SigmaTable, newton_polynomial, sigma_derivative_exact_table
from .multiindex import MultiIndex, enumerate_I, multi_indices, multi_indices_upto


def trace(m: np.ndarray):
    """Trace over the last two axes (works for object arrays)."""
    return np.trace(m, axis1=-2, axis2=-1)


def frobenius(a: np.ndarray, b: np.ndarray):
    """Matrix inner product ``<<A, B>> = tr(A^T B)``."""
    return trace(np.swapaxes(a, -1, -2) @ b)


def _unit(exact: bool):
    return (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)


def _eye_like(mats: np.ndarray) -> np.ndarray:
    """Identity broadcast to the shape of one matrix slot of ``mats``."""
    p = mats.shape[-1]
    if mats.dtype == object:
        eye = np.full((p, p), Fraction(0), dtype=object)
        for i in range(p):
            eye[i, i] = Fraction(1)
    else:
        eye = np.eye(p, dtype=mats.dtype)
    return np.broadcast_to(eye, mats.shape[1:]).copy()


# ---------------------------------------------------------------------------
# families


@dataclass
class NewtonFamily:
    """``u -> T_u`` for every ``|u| <= max_len`` together with its sigma table."""

    source: EndoSystem
    sigma: SigmaTable
    table: dict[MultiIndex, np.ndarray] = field(default_factory=dict)
    max_len: int = 0

    @property
    def p(self) -> int:
        return self.source.p

    @property
    def q(self) -> int:
        return self.source.q

    def T(self, u: MultiIndex | None) -> np.ndarray:
        """``T_u``, with the empty-sum convention ``T_None = 0``."""
        if u is None:
            return self.source.zero_matrix()
        if u.length > self.max_len:
            raise KeyError(f"T_{u.entries} not populated (max_len={self.max_len})")
        return self.table[u]

    def __getitem__(self, u) -> np.ndarray:
        if u is not None and not isinstance(u, MultiIndex):
            u = MultiIndex(tuple(u))
        return self.T(u)

    def items(self):
        return [(u, self.table[u]) for u in sorted(self.table)]

    def to_json(self) -> dict:
        from .invariants import format_scalar

        return {
            "system": self.source.to_json(),
            "max_len": self.max_len,
            "sigma": self.sigma.to_json(),
            "T": [{"u": u.to_json(), "T": [[format_scalar(v) for v in row] for row in t]}
                  for u, t in self.items()],
        }


def recurrence_fill(mats: np.ndarray, sigma: Callable[[MultiIndex], Any], max_len: int,
                    right: bool = False) -> dict[MultiIndex, np.ndarray]:
    """Fill ``T_u`` for ``|u| <= max_len`` from given sigma values.

    ``right=True`` uses the right-multiplied form ``T_u = sigma_u 1 - sum T_{a_flat u} A_a``.
    """
    q = mats.shape[0]
    eye = _eye_like(mats)
    table = {MultiIndex.zero(q): eye}
    for u in multi_indices_upto(q, max_len)[1:]:
        acc = eye * sigma(u)
        for a in range(1, q + 1):
            w = u.try_flat(a)
            if w is None:
                continue
            acc = acc - (table[w] @ mats[a - 1] if right else mats[a - 1] @ table[w])
        table[u] = acc
    return table


def leverrier(mats: np.ndarray, max_len: int) -> tuple[dict[MultiIndex, Any], dict[MultiIndex, np.ndarray]]:
    """Sigma and T together from GN1 and the recurrence (no determinant).

    ``|u| sigma_u = sum_a tr(A_a T_{a_flat u})`` gives each sigma from the
    previous T level; ``sigma_u = 0`` for ``|u| > p``.
    """
    q, p = mats.shape[0], mats.shape[-1]
    exact = mats.dtype == object
    one, zero = _unit(exact)
    eye = _eye_like(mats)
    batch = mats.shape[1:-2]
    zero_b = np.full(batch, zero, dtype=object) if exact and batch else (zero if not batch else np.zeros(batch))
    u0 = MultiIndex.zero(q)
    sig: dict[MultiIndex, Any] = {u0: one if not batch else (np.full(batch, one, dtype=object) if exact else np.ones(batch))}
    table = {u0: eye}
    for u in multi_indices_upto(q, max_len)[1:]:
        prods = []
        for a in range(1, q + 1):
            w = u.try_flat(a)
            if w is not None:
                prods.append(mats[a - 1] @ table[w])
        if u.length <= p:
            s = sum((trace(m) for m in prods), start=zero_b)
            s = s / u.length
        else:
            s = zero_b
        sig[u] = s
        acc = eye * (s[..., None, None] if isinstance(s, np.ndarray) else s)
        for m in prods:
            acc = acc - m
        table[u] = acc
    return sig, table


def newton_family_recurrence(sys: EndoSystem, max_len: int | None = None,
                             sigma: SigmaTable | None = None) -> NewtonFamily:
    """Build ``T_u`` for ``|u| <= max_len`` (default p) by the recurrence.

    Sigma values come from the determinant expansion unless supplied.
    ``max_len`` may exceed ``p``; sigma is then 0 and the theorem says T is 0.
    """
    if max_len is None:
        max_len = sys.p
    if sigma is None:
        sigma = newton_polynomial(sys)
    table = recurrence_fill(sys.matrices, lambda u: sigma[u], max_len)
    return NewtonFamily(sys, sigma, table, max_len)


def sigma_gn1(sys: EndoSystem) -> SigmaTable:
    """Sigma table from the GN1 recurrence alone (third independent route)."""
    sig, _ = leverrier(sys.matrices, sys.p)
    out = SigmaTable(sys.p, sys.q, zero=_unit(sys.exact)[1])
    out.values.update(sig)
    return out


def newton_family_explicit(sys: EndoSystem, u: MultiIndex, sigma: SigmaTable | None = None,
                           cap: int | None = None) -> np.ndarray:
    """``T_u = sum_s sum_{i in I(q,s)} (-1)^{||i||} sigma_{u-|i|} A^i``."""
    from .multiindex import ENUMERATION_CAP

    if sigma is None:
        sigma = newton_polynomial(sys)
    cap = ENUMERATION_CAP if cap is None else cap
    out = sys.zero_matrix()
    for s in range(u.length + 1):
        for i in enumerate_I(sys.q, s, cap=cap):
            w = u.minus(i.weight)
            if w is None:
                continue
            c = sigma[w]
            if c == 0:
                continue
            word = sys.identity()
            for a in i.word():
                word = word @ sys[a]
            term = word * c
            out = out - term if i.norm % 2 else out + term
    return out


# ---------------------------------------------------------------------------
# identities


def check_gn1(fam: NewtonFamily, u: MultiIndex):
    """``|u| sigma_u - sum_a tr(A_a T_{a_flat u})``."""
    acc = fam.sigma[u] * u.length
    for a in range(1, fam.q + 1):
        w = u.try_flat(a)
        if w is not None:
            acc = acc - trace(fam.source[a] @ fam.T(w))
    return acc


def check_gn2(fam: NewtonFamily, u: MultiIndex):
    """``tr T_u - (p - |u|) sigma_u``."""
    return trace(fam.T(u)) - (fam.p - u.length) * fam.sigma[u]


def check_gn3(fam: NewtonFamily, u: MultiIndex):
    """``sum_{a,b} tr(A_a A_b T_{b_flat a_flat u}) + |u| sigma_u - sum_a tr(A_a) sigma_{a_flat u}``."""
    sys = fam.source
    acc = fam.sigma[u] * u.length
    for a in range(1, fam.q + 1):
        wa = u.try_flat(a)
        if wa is None:
            continue
        acc = acc - trace(sys[a]) * fam.sigma[wa]
        for b in range(1, fam.q + 1):
            wb = wa.try_flat(b)
            if wb is not None:
                acc = acc + trace(sys[a] @ sys[b] @ fam.T(wb))
    return acc


def check_left_right(fam: NewtonFamily, u: MultiIndex) -> np.ndarray:
    """Difference between the left- and right-multiplied recurrences at ``u``."""
    acc = fam.source.zero_matrix()
    for a in range(1, fam.q + 1):
        w = u.try_flat(a)
        if w is not None:
            acc = acc + fam.source[a] @ fam.T(w) - fam.T(w) @ fam.source[a]
    return acc


def check_cayley_hamilton(sys: EndoSystem, u: MultiIndex, sigma: SigmaTable | None = None) -> np.ndarray:
    """Return ``T_u`` for ``|u| >= p``; the generalized Cayley-Hamilton theorem says it is 0."""
    if u.length < sys.p:
        raise ValueError(f"Cayley-Hamilton applies to |u| >= p = {sys.p}, got |u| = {u.length}")
    fam = newton_family_recurrence(sys, u.length, sigma)
    return fam.T(u)


def is_zero_matrix(m: np.ndarray, tol: float = 0.0) -> bool:
    if m.dtype == object:
        return all(v == 0 for v in m.flat) if tol == 0 else bool(np.max(np.abs(m.astype(float))) <= tol)
    return bool(np.max(np.abs(m), initial=0.0) <= tol)


@dataclass(frozen=True)
class SelfAdjointReport:
    ok: bool
    witness: MultiIndex | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_self_adjoint(fam: NewtonFamily, tol: float = 0.0) -> SelfAdjointReport:
    """True iff every stored ``T_u`` is symmetric; otherwise report the first offender."""
    for u, t in fam.items():
        if not is_zero_matrix(t - t.T, tol):
            return SelfAdjointReport(False, u)
    return SelfAdjointReport(True)


def variation_rhs(direction: EndoSystem, T: Callable[[MultiIndex | None], np.ndarray], u: MultiIndex):
    zero = _unit(direction.exact)[1]
    acc = zero
    for a in range(1, direction.q + 1):
        w = u.try_flat(a)
        if w is not None:
            acc = acc + trace(direction[a] @ T(w))
    return acc


def sigma_derivative_exact(sys: EndoSystem, direction: EndoSystem, u: MultiIndex):
    """``d/dtau sigma_u(A + tau B)`` at 0, read off ``det(1 + tA + sB)`` exactly."""
    return sigma_derivative_exact_table(sys, direction).get(u, _unit(sys.exact)[1])


def sigma_derivative_fd(sys: EndoSystem, direction: EndoSystem, u: MultiIndex, h: float = 1e-5) -> float:
    """Central difference with one Richardson step (error O(h^4))."""
    a = sys.matrices.astype(float)
    b = direction.matrices.astype(float)

    def sig(tau: float) -> float:
        s = EndoSystem(a + tau * b)
        return float(newton_polynomial(s)[u])

    def central(step: float) -> float:
        return (sig(step) - sig(-step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def check_variational(sys: EndoSystem, direction: EndoSystem, u: MultiIndex, h: float | None = None,
                      fam: NewtonFamily | None = None, T: Callable | None = None):
    """Residual of ``d/dtau sigma_u(A + tau B) = sum_a tr(B_a T_{a_flat u})``.

    Exact systems use the symbolic tau coefficient unless ``h`` is given;
    float systems (or an explicit ``h``) use Richardson-extrapolated central
    differences.  ``T`` overrides the family lookup, which is how the
    uniqueness witness feeds in a tampered table.
    """
    if T is None:
        if fam is None:
            fam = newton_family_recurrence(sys, max(u.length - 1, 0))
        T = fam.T
    if sys.exact and h is None:
        return sigma_derivative_exact(sys, direction, u) - variation_rhs(direction, T, u)
    rhs = variation_rhs(EndoSystem(direction.matrices.astype(float)),
                         lambda w: np.asarray(T(w), dtype=float), u)
    return sigma_derivative_fd(sys, direction, u, 1e-5 if h is None else h) - rhs


def basis_directions(p: int, q: int, exact: bool = True):
    """The spanning set ``E^{(a)}_{ij}`` of End^q(V)."""
    one, zero = _unit(exact)
    for a in range(q):
        for i in range(p):
            for j in range(p):
                m = np.full((q, p, p), zero, dtype=object if exact else float)
                m[a, i, j] = one
                yield (a + 1, i, j), EndoSystem(m)


def uniqueness_witness(sys: EndoSystem, T: Mapping[MultiIndex, np.ndarray], u: MultiIndex):
    """First basis direction whose variational residual at ``u`` is nonzero, or None.

    A table that passes every direction for every ``u`` agrees with the
    recurrence table, because the residuals are the coordinates of
    ``T - S`` against a basis.
    """
    def lookup(w):
        return sys.zero_matrix() if w is None else T[w]

    for label, d in basis_directions(sys.p, sys.q, sys.exact):
        r = check_variational(sys, d, u, T=lookup)
        if r != 0:
            return label, r
    return None


def identity_sweep(sys: EndoSystem, max_len: int | None = None, explicit_max: int = 4) -> list[dict]:
    """Run every algebraic identity on one system; one dict per (check, u)."""
    p = sys.p
    sigma = newton_polynomial(sys)
    fam = newton_family_recurrence(sys, p + 1 if max_len is None else max_len, sigma)
    gn1_sig = sigma_gn1(sys)
    rows = []

    def add(check, u, lhs, rhs):
        rows.append({"check": check, "u": u, "lhs": lhs, "rhs": rhs})

    for u in multi_indices_upto(sys.q, p):
        add("sigma_gn1_vs_det", u, gn1_sig[u], sigma[u])
        if u.length >= 1:
            add("gn1", u, check_gn1(fam, u), 0)
        add("gn2", u, check_gn2(fam, u), 0)
        if u.length >= 2:
            add("gn3", u, check_gn3(fam, u), 0)
        add("left_right", u, _max_abs(check_left_right(fam, u)), 0)
        if u.length <= explicit_max:
            add("explicit_vs_recurrence", u, _max_abs(newton_family_explicit(sys, u, sigma) - fam.T(u)), 0)
    for length in (p, p + 1):
        if length > fam.max_len:
            continue
        for u in multi_indices(sys.q, length):
            add("cayley_hamilton", u, _max_abs(fam.T(u)), 0)
    return rows


def _max_abs(m: np.ndarray):
    if m.size == 0:
        return 0
    if m.dtype == object:
        return max(abs(v) for v in m.flat)
    return float(np.max(np.abs(m)))
