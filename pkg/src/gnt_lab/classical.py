"""Classical even-order operators ``S_r``, ``T_r`` and ``T^alpha_k``.

These are the operators built from pairs ``A_a (x) A_a`` summed over the
normal index.  They exist only for even ``r``.  ``T^alpha_k`` has odd degree
``k`` and is keyed by that degree here: ``T^alpha_{r-1}`` is what appears in

    T_r = S_r 1 - sum_a T^a_{r-1} A_a,      d S_r = sum_a tr(dA_a T^a_{r-1}).

Both families are computed two ways: directly from generalized Kronecker
contractions (:func:`classical_direct`) and as binomially weighted sums of the
generalized Newton transformations (:func:`reduce_from_gnt`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .gnt import NewtonFamily, frobenius, newton_family_recurrence, trace
from .invariants import EndoSystem, delta_pairs, sigma_derivative_exact_table
from .multiindex import EnumerationCapError, MultiIndex, even_multi_indices, multinomial

#: classical_direct refuses r_max above this.
DIRECT_CAP = 6


class OddOrderError(ValueError):
    """S_r and T_r are only defined for even r."""


def _require_even(r: int) -> None:
    if r % 2:
        raise OddOrderError(f"r = {r} is odd; S_r and T_r exist for even r only")


def reduction_weight(u: MultiIndex) -> Fraction:
    """``C(r/2, u/2) / C(r, u)`` for ``u`` in 2N(q), as an exact rational."""
    r = u.length
    half = u.halve()
    return Fraction(multinomial(r // 2, half), multinomial(r, u))


@dataclass
class EvenFamily:
    source: EndoSystem
    r_max: int
    S: dict[int, Any] = field(default_factory=dict)
    Tr: dict[int, np.ndarray] = field(default_factory=dict)
    Talpha: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def S_of(self, r: int):
        _require_even(r)
        return self.S[r]

    def T_of(self, r: int) -> np.ndarray:
        _require_even(r)
        return self.Tr[r]

    def Talpha_of(self, k: int, alpha: int) -> np.ndarray:
        if k % 2 == 0:
            raise OddOrderError(f"T^alpha_k has odd degree k, got {k}")
        return self.Talpha[(k, alpha)]


def _cast(w: Fraction, exact: bool):
    return w if exact else float(w)


def reduce_from_gnt(fam: NewtonFamily, r_max: int) -> EvenFamily:
    """Weighted sums of ``sigma_u``, ``T_u`` and ``T_{a_flat u}`` over ``u in 2N(q)``, ``|u| = r``."""
    _require_even(r_max)
    if fam.max_len < min(r_max, fam.p):
        raise ValueError(f"family populated to {fam.max_len}, need {min(r_max, fam.p)}")
    sys = fam.source
    ev = EvenFamily(sys, r_max)

    def T(u):
        # T_u vanishes for |u| >= p, so a short family is enough
        if u is None or u.length > fam.max_len:
            return sys.zero_matrix()
        return fam.T(u)

    for r in range(0, r_max + 1, 2):
        s = sys.zero_matrix()[0, 0]
        t = sys.zero_matrix()
        talpha = {a: sys.zero_matrix() for a in range(1, sys.q + 1)}
        for u in even_multi_indices(sys.q, r):
            w = _cast(reduction_weight(u), sys.exact)
            s = s + w * fam.sigma[u]
            t = t + T(u) * w
            for a in range(1, sys.q + 1):
                talpha[a] = talpha[a] + T(u.try_flat(a)) * w
        ev.S[r] = s
        ev.Tr[r] = t
        if r >= 2:
            for a in range(1, sys.q + 1):
                ev.Talpha[(r - 1, a)] = talpha[a]
    return ev


def _pair_tensor(sys: EndoSystem) -> np.ndarray:
    """``K[i, j, k, l] = sum_a (A_a)_{ij} (A_a)_{kl}``."""
    return np.einsum("aij,akl->ijkl", sys.matrices, sys.matrices)


def _contract(sys: EndoSystem, K: np.ndarray, degree: int, free=None, single: int | None = None):
    """Sum of ``delta * prod`` over ``degree`` contracted slots.

    The slots are grouped in pairs fed by ``K``.  When ``single`` is given,
    the last slot is fed by ``A_single`` instead, and ``degree`` is odd.
    ``free = (i, j)`` adds the free indices with ``j`` on top and ``i`` below,
    so that the result is the ``(i, j)`` entry of the operator.
    """
    zero = sys.zero_matrix()[0, 0]
    top, bottom = ((), ()) if free is None else ((free[1],), (free[0],))
    acc = zero
    for I, J, d in delta_pairs(sys.p, degree, top, bottom):
        prod = d
        npairs = degree // 2
        for m in range(npairs):
            prod = prod * K[I[2 * m], J[2 * m], I[2 * m + 1], J[2 * m + 1]]
        if single is not None:
            prod = prod * sys[single][I[-1], J[-1]]
        acc = acc + prod
    return acc


def classical_direct(sys: EndoSystem, r_max: int, cap: int | None = DIRECT_CAP) -> EvenFamily:
    """Direct Kronecker-contraction definitions of ``S_r``, ``T_r`` and ``T^a_{r-1}``.

    ``(T_r)_{ij} = (1/r!) sum delta^{i_1..i_r j}_{j_1..j_r i} prod``, and
    ``T^a_k`` (``k`` odd) uses ``k`` contracted slots with the last fed by
    ``A_a`` and the prefactor ``1/k!``.
    """
    _require_even(r_max)
    if cap is not None and r_max > cap:
        raise EnumerationCapError(f"classical_direct with r_max={r_max} exceeds cap {cap}")
    p, q = sys.p, sys.q
    K = _pair_tensor(sys)
    ev = EvenFamily(sys, r_max)
    for r in range(0, r_max + 1, 2):
        scale = _cast(Fraction(1, math.factorial(r)), sys.exact)
        ev.S[r] = _contract(sys, K, r) * scale
        t = sys.zero_matrix()
        for i in range(p):
            for j in range(p):
                t[i, j] = _contract(sys, K, r, free=(i, j)) * scale
        ev.Tr[r] = t
        if r >= 2:
            k = r - 1
            kscale = _cast(Fraction(1, math.factorial(k)), sys.exact)
            for a in range(1, q + 1):
                ta = sys.zero_matrix()
                for i in range(p):
                    for j in range(p):
                        ta[i, j] = _contract(sys, K, k, free=(i, j), single=a) * kscale
                ev.Talpha[(k, a)] = ta
    return ev


def S_derivative_exact(sys: EndoSystem, direction: EndoSystem, r: int):
    """``d/dtau S_r(A + tau B)`` at 0, from the exact tau coefficients of sigma."""
    _require_even(r)
    deriv = sigma_derivative_exact_table(sys, direction)
    acc = Fraction(0)
    for u in even_multi_indices(sys.q, r):
        acc += reduction_weight(u) * deriv.get(u, Fraction(0))
    return acc


def check_R_identities(ev: EvenFamily, fam: NewtonFamily | None = None,
                       direction: EndoSystem | None = None) -> list[dict]:
    """Residual rows for (R1) and (R2), and (R3) when a direction is given.

    (R3) is only meaningful over rationals: it compares the exact tau
    coefficient of ``S_r(A + tau B)`` with ``sum_a tr(B_a T^a_{r-1})``.
    """
    sys = ev.source
    rows = []
    eye = sys.identity()
    for r in range(0, ev.r_max + 1, 2):
        if r == 0:
            rows.append({"check": "R1", "r": 0, "lhs": _max_abs(ev.Tr[0] - eye), "rhs": 0})
        else:
            rhs = eye * ev.S[r]
            for a in range(1, sys.q + 1):
                rhs = rhs - ev.Talpha[(r - 1, a)] @ sys[a]
            rows.append({"check": "R1", "r": r, "lhs": _max_abs(ev.Tr[r] - rhs), "rhs": 0})
        rows.append({"check": "R2", "r": r, "lhs": trace(ev.Tr[r]), "rhs": (sys.p - r) * ev.S[r]})
        if direction is not None and r >= 2 and sys.exact:
            lhs = S_derivative_exact(sys, direction, r)
            rhs3 = sum((trace(direction[a] @ ev.Talpha[(r - 1, a)]) for a in range(1, sys.q + 1)), Fraction(0))
            rows.append({"check": "R3", "r": r, "lhs": lhs, "rhs": rhs3})
    return rows


def compare_families(a: EvenFamily, b: EvenFamily) -> list[dict]:
    """Entrywise comparison rows between two even families with the same keys."""
    rows = []
    for r in sorted(a.S):
        rows.append({"check": "S", "r": r, "lhs": a.S[r], "rhs": b.S[r]})
        rows.append({"check": "T_r", "r": r, "lhs": _max_abs(a.Tr[r] - b.Tr[r]), "rhs": 0})
    for key in sorted(a.Talpha):
        rows.append({"check": "T_alpha", "r": key[0], "alpha": key[1],
                     "lhs": _max_abs(a.Talpha[key] - b.Talpha[key]), "rhs": 0})
    return rows


def _max_abs(m: np.ndarray):
    if m.size == 0:
        return 0
    return max(abs(v) for v in m.flat) if m.dtype == object else float(np.max(np.abs(m)))


def even_family(sys: EndoSystem, r_max: int) -> EvenFamily:
    """Convenience: the GNT reduction on a fresh recurrence family."""
    fam = newton_family_recurrence(sys, min(r_max, sys.p))
    return reduce_from_gnt(fam, r_max)


__all__ = [
    "DIRECT_CAP",
    "EvenFamily",
    "OddOrderError",
    "S_derivative_exact",
    "check_R_identities",
    "classical_direct",
    "compare_families",
    "even_family",
    "frobenius",
    "reduce_from_gnt",
    "reduction_weight",
]
