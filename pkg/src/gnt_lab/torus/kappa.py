"""Total extrinsic curvatures in constant curvature, with ``kappa`` kept formal.

For a foliation with integrable, totally geodesic normal bundle in a closed
space form of curvature ``kappa`` the total curvatures obey

    |u| sigma^M_u = kappa (p - |u| + 2) sum_a sigma^M_{a_flat^2 u},
    sigma^M_0 = vol,  sigma^M_{a_sharp 0} = 0.

Every ``sigma^M_u`` is therefore ``c_u kappa^{|u|/2} vol`` with a rational
``c_u``, and only the coefficients are stored.  The mean curvatures
``S_r = sum_u w_u sigma^M_u`` then satisfy

    S_r = kappa (p - r + 2)(q + r - 2) / ((r - 1) r) * S_{r-2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

from ..classical import OddOrderError, reduction_weight
from ..multiindex import MultiIndex, even_multi_indices, multi_indices_upto


def _binom_half(n2: int, k: int) -> Fraction:
    """``C(n2 / 2, k)`` for a nonnegative integer ``k`` (``n2`` may be odd)."""
    return Fraction(prod(Fraction(n2, 2) - j for j in range(k)), factorial(k))


def sigma_coefficients(p: int, q: int, max_len: int) -> dict[MultiIndex, Fraction]:
    """``c_u`` with ``sigma^M_u = c_u kappa^{|u|/2} vol`` from the recurrence, for ``|u| <= max_len``.

    Entries with ``|u| > p`` are what the recurrence forces; they must vanish
    for the configuration to exist (see :func:`obstruction`).
    """
    out: dict[MultiIndex, Fraction] = {}
    for u in multi_indices_upto(q, max_len):
        r = u.length
        if r == 0:
            out[u] = Fraction(1)
            continue
        if r == 1:
            out[u] = Fraction(0)
            continue
        acc = Fraction(0)
        for a in range(1, q + 1):
            w = u.try_flat_chain(a, a)
            if w is not None:
                acc += out[w]
        out[u] = Fraction(p - r + 2, r) * acc
    return out


def S_coefficient(p: int, q: int, r: int, table: dict[MultiIndex, Fraction] | None = None) -> Fraction:
    """Coefficient of ``kappa^{r/2} vol`` in ``int S_r`` via the reduction weights."""
    if r % 2:
        raise OddOrderError(f"S_r is defined for even r only, got r={r}")
    table = sigma_coefficients(p, q, r) if table is None else table
    return sum((reduction_weight(u) * table[u] for u in even_multi_indices(q, r)), Fraction(0))


def ratio_formula(p: int, q: int, r: int) -> Fraction:
    """Coefficient of ``kappa`` in ``S_r / S_{r-2}``: ``(p - r + 2)(q + r - 2) / ((r - 1) r)``."""
    return Fraction((p - r + 2) * (q + r - 2), (r - 1) * r)


def recurrence_closed_form(p: int, q: int, r: int) -> Fraction:
    """``prod_{j=1}^{r/2} (p - 2j + 2)(q + 2j - 2) / ((2j - 1) 2j)``, the unrolled ratio."""
    if r % 2:
        raise OddOrderError(f"S_r is defined for even r only, got r={r}")
    return prod((Fraction((p - 2 * j + 2) * (q + 2 * j - 2), (2 * j - 1) * 2 * j)
                 for j in range(1, r // 2 + 1)), start=Fraction(1))


def printed_closed_form(p: int, q: int, r: int) -> tuple[str, Fraction]:
    """The three-branch table as usually quoted, returned as ``(branch, coefficient)``."""
    if r % 2:
        return "r odd", Fraction(0)
    R = r // 2
    if p % 2 == 0 and q % 2 == 1:
        val = Fraction(comb(p // 2, R) * comb(q + r - 1, r)) / _binom_half(q + r - 1, R)
        return "p even, q odd", val
    if p % 2 == 0 and q % 2 == 0:
        val = Fraction(2 ** r, factorial(R)) * comb(q // 2 + R - 1, R) * comb(p // 2, R)
        return "p even, q even", val
    return "otherwise", Fraction(0)


def corrected_even_even(p: int, q: int, r: int) -> Fraction:
    """``2^r C(q/2 + r/2 - 1, r/2) C(r, r/2)^{-1} C(p/2, r/2)``, the even/even value the recurrence gives."""
    R = r // 2
    return Fraction(2 ** r * comb(q // 2 + R - 1, R) * comb(p // 2, R), comb(r, R))


def codim_one_value(p: int, r: int) -> Fraction:
    """Codimension-one value ``C(p/2, r/2)`` for ``p, r`` even and 0 otherwise."""
    if p % 2 or r % 2:
        return Fraction(0)
    return Fraction(comb(p // 2, r // 2))


def obstruction(p: int, q: int) -> dict[MultiIndex, Fraction]:
    """Nonzero coefficients the recurrence forces at lengths ``p+1`` and ``p+2``.

    Invariants of length above ``p`` vanish by definition, so a nonempty
    result means ``kappa != 0`` is impossible.  This happens exactly for odd
    ``p``: at ``|u| = p + 1`` the factor ``p - |u| + 2`` equals 1, whereas for
    even ``p`` the first even length beyond ``p`` carries the factor 0.
    """
    table = sigma_coefficients(p, q, p + 2)
    return {u: c for u, c in table.items() if u.length > p and c != 0}


@dataclass(frozen=True)
class KappaRow:
    p: int
    q: int
    r: int
    from_sigma: Fraction        # S_r from the sigma^M recurrence and the reduction weights
    unrolled: Fraction          # product of the ratios
    printed_branch: str
    printed: Fraction
    obstructed: bool

    @property
    def value(self) -> Fraction:
        """Coefficient of ``kappa^{r/2} vol`` in ``int S_r`` (0 when ``kappa`` is forced to vanish)."""
        if self.r == 0:
            return Fraction(1)
        return Fraction(0) if self.obstructed else self.from_sigma

    @property
    def printed_agrees(self) -> bool:
        return self.value == self.printed

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r, "coefficient": str(self.value),
                "from_sigma": str(self.from_sigma), "unrolled": str(self.unrolled),
                "printed_branch": self.printed_branch, "printed": str(self.printed),
                "printed_agrees": self.printed_agrees, "obstructed": self.obstructed}


def kappa_row(p: int, q: int, r: int) -> KappaRow:
    if r % 2:
        raise OddOrderError(f"S_r is defined for even r only, got r={r}")
    branch, printed = printed_closed_form(p, q, r)
    return KappaRow(p, q, r, S_coefficient(p, q, r), recurrence_closed_form(p, q, r), branch, printed,
                    bool(obstruction(p, q)))


def kappa_table(p: int, q: int, r_max: int | None = None) -> list[KappaRow]:
    """Rows for every even ``r <= r_max`` (default ``p``)."""
    r_max = p if r_max is None else r_max
    return [kappa_row(p, q, r) for r in range(0, r_max + 1, 2)]


@dataclass(frozen=True)
class RatioCheck:
    p: int
    q: int
    r: int
    ratio: Fraction | None
    expected: Fraction

    @property
    def ok(self) -> bool:
        return self.ratio == self.expected


def kappa_recurrence(p: int, q: int, r: int) -> RatioCheck:
    """Exact check of ``S_r / S_{r-2}`` against the ratio formula (coefficients of ``kappa``)."""
    if r % 2 or r < 2:
        raise OddOrderError(f"the ratio needs even r >= 2, got r={r}")
    table = sigma_coefficients(p, q, r)
    prev = S_coefficient(p, q, r - 2, table)
    cur = S_coefficient(p, q, r, table)
    ratio = None if prev == 0 else cur / prev
    return RatioCheck(p, q, r, ratio, ratio_formula(p, q, r))
