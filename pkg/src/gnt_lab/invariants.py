"""Generalized elementary symmetric functions of an endomorphism system.

``sigma_u`` is the coefficient of ``t^u`` in ``det(1 + t_1 A_1 + ... + t_q A_q)``.
Two routes live here:

* :func:`newton_polynomial` expands the determinant over the truncated
  polynomial ring Q[t_1..t_q] / (deg > p) by memoized cofactor expansion.
* :func:`sigma_kronecker` is the brute-force generalized-Kronecker-delta sum,
  used as an oracle.

The third route (the GN1 recurrence) lives in :mod:`gnt_lab.gnt`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .multiindex import EnumerationCapError, MultiIndex, multi_indices_upto

#: sigma_kronecker refuses r above this unless told otherwise.
KRONECKER_CAP = 6


# ---------------------------------------------------------------------------
# scalars


def parse_scalar(value: Any, exact: bool = True):
    """Parse a JSON scalar (``"a/b"`` string, int or float)."""
    if isinstance(value, str):
        q = Fraction(value.strip())
        return q if exact else float(q)
    if isinstance(value, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(value, (int, Fraction)):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        return Fraction(repr(value)) if exact else value
    raise TypeError(f"cannot parse matrix entry {value!r}")


def format_scalar(value: Any):
    """Inverse of :func:`parse_scalar` for report output."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return float(value)


def is_zero(c) -> bool:
    if isinstance(c, np.ndarray):
        return False
    return c == 0


# ---------------------------------------------------------------------------
# endomorphism systems


@dataclass(frozen=True)
class EndoSystem:
    """An ordered q-tuple of p x p matrices.

    ``matrices`` has shape ``(q, p, p)``.  Its dtype is ``object`` holding
    :class:`~fractions.Fraction` entries for exact systems, or ``float64``.
    """

    matrices: np.ndarray

    def __post_init__(self):
        m = self.matrices
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValueError(f"expected shape (q, p, p), got {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("an endomorphism system needs q >= 1")

    @classmethod
    def from_lists(cls, mats: Sequence, exact: bool = True) -> "EndoSystem":
        if exact:
            arr = np.array([[[parse_scalar(v, True) for v in row] for row in m] for m in mats], dtype=object)
        else:
            arr = np.array([[[parse_scalar(v, False) for v in row] for row in m] for m in mats], dtype=float)
        return cls(arr)

    @classmethod
    def from_json(cls, data: Mapping, exact: bool = True) -> "EndoSystem":
        sys = cls.from_lists(data["matrices"], exact=exact)
        if "p" in data and data["p"] != sys.p:
            raise ValueError(f"declared p={data['p']} but matrices are {sys.p} x {sys.p}")
        if "q" in data and data["q"] != sys.q:
            raise ValueError(f"declared q={data['q']} but {sys.q} matrices were given")
        return sys

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "matrices": [[[format_scalar(v) for v in row] for row in m] for m in self.matrices],
        }

    @classmethod
    def random_integer(cls, p: int, q: int, rng: np.random.Generator, lo: int = -3, hi: int = 3,
                       symmetric: bool = False) -> "EndoSystem":
        ints = rng.integers(lo, hi + 1, size=(q, p, p))
        if symmetric:
            ints = np.triu(ints) + np.triu(ints, 1).transpose(0, 2, 1)
        arr = np.empty((q, p, p), dtype=object)
        for idx in np.ndindex(arr.shape):
            arr[idx] = Fraction(int(ints[idx]))
        return cls(arr)

    @property
    def q(self) -> int:
        return self.matrices.shape[0]

    @property
    def p(self) -> int:
        return self.matrices.shape[1]

    @property
    def exact(self) -> bool:
        return self.matrices.dtype == object

    def __getitem__(self, alpha: int) -> np.ndarray:
        """1-based access to ``A_alpha``."""
        if not 1 <= alpha <= self.q:
            raise IndexError(f"axis {alpha} out of range 1..{self.q}")
        return self.matrices[alpha - 1]

    def identity(self) -> np.ndarray:
        return identity(self.p, exact=self.exact)

    def zero_matrix(self) -> np.ndarray:
        if self.exact:
            return np.full((self.p, self.p), Fraction(0), dtype=object)
        return np.zeros((self.p, self.p))

    def scaled(self, c) -> "EndoSystem":
        return EndoSystem(self.matrices * c)

    def conjugated(self, u: np.ndarray) -> "EndoSystem":
        """``(U A_1 U^T, ..., U A_q U^T)``."""
        return EndoSystem(np.array([u @ a @ u.T for a in self.matrices], dtype=self.matrices.dtype))

    def transposed(self) -> "EndoSystem":
        return EndoSystem(self.matrices.transpose(0, 2, 1).copy())

    def __add__(self, other: "EndoSystem") -> "EndoSystem":
        return EndoSystem(self.matrices + other.matrices)

    def concat(self, other: "EndoSystem") -> "EndoSystem":
        """The 2q-system ``(A_1..A_q, B_1..B_q)``."""
        return EndoSystem(np.concatenate([self.matrices, other.matrices], axis=0))


def identity(p: int, exact: bool = True) -> np.ndarray:
    if exact:
        out = np.full((p, p), Fraction(0), dtype=object)
        for i in range(p):
            out[i, i] = Fraction(1)
        return out
    return np.eye(p)


def word_product(sys: EndoSystem, axes: Iterable[int]) -> np.ndarray:
    """``A_{a_1} A_{a_2} ... A_{a_k}`` for 1-based axes; identity for an empty word."""
    out = sys.identity()
    for a in axes:
        out = out @ sys[a]
    return out


# ---------------------------------------------------------------------------
# truncated polynomial ring


class TruncatedPoly:
    """Polynomial in ``nvars`` commuting indeterminates, total degree <= ``max_deg``.

    Terms of higher degree are dropped as soon as they appear.  Coefficients
    may be Fractions, floats, or numpy arrays (for batched evaluation).
    """

    __slots__ = ("nvars", "max_deg", "terms")

    def __init__(self, nvars: int, max_deg: int, terms: dict | None = None):
        self.nvars = nvars
        self.max_deg = max_deg
        self.terms: dict[tuple[int, ...], Any] = terms if terms is not None else {}

    @classmethod
    def constant(cls, nvars: int, max_deg: int, c) -> "TruncatedPoly":
        return cls(nvars, max_deg, {} if is_zero(c) else {(0,) * nvars: c})

    @classmethod
    def linear(cls, nvars: int, max_deg: int, c0, coeffs: Sequence) -> "TruncatedPoly":
        """``c0 + sum_a coeffs[a] t_a``."""
        terms = {}
        if not is_zero(c0):
            terms[(0,) * nvars] = c0
        if max_deg >= 1:
            for a, c in enumerate(coeffs):
                if not is_zero(c):
                    e = [0] * nvars
                    e[a] = 1
                    terms[tuple(e)] = c
        return cls(nvars, max_deg, terms)

    def __add__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return TruncatedPoly(self.nvars, self.max_deg, out)

    def __neg__(self) -> "TruncatedPoly":
        return TruncatedPoly(self.nvars, self.max_deg, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        return self + (-other)

    def __mul__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        out: dict = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > self.max_deg:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[e] = out[e] + prod if e in out else prod
        return TruncatedPoly(self.nvars, self.max_deg, out)

    def coeff(self, exps: Sequence[int], zero=0):
        return self.terms.get(tuple(exps), zero)


def newton_poly_determinant(sys: EndoSystem, max_deg: int | None = None) -> TruncatedPoly:
    """``det(1 + t A)`` in the truncated ring, by memoized cofactor expansion.

    ``dp[mask]`` is the minor on rows ``0..|mask|-1`` and the column set
    ``mask``; it is built by Laplace expansion along its last row, so the whole
    determinant costs ``2^p * p`` (linear x polynomial) products.
    """
    p, q = sys.p, sys.q
    deg = p if max_deg is None else max_deg
    one = Fraction(1) if sys.exact else 1.0
    zero = Fraction(0) if sys.exact else 0.0
    entries = [[TruncatedPoly.linear(q, deg, one if i == j else zero,
                                     [sys.matrices[a, i, j] for a in range(q)])
                for j in range(p)] for i in range(p)]
    dp: dict[int, TruncatedPoly] = {0: TruncatedPoly.constant(q, deg, one)}
    masks_by_size: list[list[int]] = [[] for _ in range(p + 1)]
    for mask in range(1 << p):
        masks_by_size[bin(mask).count("1")].append(mask)
    for k in range(1, p + 1):
        row = k - 1
        for mask in masks_by_size[k]:
            acc = TruncatedPoly(q, deg)
            cols = [j for j in range(p) if mask >> j & 1]
            for pos, j in enumerate(cols):
                minor = dp[mask & ~(1 << j)]
                if not minor.terms or not entries[row][j].terms:
                    continue
                term = entries[row][j] * minor
                acc = acc - term if (row + pos) % 2 else acc + term
            dp[mask] = acc
        # free the previous layer
        for mask in masks_by_size[k - 1]:
            if k - 1 > 0:
                dp.pop(mask, None)
    return dp[(1 << p) - 1]


# ---------------------------------------------------------------------------
# sigma tables


@dataclass
class SigmaTable:
    """``u -> sigma_u`` for ``|u| <= p``; lookups outside that range return 0."""

    p: int
    q: int
    values: dict[MultiIndex, Any] = field(default_factory=dict)
    zero: Any = Fraction(0)

    def __getitem__(self, u) -> Any:
        if u is None:
            return self.zero
        if not isinstance(u, MultiIndex):
            u = MultiIndex(tuple(u))
        if u.q != self.q:
            raise KeyError(f"multi-index {u} has q={u.q}, table has q={self.q}")
        if u.length > self.p:
            return self.zero
        return self.values[u]

    def __iter__(self):
        return iter(sorted(self.values))

    def items(self):
        return [(u, self.values[u]) for u in sorted(self.values)]

    def to_json(self) -> list[dict]:
        return [{"u": u.to_json(), "sigma": format_scalar(v)} for u, v in self.items()]


def newton_polynomial(sys: EndoSystem) -> SigmaTable:
    """Complete table of ``sigma_u`` for ``|u| <= p`` from ``det(1 + tA)``."""
    poly = newton_poly_determinant(sys)
    zero = Fraction(0) if sys.exact else 0.0
    table = SigmaTable(sys.p, sys.q, zero=zero)
    for u in multi_indices_upto(sys.q, sys.p):
        table.values[u] = poly.coeff(u.entries, zero)
    return table


# ---------------------------------------------------------------------------
# generalized Kronecker delta


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation of ``0..k-1`` given in one-line notation."""
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def kronecker_delta(top: Sequence[int], bottom: Sequence[int]) -> int:
    """Generalized Kronecker symbol ``delta^{top}_{bottom}``.

    +1/-1 when the top indices are distinct and the bottom tuple is an
    even/odd permutation of them; 0 otherwise.
    """
    if len(top) != len(bottom):
        raise ValueError("kronecker_delta needs tuples of equal length")
    if len(set(top)) != len(top) or set(top) != set(bottom):
        return 0
    pos = {v: k for k, v in enumerate(top)}
    return permutation_sign([pos[b] for b in bottom])


def delta_pairs(p: int, r: int, free_top: Sequence[int] = (), free_bottom: Sequence[int] = ()):
    """Yield ``(I, J, delta)`` with ``delta^{I + free_top}_{J + free_bottom} != 0``.

    Indices run over ``0..p-1``.  Only the nonzero terms of the full
    ``p^{2r}`` sum are produced.
    """
    free_top = tuple(free_top)
    free_bottom = tuple(free_bottom)
    for I in itertools.permutations([i for i in range(p) if i not in free_top], r):
        pool = set(I) | set(free_top)
        if not set(free_bottom) <= pool or len(set(free_bottom)) != len(free_bottom):
            continue
        rest = sorted(pool - set(free_bottom))
        for J in itertools.permutations(rest):
            d = kronecker_delta(I + free_top, J + free_bottom)
            if d:
                yield I, J, d


def sigma_kronecker(sys: EndoSystem, axes: Sequence[int], cap: int | None = KRONECKER_CAP):
    """``sigma_u`` via ``(1/u!) sum delta^{I}_{J} (A_{a_1})_{i_1 j_1} ... (A_{a_r})_{i_r j_r}``.

    ``axes`` are 1-based and ``u = a_1# ... a_r# (0, ..., 0)``.
    """
    r = len(axes)
    zero = Fraction(0) if sys.exact else 0.0
    if r > sys.p:
        return zero
    if cap is not None and r > cap:
        raise EnumerationCapError(f"sigma_kronecker with r={r} exceeds cap {cap}")
    u = MultiIndex.from_axes(sys.q, axes)
    mats = [sys[a] for a in axes]
    total = zero
    for I, J, d in delta_pairs(sys.p, r):
        prod = Fraction(d) if sys.exact else float(d)
        for m in range(r):
            prod = prod * mats[m][I[m], J[m]]
        total = total + prod
    return total / u.factorial()


def kronecker_trace_sum(p: int, r: int) -> int:
    """``sum_{i_1..i_r} delta^{i_1..i_r}_{i_1..i_r}`` by exhaustive summation."""
    return sum(kronecker_delta(I, I) for I in itertools.product(range(p), repeat=r))


def falling_factorial(p: int, r: int) -> int:
    """``p! / (p - r)!``."""
    return math.perm(p, r)


def sigma_derivative_exact_table(sys: EndoSystem, direction: EndoSystem) -> dict[MultiIndex, Any]:
    """``u -> d/dtau sigma_u(A + tau B)|_0`` for every ``|u| <= p``.

    Expands ``det(1 + tA + sB)`` once; with ``s = tau t`` the ``tau^1 t^u``
    coefficient gathers the monomials ``t^w s_a`` with ``w + e_a = u``.
    """
    q = sys.q
    poly = newton_poly_determinant(sys.concat(direction))
    out: dict[MultiIndex, Any] = {}
    for exps, c in poly.terms.items():
        s_part = exps[q:]
        if sum(s_part) != 1:
            continue
        a = s_part.index(1)
        u = MultiIndex(exps[:q]).sharp(a + 1)
        out[u] = out[u] + c if u in out else c
    return out
