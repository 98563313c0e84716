"""Multi-index combinatorics.

A :class:`MultiIndex` is an element ``u = (u_1, ..., u_q)`` of N(q).  Axes are
1-based throughout, matching the way the formulas are written: ``u.sharp(1)``
bumps the first entry.

:class:`IndexMatrix` is a ``q x s`` matrix of nonnegative integers.  The subset
I(q, s) (0/1 entries, exactly one 1 per column) indexes the non-commutative
words ``A^i`` that appear in the explicit formula for the Newton
transformation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

#: Default refusal threshold for :func:`enumerate_I` (cost is q**s).
ENUMERATION_CAP = 12


class MultiIndexError(ValueError):
    """Raised for out-of-domain multi-index operations."""


class EnumerationCapError(MultiIndexError):
    """Raised when an oracle enumeration would exceed its configured cap."""


@dataclass(frozen=True, order=False)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise MultiIndexError(f"negative entry in multi-index {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(tuple(entries))

    @classmethod
    def zero(cls, q: int) -> "MultiIndex":
        return cls((0,) * q)

    @classmethod
    def unit(cls, q: int, alpha: int) -> "MultiIndex":
        return cls.zero(q).sharp(alpha)

    @classmethod
    def from_axes(cls, q: int, axes: Sequence[int]) -> "MultiIndex":
        """``alpha_1# ... alpha_r# (0, ..., 0)``."""
        u = cls.zero(q)
        for a in axes:
            u = u.sharp(a)
        return u

    @property
    def q(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, alpha: int) -> int:
        """1-based entry access."""
        self._check_axis(alpha)
        return self.entries[alpha - 1]

    def __repr__(self) -> str:
        return f"MultiIndex{self.entries}"

    @property
    def length(self) -> int:
        return sum(self.entries)

    def _check_axis(self, alpha: int) -> None:
        if not 1 <= alpha <= self.q:
            raise MultiIndexError(f"axis {alpha} out of range 1..{self.q}")

    def sharp(self, alpha: int) -> "MultiIndex":
        self._check_axis(alpha)
        e = list(self.entries)
        e[alpha - 1] += 1
        return MultiIndex(tuple(e))

    def flat(self, alpha: int) -> "MultiIndex":
        self._check_axis(alpha)
        if self.entries[alpha - 1] == 0:
            raise MultiIndexError(f"flat({self.entries}, {alpha}): entry is already 0")
        e = list(self.entries)
        e[alpha - 1] -= 1
        return MultiIndex(tuple(e))

    def try_flat(self, alpha: int) -> "MultiIndex | None":
        """Like :meth:`flat` but returns None where the entry is 0 (empty-sum convention)."""
        if self.entries[alpha - 1] == 0:
            return None
        return self.flat(alpha)

    def try_flat_chain(self, *alphas: int) -> "MultiIndex | None":
        """Apply ``flat`` for each axis in turn, stopping with None on the first failure."""
        u: MultiIndex | None = self
        for a in alphas:
            u = u.try_flat(a)
            if u is None:
                return None
        return u

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        self._same_q(other)
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def minus(self, other: "MultiIndex") -> "MultiIndex | None":
        """Entrywise difference, or None if any entry would go negative."""
        self._same_q(other)
        diff = tuple(a - b for a, b in zip(self.entries, other.entries))
        if any(d < 0 for d in diff):
            return None
        return MultiIndex(diff)

    def _same_q(self, other: "MultiIndex") -> None:
        if other.q != self.q:
            raise MultiIndexError(f"q mismatch: {self.q} vs {other.q}")

    def factorial(self) -> int:
        return math.prod(math.factorial(e) for e in self.entries)

    def is_even(self) -> bool:
        return all(e % 2 == 0 for e in self.entries)

    def halve(self) -> "MultiIndex":
        if not self.is_even():
            raise MultiIndexError(f"{self.entries} has an odd entry")
        return MultiIndex(tuple(e // 2 for e in self.entries))

    def sort_key(self) -> tuple:
        """Graded lexicographic key: total length first, then entries."""
        return (self.length, self.entries)

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def to_json(self) -> list[int]:
        return list(self.entries)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "MultiIndex":
        return cls(tuple(data))


def multinomial(r: int, u: MultiIndex) -> int:
    """``r! / (u_1! ... u_q!)`` as an exact integer; requires ``|u| == r``."""
    if u.length != r:
        raise MultiIndexError(f"multinomial({r}, {u.entries}): |u| = {u.length} != {r}")
    return math.factorial(r) // u.factorial()


def multi_indices(q: int, length: int) -> list[MultiIndex]:
    """All u in N(q) with ``|u| == length``, in lexicographic order."""
    if q == 0:
        return [MultiIndex(())] if length == 0 else []
    out = []
    for combo in itertools.combinations(range(length + q - 1), q - 1):
        # stars and bars
        prev = -1
        parts = []
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(length + q - 2 - prev)
        out.append(MultiIndex(tuple(parts)))
    out.sort(key=lambda m: m.entries)
    return out


def multi_indices_upto(q: int, max_length: int) -> list[MultiIndex]:
    """All u in N(q) with ``|u| <= max_length`` in graded-lex order."""
    out: list[MultiIndex] = []
    for r in range(max_length + 1):
        out.extend(multi_indices(q, r))
    return out


def even_multi_indices(q: int, length: int) -> list[MultiIndex]:
    """The set 2N(q) restricted to ``|u| == length``."""
    if length % 2:
        return []
    return [MultiIndex(tuple(2 * e for e in h.entries)) for h in multi_indices(q, length // 2)]


@dataclass(frozen=True)
class IndexMatrix:
    """A q x s matrix over N, stored as q rows of length s."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if len({len(r) for r in rows}) > 1:
            raise MultiIndexError("rows of an index matrix must have a common length")
        if any(v < 0 for r in rows for v in r):
            raise MultiIndexError("index matrix entries must be nonnegative")
        object.__setattr__(self, "rows", rows)

    @property
    def q(self) -> int:
        return len(self.rows)

    @property
    def s(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def weight(self) -> MultiIndex:
        return MultiIndex(tuple(sum(r) for r in self.rows))

    @property
    def norm(self) -> int:
        """The length ``||i||``: sum of every entry."""
        return sum(sum(r) for r in self.rows)

    def column(self, l: int) -> tuple[int, ...]:
        return tuple(r[l] for r in self.rows)

    # membership predicates for I(q, s), kept separate so tests can probe each
    def entries_binary(self) -> bool:
        return all(v in (0, 1) for r in self.rows for v in r)

    def norm_equals_width(self) -> bool:
        return self.norm == self.s

    def one_per_column(self) -> bool:
        return all(sum(self.column(l)) == 1 for l in range(self.s))

    def in_I(self) -> bool:
        return self.entries_binary() and self.norm_equals_width() and self.one_per_column()

    def prepend(self, beta: int) -> "IndexMatrix":
        """``beta o i``: new first column with a single 1 in row ``beta`` (1-based)."""
        if not 1 <= beta <= self.q:
            raise MultiIndexError(f"row {beta} out of range 1..{self.q}")
        return IndexMatrix(tuple((1 if a == beta - 1 else 0,) + r for a, r in enumerate(self.rows)))

    def word(self) -> list[int]:
        """Factor sequence of ``A^i`` as 1-based axes, with repetition.

        Column by column, and within a column rows 1..q in order:
        ``A_1^{i^1_1} A_2^{i^2_1} ... A_q^{i^q_1} A_1^{i^1_2} ...``.
        """
        out = []
        for l in range(self.s):
            for a in range(self.q):
                out.extend([a + 1] * self.rows[a][l])
        return out

    @classmethod
    def from_choices(cls, q: int, choices: Sequence[int]) -> "IndexMatrix":
        """Build an element of I(q, s) from the 1-based row chosen for each column."""
        return cls(tuple(tuple(1 if c == a + 1 else 0 for c in choices) for a in range(q)))


def enumerate_I(q: int, s: int, cap: int | None = ENUMERATION_CAP) -> list[IndexMatrix]:
    """Enumerate I(q, s); there are exactly ``q**s`` elements.

    I(q, 0) is the single empty (q x 0) matrix, whose weight is the zero
    multi-index and whose word is the identity.
    """
    if q < 1 or s < 0:
        raise MultiIndexError(f"enumerate_I needs q >= 1 and s >= 0, got q={q}, s={s}")
    if cap is not None and s > cap:
        raise EnumerationCapError(f"enumerate_I(q={q}, s={s}) exceeds cap s <= {cap}")
    return [IndexMatrix.from_choices(q, c) for c in itertools.product(range(1, q + 1), repeat=s)]


def iter_index_matrices(q: int, s: int, max_entry: int = 1) -> Iterator[IndexMatrix]:
    """Brute-force every q x s matrix with entries in 0..max_entry (test oracle)."""
    for flat in itertools.product(range(max_entry + 1), repeat=q * s):
        yield IndexMatrix(tuple(tuple(flat[a * s:(a + 1) * s]) for a in range(q)))
