"""Haar quadrature on O(q) and SO(q), and fiber averaging.

A :class:`FiberRule` is a finite set of orthogonal matrices with positive
weights summing to one.  Averaging against it stands in for integration over
the fiber of the orthonormal normal-frame bundle with respect to the
normalized Haar measure.

Frames act on the right: a node ``g`` sends the normal frame ``(e_1..e_q)`` to
``e'_b = sum_a e_a g_{ab}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np
from scipy.linalg import polar
from scipy.stats import special_ortho_group

from .multiindex import MultiIndex

GROUPS = ("O", "SO")
ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class FiberRule:
    """Nodes ``g_k`` (shape ``(N, q, q)``) and weights ``w_k`` summing to one."""

    group: str
    q: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    seed: int | None = None

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        if self.nodes.shape[1:] != (self.q, self.q):
            raise ValueError("node shape does not match q")
        if len(self.weights) != len(self.nodes):
            raise ValueError("one weight per node")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def exact(self) -> bool:
        return self.kind != "mc"

    def orthogonality_defect(self) -> float:
        eye = np.eye(self.q)
        return float(np.max(np.abs(np.einsum("kji,kjl->kil", self.nodes, self.nodes) - eye)))

    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.nodes)

    def to_json(self) -> dict:
        out = {"group": self.group, "q": self.q, "kind": self.kind, "n": len(self)}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def reproject(g: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (polar factor) when drift exceeds the tolerance."""
    if np.max(np.abs(g.T @ g - np.eye(len(g)))) <= ORTHO_TOL:
        return g
    u, _ = polar(g)
    return u


def haar_rule(group: str, q: int, n: int | None = None, seed: int | None = None,
              kind: str | None = None) -> FiberRule:
    """Quadrature for the normalized Haar measure on ``group(q)``.

    * ``q = 1``: the exact rules ``{+1, -1}`` (O) and ``{+1}`` (SO).
    * ``q = 2``: ``n`` equally spaced rotations, exact for trigonometric
      polynomials of degree below ``n``; O(2) adds the reflected coset.
    * ``q >= 3`` (or ``kind="mc"``): ``n`` Haar-uniform samples from a seeded
      generator.  For O(q) half the samples are reflected so both components
      carry weight one half.
    """
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    if q < 1:
        raise ValueError("q must be >= 1")
    if kind is None:
        kind = "quadrature" if q <= 2 else "mc"
    if kind == "quadrature":
        if q == 1:
            nodes = np.array([[[1.0]], [[-1.0]]]) if group == "O" else np.array([[[1.0]]])
        elif q == 2:
            n = 64 if n is None else n
            if n < 1:
                raise ValueError("n must be positive")
            rots = np.array([_rotation(2 * np.pi * k / n) for k in range(n)])
            if group == "O":
                rots = np.concatenate([rots, rots @ np.diag([1.0, -1.0])])
            nodes = rots
        else:
            raise ValueError("deterministic quadrature is available for q <= 2 only; use kind='mc'")
        weights = np.full(len(nodes), 1.0 / len(nodes))
        return FiberRule(group, q, nodes, weights, "quadrature")
    if kind != "mc":
        raise ValueError(f"unknown rule kind {kind!r}")
    if seed is None:
        raise ValueError("Monte-Carlo rules require an explicit seed")
    n = 10_000 if n is None else n
    rng = np.random.default_rng(seed)
    if q == 1:
        base = np.ones((n, 1, 1))
    else:
        base = special_ortho_group.rvs(q, size=n, random_state=rng).reshape(n, q, q)
    if group == "O":
        flip = np.eye(q)
        flip[0, 0] = -1.0
        half = (n + 1) // 2
        base = np.concatenate([base[:half], base[: n - half] @ flip])
    nodes = np.array([reproject(g) for g in base])
    return FiberRule(group, q, nodes, np.full(n, 1.0 / n), "mc", seed)


def rule_from_spec(spec: Mapping[str, Any], q: int | None = None) -> FiberRule:
    """Build a rule from ``{"group": "SO", "q": 2, "kind": "quadrature", "n": 64}``."""
    q = spec.get("q", q)
    if q is None:
        raise ValueError("fiber rule spec needs q")
    return haar_rule(spec.get("group", "SO"), int(q), spec.get("n"), spec.get("seed"), spec.get("kind"))


@dataclass(frozen=True)
class FrameAverage:
    """A fiber average together with its quadrature error estimate (0 for exact rules)."""

    value: Any
    error: float


def average_scalar(f: Callable[[np.ndarray], float], rule: FiberRule, e0: np.ndarray | None = None) -> float:
    """``sum_k w_k f(e0 g_k)``; ``e0`` defaults to the identity frame."""
    return average_with_error(f, rule, e0).value


def average_with_error(f: Callable[[np.ndarray], float], rule: FiberRule,
                       e0: np.ndarray | None = None) -> FrameAverage:
    e0 = np.eye(rule.q) if e0 is None else e0
    vals = np.array([f(e0 @ g) for g in rule.nodes], dtype=float)
    value = float(np.dot(rule.weights, vals))
    if rule.kind == "mc" and len(vals) > 1:
        err = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    else:
        err = 0.0
    return FrameAverage(value, err)


def vanishing_by_symmetry(u: MultiIndex, group: str) -> bool:
    """Whether the fiber average of ``sigma_u`` is forced to vanish.

    O(q): some entry of ``u`` is odd (flip that one normal vector).
    SO(q): some even-size set of entries has odd sum (flip those vectors).
    """
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    entries = u.entries
    if group == "O":
        return any(e % 2 for e in entries)
    for k in range(2, len(entries) + 1, 2):
        for subset in itertools.combinations(entries, k):
            if sum(subset) % 2:
                return True
    return False


def fubini_pair(values: np.ndarray, base_weights: np.ndarray, rule: FiberRule) -> tuple[float, float]:
    """Joint and iterated quadrature of ``values[base, node]``.

    Returns ``(joint, iterated)``: the first sums ``w_x w_k f`` over the
    product grid in one pass, the second integrates the fiber averages.
    """
    joint = float(np.sum(np.multiply.outer(base_weights, rule.weights) * values))
    fiber_avg = values @ rule.weights
    iterated = float(np.dot(base_weights, fiber_avg))
    return joint, iterated


def sphere_rule(q: int, n: int = 64, group: str = "O") -> tuple[np.ndarray, np.ndarray]:
    """Orbit of the first normal vector under ``group(q)``, with weights.

    This is the unit sphere of R^q except for SO(1), whose orbit is ``{+1}``.
    q=1 gives ``{+1, -1}`` (O) and q=2 gives ``n`` equally spaced angles.
    """
    if q == 1:
        if group == "SO":
            return np.array([[1.0]]), np.array([1.0])
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if q == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n, 1.0 / n)
    raise ValueError("sphere_rule is implemented for q <= 2")
