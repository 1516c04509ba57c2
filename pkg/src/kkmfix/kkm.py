"""Finite checks of KKM coverings and of the intersection property.

The convex hull of the anchors is replaced by its barycentric grid of
resolution m: all points sum_i (k_i / m) x_i with nonnegative integers k_i
summing to m. Each face of the hull is checked on the grid points it carries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import SizeError
from .operators import ResidualOperator
from .space import Element, Space

MAX_ANCHOR_INDEX = 8

Member = Callable[[int, np.ndarray, float], bool]
Defect = Callable[[int, np.ndarray], float]


@dataclass
class SetValuedMap:
    """Closed sets G(x_i) attached to anchors x_0..x_n of R^d.

    ``member(i, z, tol)`` tests z in G(x_i) with slack ``tol``; ``distance(i, z)``,
    when given, is a membership defect that is <= 0 exactly on G(x_i).
    """

    anchors: np.ndarray
    member: Member
    distance: Optional[Defect] = None

    def __post_init__(self):
        self.anchors = np.atleast_2d(np.array(self.anchors, dtype=float))
        if self.anchors.shape[0] < 2:
            raise ValueError("need at least two anchors")

    @property
    def n(self) -> int:
        return self.anchors.shape[0] - 1

    def defect(self, i: int, z: np.ndarray, tol: float) -> float:
        if self.distance is not None:
            return max(0.0, float(self.distance(i, z)))
        return 0.0 if self.member(i, z, tol) else math.inf


@dataclass
class Witness:
    point: np.ndarray
    weights: np.ndarray
    max_defect: float
    found: bool


@dataclass
class KKMReport:
    violations: list[tuple[tuple[int, ...], np.ndarray]]
    faces_checked: int
    points_checked: int
    intersection_witness: Optional[Witness] = None
    covering_ok: bool = field(init=False)

    def __post_init__(self):
        self.covering_ok = not self.violations


def compositions(m: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``m`` (lexicographic, descending first entry)."""
    if parts == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in compositions(m - first, parts - 1):
            yield (first,) + rest


def barycentric_grid(m: int, parts: int) -> np.ndarray:
    """Weight vectors k / m of the resolution-m grid; C(m + parts - 1, parts - 1) rows."""
    return np.array(list(compositions(m, parts)), dtype=float) / m


def _check_size(kmap: SetValuedMap, m: int) -> None:
    if kmap.n > MAX_ANCHOR_INDEX:
        raise SizeError(f"at most {MAX_ANCHOR_INDEX + 1} anchors are supported, got {kmap.n + 1}")
    if m < 1:
        raise ValueError("grid resolution m must be >= 1")


def check_kkm_covering(
    kmap: SetValuedMap, m: int, tol: float = 1e-9, find_witness: bool = True
) -> KKMReport:
    """Check that every face conv{x_i : i in S} lies in the union of G(x_i), i in S.

    Violations are ordered by face (subset size, then lexicographic indices)
    and, within a face, by grid order.
    """
    _check_size(kmap, m)
    A = kmap.anchors
    violations = []
    faces = points = 0
    for size in range(1, kmap.n + 2):
        weights = barycentric_grid(m, size)
        for S in itertools.combinations(range(kmap.n + 1), size):
            faces += 1
            Z = weights @ A[list(S)]
            for z in Z:
                points += 1
                if not any(kmap.member(i, z, tol) for i in S):
                    violations.append((S, z))
    witness = find_intersection(kmap, m, tol) if find_witness else None
    return KKMReport(violations, faces, points, witness)


def find_intersection(kmap: SetValuedMap, m: int, tol: float = 1e-9) -> Witness:
    """Grid point of the hull minimizing the largest membership defect.

    Ties keep the first point in grid order. ``found`` is set when the best
    defect is at most ``tol``.
    """
    _check_size(kmap, m)
    W = barycentric_grid(m, kmap.n + 1)
    Z = W @ kmap.anchors
    best_idx, best = 0, math.inf
    for idx, z in enumerate(Z):
        worst = 0.0
        for i in range(kmap.n + 1):
            worst = max(worst, kmap.defect(i, z, tol))
            if worst >= best:
                break
        if worst < best:
            best_idx, best = idx, worst
            if best == 0.0:
                break
    return Witness(Z[best_idx], W[best_idx], best, best <= tol)


def build_p_mapping(L: ResidualOperator, anchors: Sequence[Element], tol: float = 0.0) -> SetValuedMap:
    """The sets P(y_i) = {z : <L(z), z - y_i> <= 0} attached to ``anchors``.

    ``tol`` is slack added to every membership test on top of the per-call one.
    """
    space: Space = anchors[0].space
    A = np.array([a.coords for a in anchors])

    def pairing(i, z):
        ze = Element(z, space)
        return space.inner_coords(L(ze).coords, z - A[i])

    def member(i, z, t):
        return pairing(i, z) <= tol + t

    return SetValuedMap(A, member, pairing)


def canonical_cover(n: int) -> SetValuedMap:
    """G(e_i) = {x in the standard n-simplex : x_i >= 1 / (n + 1)}."""
    threshold = 1.0 / (n + 1)
    return threshold_cover(n, threshold)


def threshold_cover(n: int, threshold: float) -> SetValuedMap:
    """G(e_i) = {x : x_i >= threshold} on the vertices of the standard n-simplex."""
    anchors = np.eye(n + 1)

    def member(i, z, tol):
        return z[i] >= threshold - tol

    def defect(i, z):
        return threshold - z[i]

    return SetValuedMap(anchors, member, defect)


def whole_hull_cover(anchors) -> SetValuedMap:
    """Every anchor is assigned the entire hull."""
    return SetValuedMap(anchors, lambda i, z, tol: True, lambda i, z: 0.0)
