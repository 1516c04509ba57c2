"""Bounded closed convex sets with projections and seeded sampling.

Every projection is taken in the norm of the ambient :class:`~kkmfix.space.Space`,
so on discretized L2 the box and simplex projections are weighted ones.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidSetError, ProjectionNonconvergenceError
from .space import Element, Space, norm

DYKSTRA_MAX_SWEEPS = 10_000
DYKSTRA_TOL = 1e-10
MAX_FACE_ENUMERATION = 12
MAX_BOX_CORNERS = 12


class ConvexSet:
    """Base class; subclasses implement :meth:`_project` on raw coordinates."""

    space: Space

    def project(self, x: Element) -> Element:
        if x.space != self.space:
            raise DimensionError("point and set live in different spaces")
        return Element(self._project(x.coords), self.space)

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        raise NotImplementedError

    def extreme_points(self) -> list[Element]:
        """Extreme points available in closed form (empty when there are none)."""
        return []

    def contains(self, x: Element, tol: float = 0.0) -> bool:
        return contains(self, x, tol)


class Ball(ConvexSet):
    def __init__(self, center: Element, radius: float):
        if not radius > 0:
            raise InvalidSetError("ball radius must be positive")
        self.center = center
        self.radius = float(radius)
        self.space = center.space

    def _project(self, x):
        d = x - self.center.coords
        r = self.space.norm_coords(d)
        if r <= self.radius:
            return x.copy()
        return self.center.coords + d * (self.radius / r)

    def _sample(self, rng, k):
        dim = self.space.dim
        out = np.empty((k, dim))
        for i in range(k):
            g = rng.standard_normal(dim)
            g /= self.space.norm_coords(g)
            out[i] = self.center.coords + g * self.radius * rng.random() ** (1.0 / dim)
        return out

    def __repr__(self):
        return f"Ball(radius={self.radius}, dim={self.space.dim})"


class Box(ConvexSet):
    def __init__(self, lower: Element, upper: Element):
        lower._check(upper)
        if np.any(lower.coords > upper.coords):
            raise InvalidSetError("box needs lower <= upper componentwise")
        self.lower, self.upper = lower, upper
        self.space = lower.space

    def _project(self, x):
        # weighted norms are diagonal, so clamping is exact in every space
        return np.clip(x, self.lower.coords, self.upper.coords)

    def _sample(self, rng, k):
        lo, hi = self.lower.coords, self.upper.coords
        return lo + rng.random((k, lo.size)) * (hi - lo)

    def extreme_points(self):
        dim = self.space.dim
        if dim > MAX_BOX_CORNERS:
            return []
        lo, hi = self.lower.coords, self.upper.coords
        corners = itertools.product(*zip(lo, hi))
        return [Element(np.array(c), self.space) for c in corners]

    def __repr__(self):
        return f"Box(dim={self.space.dim})"


class Simplex(ConvexSet):
    """Convex hull of affinely independent vertices.

    The probability simplex (vertices = standard basis of R^n) is projected by
    the sort-and-threshold rule; any other vertex set by exact enumeration of
    faces, which is finite but exponential and therefore capped.
    """

    def __init__(self, vertices: Sequence[Element]):
        if len(vertices) < 1:
            raise InvalidSetError("simplex needs at least one vertex")
        self.space = vertices[0].space
        for v in vertices[1:]:
            vertices[0]._check(v)
        self.vertices = list(vertices)
        V = np.array([v.coords for v in vertices])
        self._V = V
        if len(vertices) > 1:
            D = V[1:] - V[0]
            if np.linalg.matrix_rank(D, tol=1e-12 * max(1.0, np.abs(D).max())) < len(D):
                raise InvalidSetError("simplex vertices must be affinely independent")
        self._standard = self.space.grid is None and V.shape[0] == V.shape[1] and np.array_equal(
            V, np.eye(V.shape[0])
        )
        if not self._standard and len(vertices) > MAX_FACE_ENUMERATION:
            raise InvalidSetError(
                f"general simplices are limited to {MAX_FACE_ENUMERATION} vertices"
            )

    @classmethod
    def standard(cls, dim: int) -> "Simplex":
        space = Space.euclidean(dim)
        return cls([Element(e, space) for e in np.eye(dim)])

    def _project(self, x):
        if self._standard:
            return project_probability_simplex(x)
        return self._project_by_faces(x)

    def _project_by_faces(self, x):
        V = self._V
        m = V.shape[0]
        best, best_d = None, math.inf
        for size in range(1, m + 1):
            for face in itertools.combinations(range(m), size):
                p = self._affine_projection(V[list(face)], x)
                if p is None:
                    continue
                d = self.space.norm_coords(x - p)
                if d < best_d:
                    best, best_d = p, d
        return best

    def _affine_projection(self, F, x):
        """Projection onto aff(F) if it lands inside conv(F), else None."""
        base = F[0]
        if len(F) == 1:
            return base.copy()
        D = F[1:] - base
        gram = np.array([[self.space.inner_coords(u, v) for v in D] for u in D])
        rhs = np.array([self.space.inner_coords(u, x - base) for u in D])
        mu = np.linalg.solve(gram, rhs)
        if np.any(mu < -1e-14) or mu.sum() > 1 + 1e-14:
            return None
        mu = np.clip(mu, 0.0, None)
        if mu.sum() > 1:
            mu /= mu.sum()
        return base + mu @ D

    def _sample(self, rng, k):
        # normalized exponential spacings are uniform on the simplex
        e = rng.exponential(size=(k, len(self.vertices)))
        lam = e / e.sum(axis=1, keepdims=True)
        return lam @ self._V

    def extreme_points(self):
        return list(self.vertices)

    def __repr__(self):
        return f"Simplex(vertices={len(self.vertices)}, dim={self.space.dim})"


class Intersection(ConvexSet):
    """Intersection of convex sets, projected by Dykstra's alternating scheme."""

    def __init__(self, members: Sequence[ConvexSet]):
        if not members:
            raise InvalidSetError("intersection needs at least one member")
        self.members = list(members)
        self.space = members[0].space
        if any(m.space != self.space for m in members):
            raise DimensionError("intersection members live in different spaces")
        try:
            self._project(np.zeros(self.space.dim))
        except ProjectionNonconvergenceError as exc:
            raise InvalidSetError("intersection appears to be empty") from exc

    def _project(self, x):
        members = self.members
        if len(members) == 1:
            return members[0]._project(x)
        y = np.array(x, dtype=float)
        increments = [np.zeros_like(y) for _ in members]
        for _ in range(DYKSTRA_MAX_SWEEPS):
            y_start = y
            for i, m in enumerate(members):
                z = y + increments[i]
                y_new = m._project(z)
                increments[i] = z - y_new
                y = y_new
            infeasibility = max(
                self.space.norm_coords(y - m._project(y)) for m in members
            )
            moved = self.space.norm_coords(y - y_start)
            if infeasibility <= DYKSTRA_TOL and moved <= 1e-14 * max(1.0, self.space.norm_coords(y)):
                return y
        if infeasibility <= DYKSTRA_TOL:
            return y
        raise ProjectionNonconvergenceError(
            f"Dykstra reached infeasibility {infeasibility:.3e} after "
            f"{DYKSTRA_MAX_SWEEPS} sweeps"
        )

    def _sample(self, rng, k):
        pts = self.members[0]._sample(rng, k)
        return np.array([self._project(p) for p in pts])

    def __repr__(self):
        return f"Intersection({self.members!r})"


def project_probability_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1} by sorting."""
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(x - theta, 0.0)


def project(M: ConvexSet, x: Element) -> Element:
    return M.project(x)


def contains(M: ConvexSet, x: Element, tol: float = 0.0) -> bool:
    """True when the distance from ``x`` to ``M`` is at most ``tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return norm(x - M.project(x)) <= tol


def sample_points(M: ConvexSet, k: int, seed: int) -> list[Element]:
    """``k`` deterministic points of ``M`` drawn with ``numpy.random.default_rng(seed)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    pts = M._sample(rng, k)
    out = []
    for p in pts:
        e = Element(p, M.space)
        # guard against round-off just outside the boundary
        if not contains(M, e, 1e-12):
            e = M.project(e)
        out.append(e)
    return out
