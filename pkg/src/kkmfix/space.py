"""Finite-dimensional Hilbert spaces: Euclidean R^n and quadrature-discretized L2[a, b].

A function in discretized L2 is stored by its values at the quadrature nodes,
and every inner product is weighted by the rule, so norms of node vectors are
quadrature approximations of the continuous L2 norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, InvalidGridError

RULES = ("composite-trapezoid", "gauss-legendre")
_RULE_ALIASES = {
    "trapezoid": "composite-trapezoid",
    "composite-trapezoid": "composite-trapezoid",
    "gauss": "gauss-legendre",
    "gauss-legendre": "gauss-legendre",
}


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    rule: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        nodes, weights = self.nodes, self.weights
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 2:
            raise InvalidGridError("nodes and weights must be 1-d of equal length >= 2")
        if self.rule not in RULES:
            raise InvalidGridError(f"unknown quadrature rule {self.rule!r}")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidGridError("nodes must be strictly increasing")
        if nodes[0] < self.a or nodes[-1] > self.b:
            raise InvalidGridError("nodes must lie in [a, b]")
        if np.any(weights <= 0):
            raise InvalidGridError("weights must be positive")
        if abs(weights.sum() - (self.b - self.a)) > 1e-12 * max(1.0, self.b - self.a):
            raise InvalidGridError("weights must sum to b - a")

    @property
    def n(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, QuadratureGrid):
            return NotImplemented
        return (
            self.rule == other.rule
            and self.a == other.a
            and self.b == other.b
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.rule, self.a, self.b, self.nodes.size))


def _legendre(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) by the three-term recurrence (|x| < 1)."""
    p_prev, p = np.ones_like(x), x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        return p_prev, np.zeros_like(x)
    return p, n * (x * p - p_prev) / (x * x - 1.0)


def legendre_gauss_nodes(n: int, tol: float = 1e-15, max_newton: int = 100):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Roots of P_n are found by Newton's method started from
    ``cos(pi (i - 1/4) / (n + 1/2))``.
    """
    if n < 1:
        raise InvalidGridError("need at least one node")
    x = np.cos(np.pi * (np.arange(1, n + 1) - 0.25) / (n + 0.5))
    for _ in range(max_newton):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def make_grid(a: float, b: float, n: int, rule: str = "gauss-legendre") -> QuadratureGrid:
    """Build an ``n``-node quadrature rule on ``[a, b]``.

    ``rule`` is ``"composite-trapezoid"`` (alias ``"trapezoid"``) or
    ``"gauss-legendre"`` (alias ``"gauss"``).
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise InvalidGridError(f"need a < b, got a={a}, b={b}")
    if int(n) != n or n < 2:
        raise InvalidGridError(f"need n >= 2 nodes, got {n}")
    n = int(n)
    try:
        rule = _RULE_ALIASES[rule]
    except KeyError:
        raise InvalidGridError(f"unknown quadrature rule {rule!r}") from None

    if rule == "composite-trapezoid":
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2
    else:
        t, w = legendre_gauss_nodes(n)
        half = (b - a) / 2
        nodes = half * t + (a + b) / 2
        weights = half * w
    return QuadratureGrid(a, b, nodes, weights, rule)


@dataclass(frozen=True)
class Space:
    """Either Euclidean R^dim (``grid is None``) or L2 on a quadrature grid."""

    dim: int
    grid: Optional[QuadratureGrid] = None

    def __post_init__(self):
        if self.grid is not None and self.dim != self.grid.n:
            raise DimensionError("discretized L2 dimension must equal the node count")
        if self.dim < 1:
            raise DimensionError("dimension must be >= 1")

    @classmethod
    def euclidean(cls, dim: int) -> "Space":
        return cls(int(dim))

    @classmethod
    def l2(cls, grid: QuadratureGrid) -> "Space":
        return cls(grid.n, grid)

    @property
    def kind(self) -> str:
        return "euclidean" if self.grid is None else "discretized-L2"

    @property
    def weights(self) -> Optional[np.ndarray]:
        return None if self.grid is None else self.grid.weights

    def element(self, coords) -> "Element":
        return Element(coords, self)

    def zeros(self) -> "Element":
        return Element(np.zeros(self.dim), self)

    def from_function(self, func) -> "Element":
        """Sample ``func`` at the grid nodes (discretized L2 only)."""
        if self.grid is None:
            raise DimensionError("from_function needs a discretized L2 space")
        return Element(np.broadcast_to(func(self.grid.nodes), (self.dim,)), self)

    def inner_coords(self, x: np.ndarray, y: np.ndarray) -> float:
        if self.grid is None:
            return float(np.dot(x, y))
        return float(np.dot(self.grid.weights * x, y))

    def norm_coords(self, x: np.ndarray) -> float:
        return math.sqrt(max(self.inner_coords(x, x), 0.0))


@dataclass(frozen=True, eq=False)
class Element:
    coords: np.ndarray
    space: Space = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen(self.coords).reshape(-1))
        if self.coords.size != self.space.dim:
            raise DimensionError(
                f"expected {self.space.dim} coordinates, got {self.coords.size}"
            )

    def _check(self, other: "Element") -> None:
        if not isinstance(other, Element):
            raise TypeError(f"expected Element, got {type(other).__name__}")
        if other.space != self.space:
            raise DimensionError("elements belong to different spaces")

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.coords + other.coords, self.space)

    def __sub__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.coords - other.coords, self.space)

    def __neg__(self) -> "Element":
        return Element(-self.coords, self.space)

    def __mul__(self, c: float) -> "Element":
        return Element(float(c) * self.coords, self.space)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "Element":
        return Element(self.coords / float(c), self.space)

    def __len__(self) -> int:
        return self.coords.size

    def allclose(self, other: "Element", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coords, other.coords, rtol=0.0, atol=atol))


def inner(x: Element, y: Element) -> float:
    """Weighted inner product; plain dot product in the Euclidean case."""
    x._check(y)
    return x.space.inner_coords(x.coords, y.coords)


def norm(x: Element) -> float:
    return x.space.norm_coords(x.coords)


def distance(x: Element, y: Element) -> float:
    return norm(x - y)
