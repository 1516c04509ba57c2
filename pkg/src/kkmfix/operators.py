"""Self-maps A of a convex set, the residual map L = I - A, and sampling certifiers.

The certifiers are falsifiers: a ratio above one (or a negative pairing) is a
proof of failure, while passing values are only evidence, since the
properties quantify over all pairs of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .convex import ConvexSet, sample_points
from .errors import DimensionError, SamplingError
from .space import Element, inner, norm

HEMICONTINUITY_TOL = 1e-6


class Operator:
    """A map on the elements of one space.

    Subclasses implement :meth:`_apply` on raw coordinates. ``domain`` is
    informational; ``claimed_lipschitz`` is used by Picard's error bound.
    """

    domain: Optional[ConvexSet] = None
    claimed_lipschitz: Optional[float] = None

    def __call__(self, x: Element) -> Element:
        out = self._apply(x.coords)
        if out.shape != x.coords.shape:
            raise DimensionError("operator changed the dimension of its argument")
        return Element(out, x.space)

    def _apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _set_lipschitz(self, value):
        if value is not None and value < 0:
            raise ValueError("claimed_lipschitz must be >= 0")
        self.claimed_lipschitz = None if value is None else float(value)


class Affine(Operator):
    """x -> matrix @ x + shift."""

    def __init__(self, matrix, shift=None, domain=None, claimed_lipschitz=None):
        self.matrix = np.array(matrix, dtype=float)
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise DimensionError("affine operator needs a square matrix")
        self.shift = np.zeros(n) if shift is None else np.array(shift, dtype=float).reshape(n)
        self.domain = domain
        self._set_lipschitz(claimed_lipschitz)

    @classmethod
    def identity(cls, dim: int, **kw) -> "Affine":
        kw.setdefault("claimed_lipschitz", 1.0)
        return cls(np.eye(dim), **kw)

    @classmethod
    def zero(cls, dim: int, **kw) -> "Affine":
        kw.setdefault("claimed_lipschitz", 0.0)
        return cls(np.zeros((dim, dim)), **kw)

    def _apply(self, x):
        return self.matrix @ x + self.shift


class Rotation(Operator):
    """Rotation by ``angle`` radians in the coordinate plane ``plane``."""

    def __init__(self, angle: float, dim: int = 2, plane=(0, 1), domain=None):
        i, j = plane
        if not (0 <= i < dim and 0 <= j < dim and i != j):
            raise DimensionError(f"invalid rotation plane {plane} for dimension {dim}")
        self.angle = float(angle)
        self.dim = dim
        self.plane = (i, j)
        self.domain = domain
        self.claimed_lipschitz = 1.0

    def _apply(self, x):
        i, j = self.plane
        c, s = math.cos(self.angle), math.sin(self.angle)
        out = x.copy()
        out[i] = c * x[i] - s * x[j]
        out[j] = s * x[i] + c * x[j]
        return out


class Scaled(Operator):
    def __init__(self, inner_op: Operator, factor: float, domain=None):
        self.inner = inner_op
        self.factor = float(factor)
        self.domain = domain if domain is not None else inner_op.domain
        if inner_op.claimed_lipschitz is not None:
            self.claimed_lipschitz = abs(self.factor) * inner_op.claimed_lipschitz

    def _apply(self, x):
        return self.factor * self.inner._apply(x)


class Averaged(Operator):
    """(1 - weight) * first + weight * second."""

    def __init__(self, first: Operator, second: Operator, weight: float, domain=None):
        self.first, self.second = first, second
        self.weight = float(weight)
        self.domain = domain if domain is not None else first.domain
        lf, ls = first.claimed_lipschitz, second.claimed_lipschitz
        if lf is not None and ls is not None and 0 <= self.weight <= 1:
            self.claimed_lipschitz = (1 - self.weight) * lf + self.weight * ls

    def _apply(self, x):
        w = self.weight
        return (1 - w) * self.first._apply(x) + w * self.second._apply(x)


class Composed(Operator):
    """Apply ``ops[0]`` first, then ``ops[1]``, and so on."""

    def __init__(self, ops: Sequence[Operator], domain=None):
        if not ops:
            raise ValueError("composition needs at least one operator")
        self.ops = list(ops)
        self.domain = domain if domain is not None else self.ops[0].domain
        ks = [op.claimed_lipschitz for op in self.ops]
        if all(k is not None for k in ks):
            self.claimed_lipschitz = math.prod(ks)

    def _apply(self, x):
        for op in self.ops:
            x = op._apply(x)
        return x


class FunctionOperator(Operator):
    """Wrap a plain function of a coordinate array."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], domain=None, claimed_lipschitz=None):
        self.func = func
        self.domain = domain
        self._set_lipschitz(claimed_lipschitz)

    def _apply(self, x):
        return np.asarray(self.func(x), dtype=float).reshape(x.shape)


@dataclass(frozen=True)
class ResidualOperator:
    """L(x) = x - A(x)."""

    base: Operator

    def __call__(self, x: Element) -> Element:
        return Element(x.coords - self.base._apply(x.coords), x.space)


@dataclass
class NonexpansiveReport:
    max_ratio: float
    witness: tuple[Element, Element]
    pairs_used: int

    @property
    def expansive(self) -> bool:
        """True when the sample proves the map is not non-expansive."""
        return self.max_ratio > 1 + 1e-9


@dataclass
class MonotoneReport:
    min_pairing: float
    min_normalized: float
    witness: tuple[Element, Element]
    pairs_used: int

    @property
    def monotone(self) -> bool:
        return self.min_pairing >= -1e-10


@dataclass
class ProbeReport:
    t_values: list[float]
    deviations: list[float]
    tol: float = HEMICONTINUITY_TOL
    continuous: bool = field(init=False)

    def __post_init__(self):
        self.continuous = bool(self.deviations) and self.deviations[-1] <= self.tol


def _sample_pairs(M: ConvexSet, n_pairs: int, seed: int):
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    pts = sample_points(M, 2 * n_pairs, seed)
    return list(zip(pts[0::2], pts[1::2]))


def check_nonexpansive(A: Operator, M: ConvexSet, n_pairs: int = 1000, seed: int = 0) -> NonexpansiveReport:
    """Largest sampled ratio ||Ax - Ay|| / ||x - y|| over pairs drawn from ``M``."""
    best, witness, used = -math.inf, None, 0
    for x, y in _sample_pairs(M, n_pairs, seed):
        d = norm(x - y)
        if d == 0.0:
            continue
        used += 1
        ratio = norm(A(x) - A(y)) / d
        if ratio > best:
            best, witness = ratio, (x, y)
    if used == 0:
        raise SamplingError("every sampled pair was degenerate")
    return NonexpansiveReport(best, witness, used)


def check_monotone(L: ResidualOperator, M: ConvexSet, n_pairs: int = 1000, seed: int = 0) -> MonotoneReport:
    """Smallest sampled pairing <L(x) - L(y), x - y> over pairs drawn from ``M``.

    ``min_normalized`` is the smallest pairing divided by ||x - y||^2.
    """
    best, best_norm, witness, used = math.inf, math.inf, None, 0
    for x, y in _sample_pairs(M, n_pairs, seed):
        diff = x - y
        pairing = inner(L(x) - L(y), diff)
        used += 1
        if pairing < best:
            best, witness = pairing, (x, y)
        d2 = inner(diff, diff)
        if d2 > 0:
            best_norm = min(best_norm, pairing / d2)
    return MonotoneReport(best, best_norm, witness, used)


def check_hemicontinuous(
    L,
    x: Element,
    direction: Element,
    t_sequence: Optional[Sequence[float]] = None,
    M: Optional[ConvexSet] = None,
    tol: float = HEMICONTINUITY_TOL,
) -> ProbeReport:
    """Probe ||L(x + t d) - L(x)|| along a decreasing sequence of t > 0.

    Points that leave ``M`` are projected back when ``M`` is given. The report
    is flagged continuous when the final deviation is at most ``tol``.
    """
    if t_sequence is None:
        t_sequence = [10.0 ** -k for k in range(1, 13)]
    ts = [float(t) for t in t_sequence]
    if any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_sequence must be positive and strictly decreasing")
    base = L(x)
    deviations = []
    for t in ts:
        z = x + t * direction
        if M is not None:
            z = M.project(z)
        deviations.append(norm(L(z) - base))
    return ProbeReport(ts, deviations, tol)

