"""Linear Fredholm equations of the second kind, u = lambda * K u + f, on [a, b].

The integral operator is discretized by the Nystrom method on a quadrature
grid: (Au)_i = lambda * sum_j w_j K(x_i, x_j) u_j + f(x_i). Node vectors carry
the rule-weighted L2 geometry of :mod:`kkmfix.space`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .convex import Ball
from .errors import (
    ConditionsViolatedError,
    DimensionError,
    EvaluationError,
    NotApplicableError,
    OracleUnavailableError,
    PreconditionError,
)
from .expression import Expression, parse_expression
from .fixpoint import ConvergenceReport, IterationConfig, krasnoselskii_mann, picard
from .operators import Operator
from .space import Element, QuadratureGrid, Space, make_grid

log = logging.getLogger(__name__)

DEFAULT_RULE = "gauss-legendre"
DEFAULT_NODES = 64
ZERO_SOURCE_TOL = 1e-14
BANACH_WARN_BAND = 1e-6
# quadrature rounding around an exact product of 1
EQUALITY_SLACK = 1e-12
# products this close to 1 give useless Picard error bounds
CONTRACTION_MARGIN = 1e-12
ORACLE_MAX_COND = 1e12

L2_CONDITION_NOTE = (
    "l2 condition uses |lambda| * sqrt(int int K^2), the form under which the "
    "operator is non-expansive; |lambda| * int int K^2 is reported alongside"
)


class Kernel:
    """K(x, y) given by an expression, a vectorized callable, or node samples."""

    def __init__(self, source: Union[str, Expression, Callable, np.ndarray]):
        self.samples = None
        self.func = None
        if isinstance(source, str):
            source = parse_expression(source)
        if isinstance(source, np.ndarray):
            self.samples = np.array(source, dtype=float)
            if self.samples.ndim != 2 or self.samples.shape[0] != self.samples.shape[1]:
                raise DimensionError("kernel samples must be a square matrix")
        elif callable(source):
            self.func = source
        else:
            raise TypeError(f"cannot build a kernel from {type(source).__name__}")
        self.source = source

    def matrix(self, grid: QuadratureGrid) -> np.ndarray:
        """K(x_i, x_j) on the tensor grid."""
        if self.samples is not None:
            if self.samples.shape != (grid.n, grid.n):
                raise DimensionError(
                    f"kernel samples are {self.samples.shape}, grid has {grid.n} nodes"
                )
            return self._finite(self.samples)
        return self.evaluate(grid.nodes)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """K on the tensor product ``points`` x ``points`` (functional kernels only)."""
        if self.func is None:
            raise TypeError("sampled kernels can only be read on their own grid")
        X, Y = np.meshgrid(points, points, indexing="ij")
        return self._finite(np.broadcast_to(np.asarray(self.func(x=X, y=Y), dtype=float), X.shape))

    @staticmethod
    def _finite(K):
        if not np.all(np.isfinite(K)):
            raise EvaluationError("kernel has non-finite values on the grid")
        return np.array(K)

    def scaled(self, c: float) -> "Kernel":
        return Kernel(c * self.samples) if self.samples is not None else Kernel(
            lambda x, y, _f=self.func: c * np.asarray(_f(x=x, y=y), dtype=float)
        )

    def __repr__(self):
        return f"Kernel({self.source!r})"


def source_values(f, grid: QuadratureGrid) -> np.ndarray:
    """Node values of a source term given as expression text, callable or array."""
    if isinstance(f, str):
        f = parse_expression(f)
    if callable(f):
        vals = np.asarray(f(x=grid.nodes), dtype=float)
        vals = np.broadcast_to(vals, grid.nodes.shape).copy()
    else:
        vals = np.array(f, dtype=float).reshape(-1)
        if vals.size != grid.n:
            raise DimensionError(f"source has {vals.size} values, grid has {grid.n} nodes")
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("source term has non-finite values on the grid")
    return vals


@dataclass(frozen=True)
class IntegralProblem:
    a: float
    b: float
    lam: float
    kernel: Kernel
    f: object
    grid: QuadratureGrid

    def __post_init__(self):
        if not isinstance(self.kernel, Kernel):
            object.__setattr__(self, "kernel", Kernel(self.kernel))
        if self.grid.a != self.a or self.grid.b != self.b:
            raise PreconditionError("grid endpoints must equal (a, b)")

    @classmethod
    def build(cls, a, b, lam, kernel, f, n=DEFAULT_NODES, rule=DEFAULT_RULE) -> "IntegralProblem":
        return cls(float(a), float(b), float(lam), Kernel(kernel), f, make_grid(a, b, n, rule))

    @cached_property
    def space(self) -> Space:
        return Space.l2(self.grid)

    @cached_property
    def kernel_matrix(self) -> np.ndarray:
        return self.kernel.matrix(self.grid)

    @cached_property
    def f_values(self) -> np.ndarray:
        return source_values(self.f, self.grid)

    @cached_property
    def nystrom_matrix(self) -> np.ndarray:
        """lambda * K(x_i, x_j) * w_j."""
        return self.lam * self.kernel_matrix * self.grid.weights[None, :]

    def element(self, values) -> Element:
        if callable(values) or isinstance(values, str):
            return Element(source_values(values, self.grid), self.space)
        return Element(values, self.space)

    def with_source(self, f) -> "IntegralProblem":
        return IntegralProblem(self.a, self.b, self.lam, self.kernel, f, self.grid)


@dataclass
class ConditionReport:
    gamma: float
    kernel_l2: float
    banach_product: float
    l2_product: float
    l2_product_squared: float
    banach_ok: bool
    l2_ok: bool
    f_norm: float
    f_is_zero: bool
    r_min: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def any_ok(self) -> bool:
        return self.banach_ok or self.l2_ok


def gamma_sup(K: Kernel, grid: QuadratureGrid) -> float:
    """max |K| over the tensor grid of nodes, a lower bound on the true supremum.

    Functional kernels are also evaluated at the endpoints a and b, which
    Gauss-Legendre nodes never reach.
    """
    if K.func is None:
        return float(np.max(np.abs(K.matrix(grid))))
    pts = np.unique(np.concatenate(([grid.a], grid.nodes, [grid.b])))
    return float(np.max(np.abs(K.evaluate(pts))))


def kernel_l2_norm(K: Kernel, grid: QuadratureGrid) -> float:
    """Tensor-quadrature L2 norm (sum_ij w_i w_j K_ij^2)^(1/2)."""
    Km = K.matrix(grid)
    w = grid.weights
    scale = float(np.max(np.abs(Km))) if Km.size else 0.0
    if scale == 0.0:
        return 0.0
    Ks = Km / scale  # avoid under/overflow when squaring
    return scale * math.sqrt(float(w @ (Ks * Ks) @ w))


def _l2(values: np.ndarray, grid: QuadratureGrid) -> float:
    return math.sqrt(float(grid.weights @ (values * values)))


def min_radius(p: IntegralProblem) -> float:
    """Smallest ball radius r with ||f|| + |lambda| ||K|| r <= r."""
    kl2 = kernel_l2_norm(p.kernel, p.grid)
    f_norm = _l2(p.f_values, p.grid)
    q = abs(p.lam) * kl2
    if f_norm <= ZERO_SOURCE_TOL:
        raise NotApplicableError("min_radius needs a nonzero source term; any radius works when f = 0")
    if q >= 1:
        raise NotApplicableError(f"min_radius needs |lambda| * ||K|| < 1, got {q:.6g}")
    return f_norm / (1 - q)


def check_conditions(p: IntegralProblem) -> ConditionReport:
    gamma = gamma_sup(p.kernel, p.grid)
    kl2 = kernel_l2_norm(p.kernel, p.grid)
    f_norm = _l2(p.f_values, p.grid)
    f_zero = f_norm <= ZERO_SOURCE_TOL
    width = p.b - p.a
    banach_product = width * abs(p.lam) * gamma
    q = abs(p.lam) * kl2
    l2_ok = q <= 1 + EQUALITY_SLACK if f_zero else q < 1
    notes = [L2_CONDITION_NOTE]
    if abs(banach_product - 1) <= BANACH_WARN_BAND:
        msg = (
            f"sup-norm product {banach_product:.12g} is within {BANACH_WARN_BAND:g} of 1; "
            "gamma is a grid maximum and may underestimate the supremum"
        )
        log.warning(msg)
        notes.append(msg)
    r_min = None
    if not f_zero and q < 1:
        r_min = f_norm / (1 - q)
    return ConditionReport(
        gamma=gamma,
        kernel_l2=kl2,
        banach_product=banach_product,
        l2_product=q,
        l2_product_squared=abs(p.lam) * kl2 * kl2,
        banach_ok=banach_product < 1,
        l2_ok=l2_ok,
        f_norm=f_norm,
        f_is_zero=f_zero,
        r_min=r_min,
        notes=notes,
    )


def apply_operator(p: IntegralProblem, u: Element) -> Element:
    """Nystrom image (Au)_i = lambda * sum_j w_j K(x_i, x_j) u_j + f(x_i)."""
    if u.space != p.space:
        raise DimensionError("u must live on the problem grid")
    return Element(p.nystrom_matrix @ u.coords + p.f_values, p.space)


class FredholmOperator(Operator):
    """The Nystrom map of an :class:`IntegralProblem` as an :class:`Operator`.

    The claimed Lipschitz constant |lambda| * ||K|| is exact as a bound in the
    discrete weighted geometry (Cauchy-Schwarz holds for the weighted sums).
    """

    def __init__(self, problem: IntegralProblem, domain=None):
        self.problem = problem
        self.domain = domain
        self.claimed_lipschitz = abs(problem.lam) * kernel_l2_norm(problem.kernel, problem.grid)

    def _apply(self, x):
        p = self.problem
        return p.nystrom_matrix @ x + p.f_values


def solve(
    p: IntegralProblem,
    method: str = "auto",
    cfg: IterationConfig = IterationConfig(),
    radius: Optional[float] = None,
    x0: Optional[Element] = None,
    override: bool = False,
) -> tuple[Element, ConvergenceReport, ConditionReport]:
    """Solve the discretized equation by Picard or Krasnoselskii-Mann iteration.

    ``auto`` uses Picard when |lambda| ||K|| is below 1 by at least
    ``CONTRACTION_MARGIN`` or the sup-norm condition holds, and K-M on the
    ball of radius ``r_min`` (or ``radius`` when f = 0) otherwise. With both conditions violated the call is refused unless
    ``override`` is set.
    """
    if method not in ("auto", "picard", "km"):
        raise ValueError(f"unknown method {method!r}")
    cond = check_conditions(p)
    if not cond.any_ok:
        if not override:
            raise ConditionsViolatedError(
                f"|lambda|*||K|| = {cond.l2_product:.6g} and "
                f"(b-a)|lambda|Gamma = {cond.banach_product:.6g}: no existence condition holds"
            )
        log.warning("both existence conditions fail; continuing on request")

    if method == "auto":
        contracts = cond.l2_product <= 1 - CONTRACTION_MARGIN
        method = "picard" if contracts or cond.banach_ok else "km"

    A = FredholmOperator(p)
    if x0 is None:
        x0 = p.space.zeros()

    if method == "picard":
        report = picard(A, x0, cfg)
        return report.final, report, cond

    if radius is None:
        if cond.r_min is None:
            raise NotApplicableError(
                "a ball radius is required: it cannot be derived when f = 0 "
                "or |lambda| * ||K|| >= 1"
            )
        radius = cond.r_min
    elif cond.r_min is not None and radius < cond.r_min:
        log.warning("radius %g is below r_min %g; the ball may not be invariant", radius, cond.r_min)
    M = Ball(p.space.zeros(), radius)
    A.domain = M
    report = krasnoselskii_mann(A, M, x0, cfg)
    return report.final, report, cond


def direct_solve_oracle(p: IntegralProblem, return_cond: bool = False):
    """Dense LU solve of (I - lambda K W) u = f, independent of the iterations."""
    n = p.grid.n
    system = np.eye(n) - p.nystrom_matrix
    cond = float(np.linalg.cond(system))
    if not math.isfinite(cond) or cond > ORACLE_MAX_COND:
        raise OracleUnavailableError(
            f"Nystrom matrix is singular or ill-conditioned (cond = {cond:.3e})"
        )
    try:
        u = np.linalg.solve(system, p.f_values)
    except np.linalg.LinAlgError as exc:
        raise OracleUnavailableError(str(exc)) from exc
    sol = Element(u, p.space)
    return (sol, cond) if return_cond else sol
