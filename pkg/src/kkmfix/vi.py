"""Monotone variational inequalities over a convex set.

The problem is to find x in M with <L(x), x - y> <= 0 for every y in M.
Residuals are reported in that "<= 0" orientation throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .convex import ConvexSet, contains, sample_points
from .errors import PreconditionError
from .fixpoint import CONVERGED, MAX_ITERS, ConvergenceReport, IterationConfig
from .operators import ResidualOperator
from .space import Element, inner, norm

STEP_SAFETY = 0.9


@dataclass(frozen=True)
class VIProblem:
    L: ResidualOperator
    M: ConvexSet
    # I - A is 2-Lipschitz whenever A is non-expansive
    lipschitz_bound: float = 2.0

    def __post_init__(self):
        if not self.lipschitz_bound > 0:
            raise ValueError("lipschitz_bound must be positive")


@dataclass
class MintyReport:
    primal: float
    dual: float
    samples: int
    seed: int
    max_gap: float
    """Largest per-sample value of dual_term - primal_term; <= 0 for monotone L."""


def solve_vi_extragradient(
    p: VIProblem, x0: Element, cfg: IterationConfig = IterationConfig()
) -> tuple[Element, ConvergenceReport]:
    """Korpelevich extragradient iteration with step 0.9 / lipschitz_bound.

    Each step predicts y = P(x - tau L(x)) and corrects x = P(x - tau L(y));
    the recorded residual is ||x - y||, which vanishes exactly at solutions.
    """
    if not contains(p.M, x0, 1e-9):
        raise PreconditionError("starting point lies outside the feasible set")
    tau = STEP_SAFETY / p.lipschitz_bound
    L, M = p.L, p.M
    x = x0
    history: list[float] = []
    status = MAX_ITERS
    n = 0
    for n in range(1, cfg.max_iters + 1):
        y = M.project(x - tau * L(x))
        r = norm(x - y)
        history.append(r)
        if r <= cfg.tol_residual:
            status = CONVERGED
            break
        x = M.project(x - tau * L(y))
    report = ConvergenceReport(
        x, n, history if cfg.record_history else history[-1:], status, None, "extragradient"
    )
    return x, report


def minty_residuals(
    p: VIProblem,
    x_hat: Element,
    n_samples: int = 500,
    seed: int = 0,
    extra_points: Optional[Sequence[Element]] = None,
    include_extreme_points: bool = True,
) -> MintyReport:
    """Primal and dual (Minty) residuals of ``x_hat`` over test points of M.

    primal = max_y <L(x_hat), x_hat - y>, dual = max_y <L(y), x_hat - y>.
    The test points are ``sample_points(M, n_samples, seed)``, the closed-form
    extreme points of M, and any ``extra_points``.
    """
    if not contains(p.M, x_hat, 1e-8):
        raise PreconditionError("x_hat lies outside the feasible set")
    points = list(sample_points(p.M, n_samples, seed))
    if include_extreme_points:
        points.extend(p.M.extreme_points())
    if extra_points:
        points.extend(extra_points)
    L_hat = p.L(x_hat)
    primal = dual = max_gap = -math.inf
    for y in points:
        d = x_hat - y
        pt = inner(L_hat, d)
        dt = inner(p.L(y), d)
        primal = max(primal, pt)
        dual = max(dual, dt)
        max_gap = max(max_gap, dt - pt)
    return MintyReport(primal, dual, len(points), seed, max_gap)
