"""Picard iteration for contractions and projected Krasnoselskii-Mann averaging."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .convex import ConvexSet, contains
from .errors import PreconditionError
from .operators import Operator
from .space import Element, norm

log = logging.getLogger(__name__)

STALL_WINDOW = 50
STALL_DECREASE = 1e-15

CONVERGED = "converged"
MAX_ITERS = "max-iters"
STALLED = "stalled"


@dataclass(frozen=True)
class IterationConfig:
    alpha: float = 0.5
    max_iters: int = 10_000
    tol_residual: float = 1e-10
    record_history: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class ConvergenceReport:
    final: Element
    iterations: int
    residual_history: list[float]
    status: str
    error_bound: Optional[float] = None
    method: str = ""
    last_residual: float = field(init=False)

    def __post_init__(self):
        self.last_residual = self.residual_history[-1] if self.residual_history else float("nan")

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def residual(A: Operator, x: Element) -> float:
    """||x - A(x)||."""
    return norm(x - A(x))


def _stalled(history: list[float], tol: float) -> bool:
    if len(history) <= STALL_WINDOW:
        return False
    return history[-1] > tol and history[-1 - STALL_WINDOW] - history[-1] < STALL_DECREASE


def picard(A: Operator, x0: Element, cfg: IterationConfig = IterationConfig()) -> ConvergenceReport:
    """Iterate x_{n+1} = A(x_n).

    The recorded residual at step n is ||x_n - A(x_n)||, and the returned
    ``final`` is the iterate that residual certifies. When ``A`` carries a
    claimed Lipschitz constant k < 1, ``error_bound`` holds the a-posteriori
    estimate k / (1 - k) * ||x_{n+1} - x_n|| of the distance from ``A(final)``
    to the fixed point.
    """
    k = A.claimed_lipschitz
    x = x0
    history: list[float] = []
    status = MAX_ITERS
    n = 0
    for n in range(1, cfg.max_iters + 1):
        Ax = A(x)
        r = norm(x - Ax)
        history.append(r)
        if r <= cfg.tol_residual:
            status = CONVERGED
            break
        if _stalled(history, cfg.tol_residual):
            status = STALLED
            break
        x = Ax
    bound = None
    if k is not None and k < 1:
        bound = k / (1 - k) * history[-1]
    if status != CONVERGED:
        log.info("picard stopped with status %s after %d iterations", status, n)
    return ConvergenceReport(
        x, n, history if cfg.record_history else history[-1:], status, bound, "picard"
    )


def krasnoselskii_mann(
    A: Operator, M: ConvexSet, x0: Element, cfg: IterationConfig = IterationConfig()
) -> ConvergenceReport:
    """Iterate x_{n+1} = P_M((1 - alpha) x_n + alpha A(x_n)).

    ``x0`` must lie in ``M`` (tolerance 1e-9). Every iterate stays in ``M``
    because of the projection, which is applied even when A maps M into itself.
    """
    if not contains(M, x0, 1e-9):
        raise PreconditionError("starting point lies outside the feasible set")
    alpha = cfg.alpha
    x = x0
    history: list[float] = []
    status = MAX_ITERS
    n = 0
    for n in range(1, cfg.max_iters + 1):
        Ax = A(x)
        r = norm(x - Ax)
        history.append(r)
        if r <= cfg.tol_residual:
            status = CONVERGED
            break
        x = M.project((1 - alpha) * x + alpha * Ax)
    if status != CONVERGED:
        log.info("krasnoselskii-mann hit the iteration budget (%d)", n)
    return ConvergenceReport(
        x, n, history if cfg.record_history else history[-1:], status, None, "km"
    )
