"""Constructive fixed points of non-expansive maps, monotone variational
inequalities, KKM covering checks, and linear Fredholm equations of the
second kind on quadrature grids."""

from .convex import Ball, Box, ConvexSet, Intersection, Simplex, contains, project, sample_points
from .errors import KKMFixError
from .fixpoint import ConvergenceReport, IterationConfig, krasnoselskii_mann, picard, residual
from .fredholm import (
    ConditionReport,
    FredholmOperator,
    IntegralProblem,
    Kernel,
    apply_operator,
    check_conditions,
    direct_solve_oracle,
    gamma_sup,
    kernel_l2_norm,
    min_radius,
    solve,
)
from .kkm import (
    SetValuedMap,
    build_p_mapping,
    canonical_cover,
    check_kkm_covering,
    find_intersection,
    threshold_cover,
)
from .operators import (
    Affine,
    Averaged,
    Composed,
    FunctionOperator,
    Operator,
    ResidualOperator,
    Rotation,
    Scaled,
    check_hemicontinuous,
    check_monotone,
    check_nonexpansive,
)
from .space import Element, QuadratureGrid, Space, inner, make_grid, norm
from .vi import MintyReport, VIProblem, minty_residuals, solve_vi_extragradient

__version__ = "0.1.0"
