import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkmfix.convex import Ball, Box, Simplex, contains
from kkmfix.errors import PreconditionError
from kkmfix.fixpoint import IterationConfig, krasnoselskii_mann, residual
from kkmfix.fredholm import FredholmOperator, IntegralProblem
from kkmfix.operators import Affine, Averaged, ResidualOperator, Rotation, check_monotone
from kkmfix.space import Element, Space
from kkmfix.vi import VIProblem, minty_residuals, solve_vi_extragradient

CFG = IterationConfig(tol_residual=1e-10)


@pytest.fixture
def ball(e2):
    return Ball(e2.zeros(), 1.0)


def test_identity_residual_has_zero_solution(ball, vec):
    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    x_hat, rep = solve_vi_extragradient(p, vec(0.7, 0), CFG)
    assert rep.converged
    np.testing.assert_allclose(x_hat.coords, [0, 0], atol=1e-9)


def test_constant_field_on_box(vec, e2):
    box = Box(vec(0, 0), vec(1, 1))
    c = np.array([1.0, 1.0])
    p = VIProblem(ResidualOperator(Affine(np.eye(2), -c)), box)
    x_hat, rep = solve_vi_extragradient(p, vec(0.5, 0.5), CFG)
    # vertex enumeration: the VI solution minimizes <c, .> over the box
    corners = [np.array(v) for v in itertools.product([0, 1], repeat=2)]
    best = min(corners, key=lambda v: c @ v)
    np.testing.assert_allclose(x_hat.coords, best, atol=1e-12)
    assert rep.converged


def test_rotation_vi_origin(ball, vec):
    p = VIProblem(ResidualOperator(Rotation(math.pi / 2)), ball)
    x_hat, rep = solve_vi_extragradient(p, vec(1, 0), CFG)
    assert rep.converged
    assert np.linalg.norm(x_hat.coords) <= 1e-6


def test_start_outside_rejected(ball, vec):
    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    with pytest.raises(PreconditionError):
        solve_vi_extragradient(p, vec(2, 0))


def test_lipschitz_bound_positive(ball):
    with pytest.raises(ValueError):
        VIProblem(ResidualOperator(Affine.zero(2)), ball, 0.0)


def test_minty_at_solution_of_identity(ball, e2):
    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    rep = minty_residuals(p, e2.zeros(), 200, 0)
    assert rep.primal == pytest.approx(0.0, abs=1e-12)
    assert rep.dual <= 0
    assert rep.samples == 200


def test_minty_dual_is_minus_min_norm(ball, e2):
    from kkmfix.convex import sample_points

    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    rep = minty_residuals(p, e2.zeros(), 200, 5)
    pts = sample_points(ball, 200, 5)
    assert rep.dual == pytest.approx(-min(np.dot(y.coords, y.coords) for y in pts))


def test_minty_primal_at_boundary_point(ball, vec):
    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    x_hat = vec(1, 0)
    rep = minty_residuals(p, x_hat, 500, 1, extra_points=[vec(-1, 0)])
    # max over the ball of <x, x - y> = |x|^2 + |x|, attained at y = -x
    assert rep.primal == pytest.approx(2.0, abs=1e-12)
    no_extra = minty_residuals(p, x_hat, 500, 1)
    assert 1.9 < no_extra.primal <= 2.0


def test_minty_rejects_infeasible(ball, vec):
    p = VIProblem(ResidualOperator(Affine.zero(2)), ball)
    with pytest.raises(PreconditionError):
        minty_residuals(p, vec(3, 0))


def test_extreme_points_included(vec):
    box = Box(vec(0, 0), vec(1, 1))
    p = VIProblem(ResidualOperator(Affine(np.eye(2), [-1, -1])), box)
    rep = minty_residuals(p, vec(0, 0), 10, 0)
    assert rep.samples == 14
    assert rep.primal == pytest.approx(0.0, abs=1e-15)


angles = st.floats(-math.pi, math.pi)


@settings(max_examples=40, deadline=None)
@given(angles, angles, st.floats(0, 1), st.integers(0, 1000), st.sampled_from(["ball", "box", "simplex"]))
def test_minty_dominance(t1, t2, w, seed, set_kind):
    s = Space.euclidean(2)
    M = {
        "ball": Ball(s.zeros(), 1.0),
        "box": Box(Element([-1, 0], s), Element([1, 2], s)),
        "simplex": Simplex.standard(2),
    }[set_kind]
    A = Averaged(Rotation(t1), Rotation(t2), w)
    L = ResidualOperator(A)
    assert check_monotone(L, M, 100, seed).min_pairing >= -1e-10
    p = VIProblem(L, M)
    rng = np.random.default_rng(seed)
    x_hat = M.project(Element(rng.normal(size=2), s))
    rep = minty_residuals(p, x_hat, 200, seed)
    assert rep.max_gap <= 1e-12
    assert rep.dual <= rep.primal + 1e-12


@pytest.mark.parametrize(
    "A",
    [Rotation(math.pi / 2), Rotation(0.3), Averaged(Rotation(2.0), Affine.zero(2), 0.5)],
    ids=["rot90", "rot0.3", "averaged"],
)
def test_reduction_to_fixed_point(ball, vec, A):
    p = VIProblem(ResidualOperator(A), ball)
    x_hat, rep = solve_vi_extragradient(p, vec(0.6, 0.6), CFG)
    minty = minty_residuals(p, x_hat, 300, 2, extra_points=[A(x_hat)])
    assert residual(A, x_hat) ** 2 <= minty.primal + 1e-10
    assert minty.primal <= 1e-8


def test_reduction_on_fredholm():
    prob = IntegralProblem.build(0, 1, 0.9, "exp(-(x-y)^2)", "sin(3*x)", n=16)
    A = FredholmOperator(prob)
    M = Ball(prob.space.zeros(), 5.0)
    p = VIProblem(ResidualOperator(A), M)
    x_hat, rep = solve_vi_extragradient(p, prob.space.zeros(), CFG)
    assert rep.converged
    minty = minty_residuals(p, x_hat, 300, 3, extra_points=[A(x_hat)])
    assert residual(A, x_hat) ** 2 <= minty.primal + 1e-10
    assert minty.max_gap <= 1e-12


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 2, 2.0, math.pi])
def test_agrees_with_km(ball, vec, theta):
    A = Rotation(theta)
    x0 = vec(0.5, -0.3)
    x_hat, _ = solve_vi_extragradient(VIProblem(ResidualOperator(A), ball), x0, CFG)
    km = krasnoselskii_mann(A, ball, x0, CFG)
    assert np.linalg.norm(x_hat.coords - km.final.coords) <= 1e-5


def test_iterates_stay_in_set(vec):
    box = Box(vec(0, 0), vec(1, 1))
    p = VIProblem(ResidualOperator(Rotation(math.pi / 6)), box)
    x = vec(1, 1)
    tau = 0.9 / p.lipschitz_bound
    for _ in range(50):
        y = box.project(x - tau * p.L(x))
        x = box.project(x - tau * p.L(y))
        assert contains(box, x, 1e-12) and contains(box, y, 1e-12)
    x_hat, _ = solve_vi_extragradient(p, vec(1, 1), CFG)
    assert contains(box, x_hat, 1e-12)
