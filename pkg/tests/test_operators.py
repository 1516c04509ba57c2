import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkmfix.convex import Ball, Box
from kkmfix.fredholm import FredholmOperator, IntegralProblem, kernel_l2_norm
from kkmfix.operators import (
    Affine,
    Averaged,
    Composed,
    FunctionOperator,
    ResidualOperator,
    Rotation,
    Scaled,
    check_hemicontinuous,
    check_monotone,
    check_nonexpansive,
)
from kkmfix.space import Element, Space


@pytest.fixture
def ball(e2):
    return Ball(e2.zeros(), 1.0)


def test_identity_ratio_is_one(ball):
    rep = check_nonexpansive(Affine.identity(2), ball, 1000, 0)
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)
    assert not rep.expansive


def test_rotation_is_isometry(ball):
    rep = check_nonexpansive(Rotation(math.pi / 3), ball, 1000, 1)
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)


def test_shear_flagged_expansive(ball):
    B = np.array([[1.0, 1.0], [0.0, 1.0]])
    rep = check_nonexpansive(Affine(B), ball, 1000, 2)
    # largest singular value from the eigenvalues of the Gram matrix
    sigma_max = math.sqrt(max(np.linalg.eigvalsh(B.T @ B)))
    assert sigma_max == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)
    assert rep.expansive
    assert 1 + 1e-9 < rep.max_ratio <= sigma_max + 1e-12
    x, y = rep.witness
    assert rep.max_ratio == pytest.approx(
        np.linalg.norm(B @ (x.coords - y.coords)) / np.linalg.norm(x.coords - y.coords)
    )


def test_monotone_zero_map(ball):
    rep = check_monotone(ResidualOperator(Affine.zero(2)), ball, 500, 3)
    x, y = rep.witness
    assert rep.min_pairing >= 0
    assert rep.min_pairing == pytest.approx(np.sum((x.coords - y.coords) ** 2))
    assert rep.min_normalized == pytest.approx(1.0)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 2, 2.0, math.pi])
def test_monotone_rotation_closed_form(ball, theta):
    L = ResidualOperator(Rotation(theta))
    rep = check_monotone(L, ball, 500, 4)
    assert rep.min_pairing >= 0
    assert rep.min_normalized == pytest.approx(1 - math.cos(theta), abs=1e-12)
    # direct evaluation of the expansion on one pair
    x, y = rep.witness
    d = x.coords - y.coords
    assert rep.min_pairing == pytest.approx((1 - math.cos(theta)) * d @ d, abs=1e-14)


def test_expansive_map_not_monotone(ball):
    rep = check_monotone(ResidualOperator(Scaled(Affine.identity(2), 2.0)), ball, 200, 5)
    assert rep.min_pairing < 0
    assert not rep.monotone


def test_residual_operator_exact(e2):
    rng = np.random.default_rng(0)
    A = Averaged(Rotation(0.7), Affine(rng.normal(size=(2, 2)), [0.3, -1]), 0.4)
    L = ResidualOperator(A)
    for _ in range(20):
        x = Element(rng.normal(size=2), e2)
        np.testing.assert_allclose(L(x).coords + A(x).coords, x.coords, rtol=0, atol=4e-16 * (1 + np.abs(A(x).coords).max()))


def test_composed_order(e2):
    shift = Affine(np.eye(2), [1, 0])
    double = Scaled(Affine.identity(2), 2.0)
    x = Element([1, 1], e2)
    np.testing.assert_array_equal(Composed([shift, double])(x).coords, [4, 2])
    np.testing.assert_array_equal(Composed([double, shift])(x).coords, [3, 2])


def test_rotation_in_plane():
    s = Space.euclidean(3)
    R = Rotation(math.pi / 2, dim=3, plane=(0, 2))
    np.testing.assert_allclose(R(Element([1, 5, 0], s)).coords, [0, 5, 1], atol=1e-15)


def test_hemicontinuity_affine(e2):
    B = np.array([[2.0, 1.0], [0.0, -1.0]])
    L = ResidualOperator(Affine(B))
    d = Element([1, 1], e2)
    ts = [10.0**-k for k in range(1, 9)]
    rep = check_hemicontinuous(L, Element([0.1, 0.2], e2), d, ts)
    slope = np.linalg.norm((np.eye(2) - B) @ d.coords)
    np.testing.assert_allclose(rep.deviations, slope * np.array(ts), rtol=1e-6)
    assert rep.continuous


def test_hemicontinuity_fredholm():
    p = IntegralProblem.build(0, 1, 0.8, "exp(-(x-y)^2)", "sin(x)", n=16)
    L = ResidualOperator(FredholmOperator(p))
    u = p.element("x")
    d = p.element("cos(3*x)")
    rep = check_hemicontinuous(L, u, d)
    # ||L(u + t d) - L(u)|| <= (1 + |lambda| ||K||) t ||d||
    C = (1 + abs(p.lam) * kernel_l2_norm(p.kernel, p.grid)) * p.space.norm_coords(d.coords)
    assert all(dev <= C * t * (1 + 1e-12) for dev, t in zip(rep.deviations, rep.t_values))
    assert rep.continuous


def test_hemicontinuity_step_map():
    s = Space.euclidean(1)
    step = FunctionOperator(lambda x: np.where(x <= 0, 0.0, 1.0))
    L = ResidualOperator(FunctionOperator(lambda x: x - step._apply(x)))
    rep = check_hemicontinuous(L, Element([0.0], s), Element([1.0], s))
    assert all(dev == pytest.approx(1.0) for dev in rep.deviations)
    assert not rep.continuous


def test_hemicontinuity_projects_into_domain(e2):
    box = Box(Element([0, 0], e2), Element([1, 1], e2))
    L = ResidualOperator(Affine.zero(2))
    rep = check_hemicontinuous(L, Element([1, 1], e2), Element([1, 0], e2), [0.1, 0.01], M=box)
    assert rep.deviations == [0.0, 0.0]


def test_bad_t_sequence(e2):
    L = ResidualOperator(Affine.zero(2))
    with pytest.raises(ValueError):
        check_hemicontinuous(L, e2.zeros(), e2.zeros(), [0.1, 0.2])


angles = st.floats(-math.pi, math.pi)


@st.composite
def nonexpansive_maps(draw):
    kind = draw(st.sampled_from(["rotation", "averaged", "scaled", "composed"]))
    if kind == "rotation":
        return Rotation(draw(angles))
    if kind == "averaged":
        return Averaged(Rotation(draw(angles)), Rotation(draw(angles)), draw(st.floats(0, 1)))
    if kind == "scaled":
        return Scaled(Rotation(draw(angles)), draw(st.floats(0, 1)))
    return Composed([Rotation(draw(angles)) for _ in range(draw(st.integers(1, 4)))])


@settings(max_examples=60, deadline=None)
@given(nonexpansive_maps(), st.integers(0, 10_000))
def test_nonexpansive_implies_monotone(A, seed):
    ball = Ball(Space.euclidean(2).zeros(), 1.0)
    assert check_nonexpansive(A, ball, 200, seed).max_ratio <= 1 + 1e-9
    assert check_monotone(ResidualOperator(A), ball, 200, seed).min_pairing >= -1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), angles, st.integers(0, 10_000))
def test_scaled_ratio_bounded_by_factor(c, theta, seed):
    ball = Ball(Space.euclidean(2).zeros(), 1.0)
    rep = check_nonexpansive(Scaled(Rotation(theta), c), ball, 200, seed)
    assert rep.max_ratio <= c + 1e-9


@pytest.mark.parametrize("kernel", ["x*y", "1", "sin(x+y)", "exp(-abs(x-y))"])
def test_fredholm_nonexpansive_and_monotone(kernel):
    base = IntegralProblem.build(0, 1, 1.0, kernel, "x", n=16)
    lam = 1.0 / kernel_l2_norm(base.kernel, base.grid)
    p = IntegralProblem(0.0, 1.0, lam, base.kernel, "x", base.grid)
    A = FredholmOperator(p)
    assert A.claimed_lipschitz == pytest.approx(1.0, abs=1e-12)
    M = Ball(p.space.zeros(), 2.0)
    assert check_nonexpansive(A, M, 300, 9).max_ratio <= 1 + 1e-9
    assert check_monotone(ResidualOperator(A), M, 300, 9).min_pairing >= -1e-10


def test_negative_lipschitz_rejected():
    with pytest.raises(ValueError):
        Affine(np.eye(2), claimed_lipschitz=-1)
