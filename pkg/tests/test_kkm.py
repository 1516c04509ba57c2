import itertools
import math

import numpy as np
import pytest

from kkmfix.errors import SizeError
from kkmfix.kkm import (
    SetValuedMap,
    barycentric_grid,
    build_p_mapping,
    canonical_cover,
    check_kkm_covering,
    find_intersection,
    threshold_cover,
    whole_hull_cover,
)
from kkmfix.operators import Affine, Averaged, ResidualOperator, Rotation, Scaled, check_monotone
from kkmfix.convex import Ball
from kkmfix.space import Element, Space

E2 = Space.euclidean(2)
DIAMOND = [Element(v, E2) for v in ((1, 0), (0, 1), (-1, 0), (0, -1))]


@pytest.mark.parametrize("m,n", [(1, 1), (5, 2), (20, 3), (7, 5), (4, 8)])
def test_grid_cardinality(m, n):
    W = barycentric_grid(m, n + 1)
    assert len(W) == math.comb(m + n, n)
    np.testing.assert_allclose(W.sum(axis=1), 1.0)
    assert np.all(W >= 0)
    assert len({tuple(w) for w in W}) == len(W)


def test_canonical_cover_passes():
    rep = check_kkm_covering(canonical_cover(2), 20, 1e-9)
    assert rep.covering_ok and rep.violations == []
    assert rep.faces_checked == 7


def test_canonical_cover_exhaustive_oracle():
    # on a face S the coordinates outside S vanish, so the largest coordinate in S is >= 1/|S|
    m, n = 20, 2
    for size in range(1, n + 2):
        for S in itertools.combinations(range(n + 1), size):
            for k in itertools.product(range(m + 1), repeat=size):
                if sum(k) != m:
                    continue
                assert max(k) / m >= 1 / (n + 1) - 1e-12


def test_whole_hull():
    kmap = whole_hull_cover(np.eye(3))
    rep = check_kkm_covering(kmap, 10)
    assert rep.covering_ok
    w = find_intersection(kmap, 10)
    assert w.found and w.max_defect == 0
    np.testing.assert_array_equal(w.point, [1, 0, 0])


def test_threshold_negative_control():
    kmap = threshold_cover(1, 0.99)
    rep = check_kkm_covering(kmap, 20, 1e-9)
    assert not rep.covering_ok
    assert any(S == (0, 1) and np.allclose(z, [0.5, 0.5]) for S, z in rep.violations)
    w = find_intersection(kmap, 20, 1e-9)
    assert not w.found
    np.testing.assert_allclose(w.point, [0.5, 0.5])
    assert w.max_defect == pytest.approx(0.49)


def test_violations_sorted():
    rep = check_kkm_covering(threshold_cover(2, 0.9), 10, 0.0)
    faces = [S for S, _ in rep.violations]
    assert faces == sorted(faces, key=lambda S: (len(S), S))


def test_canonical_intersection_is_barycenter():
    w = find_intersection(canonical_cover(2), 30, 1e-12)
    assert w.found and w.max_defect <= 1e-12
    np.testing.assert_allclose(w.point, [1 / 3] * 3, atol=1e-15)


def test_p_mapping_zero_field():
    kmap = build_p_mapping(ResidualOperator(Affine.identity(2)), DIAMOND)
    rep = check_kkm_covering(kmap, 10, 0.0)
    assert rep.covering_ok
    assert rep.intersection_witness.max_defect == 0


def test_p_mapping_identity_is_disc():
    rng = np.random.default_rng(0)
    angles = rng.uniform(0, 2 * np.pi, 5)
    anchors = [Element([math.cos(t), math.sin(t)], E2) for t in angles]
    kmap = build_p_mapping(ResidualOperator(Affine.zero(2)), anchors)
    for _ in range(500):
        z = rng.uniform(-1, 1, 2)
        for i, a in enumerate(anchors):
            # completing the square: |z|^2 <= <z, y>  <=>  |z - y/2| <= |y|/2
            in_disc = np.linalg.norm(z - a.coords / 2) <= np.linalg.norm(a.coords) / 2
            if abs(np.linalg.norm(z - a.coords / 2) - 0.5) > 1e-9:
                assert kmap.member(i, z, 0.0) == in_disc
    w = find_intersection(kmap, 20, 1e-9)
    assert np.linalg.norm(w.point) <= 0.1


def test_p_mapping_rotation_covering_and_witness():
    kmap = build_p_mapping(ResidualOperator(Rotation(math.pi / 2)), DIAMOND)
    rep = check_kkm_covering(kmap, 20, 1e-8)
    assert rep.covering_ok
    w = rep.intersection_witness
    assert w.found
    assert np.linalg.norm(w.point) <= 2 / 20


def test_member_tolerance_monotone():
    kmap = build_p_mapping(ResidualOperator(Rotation(1.0)), DIAMOND)
    rng = np.random.default_rng(1)
    for _ in range(200):
        z = rng.uniform(-1, 1, 2)
        for i in range(4):
            if kmap.member(i, z, 0.0):
                assert kmap.member(i, z, 1e-3)


def test_size_limit():
    kmap = whole_hull_cover(np.eye(10))
    with pytest.raises(SizeError):
        check_kkm_covering(kmap, 2)
    with pytest.raises(SizeError):
        find_intersection(kmap, 2)


def test_needs_two_anchors():
    with pytest.raises(ValueError):
        SetValuedMap(np.eye(1)[:1], lambda i, z, t: True)


MONOTONE_SUITE = [
    ("L = I", Affine.zero(2)),
    ("L = 0", Affine.identity(2)),
    ("rotation pi/2", Rotation(math.pi / 2)),
    ("rotation 2.5", Rotation(2.5)),
    ("averaged", Averaged(Rotation(1.0), Rotation(-2.0), 0.3)),
    ("scaled", Scaled(Rotation(0.7), 0.5)),
]


@pytest.mark.parametrize("name,A", MONOTONE_SUITE, ids=[n for n, _ in MONOTONE_SUITE])
def test_p_mapping_is_kkm_for_monotone_fields(name, A):
    L = ResidualOperator(A)
    assert check_monotone(L, Ball(E2.zeros(), 1.0), 200, 0).monotone
    kmap = build_p_mapping(L, DIAMOND)
    assert check_kkm_covering(kmap, 20, 1e-8, find_witness=False).covering_ok
    # every field here vanishes at the origin, which is a grid point of the diamond
    w = find_intersection(kmap, 40, 1e-6)
    assert w.found and w.max_defect <= 1e-6


def test_p_mapping_with_random_anchors():
    rng = np.random.default_rng(4)
    anchors = [Element(v, E2) for v in rng.uniform(-1, 1, (4, 2))]
    kmap = build_p_mapping(ResidualOperator(Rotation(0.9)), anchors)
    assert check_kkm_covering(kmap, 20, 1e-8, find_witness=False).covering_ok


@pytest.mark.parametrize("n", [1, 2, 3])
def test_canonical_intersection_desk_scale(n):
    kmap = canonical_cover(n)
    assert check_kkm_covering(kmap, 12, 1e-9, find_witness=False).covering_ok
    # the barycenter is on the grid when m is a multiple of n + 1
    w = find_intersection(kmap, 40 - 40 % (n + 1), 1e-6)
    assert w.found and w.max_defect <= 1e-6
