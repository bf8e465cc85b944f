import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyent.errors import InputError, InvariantError
from polyent.hyperspace import FinSet, hyper_grid
from polyent.maps import make_circle_map, make_interval_map
from polyent.spaces import CIRCLE, INTERVAL, build_grid
from polyent.suspension import (
    SuspPoint,
    chebyshev_radius,
    collapsed_point,
    dist_to_Fm,
    fixed_points_of_induced_S,
    induced_map_S,
    iterate_identity_check,
    quotient_q,
    set_partitions,
    susp_distance,
    susp_grid,
)

unit = st.floats(0.0, 1.0)


def S(*xs, n=None):
    return FinSet.of([(x,) for x in xs], n)


def C(*xs, n=None, m=1):
    return quotient_q(S(*xs, n=n), m, INTERVAL, n)


def brute_dist_to_Fm(points, m, periodic=False, steps=400):
    # min over center sets on a fine grid of the Hausdorff distance to them
    centers = np.arange(steps + (0 if periodic else 1)) / steps
    best = np.inf
    for k in range(1, m + 1):
        for cs in itertools.combinations(centers, k):
            def d(a, c):
                x = abs(a - c)
                return min(x, 1 - x) if periodic else x
            h = max(max(min(d(a, c) for c in cs) for a in points), max(min(d(a, c) for a in points) for c in cs))
            best = min(best, h)
    return best


def test_dist_to_Fm_examples():
    assert dist_to_Fm(INTERVAL, S(0.7), 1) == 0.0
    assert dist_to_Fm(INTERVAL, S(0, 1), 1) == 0.5
    assert dist_to_Fm(INTERVAL, S(0, 0.1, 1), 2) == pytest.approx(0.05)
    assert brute_dist_to_Fm([0, 1], 1) == 0.5
    assert brute_dist_to_Fm([0, 0.1, 1], 2) == pytest.approx(0.05)


def test_circle_radius_uses_short_arc():
    assert chebyshev_radius(CIRCLE, [(0.9,), (0.1,)]) == pytest.approx(0.1)
    assert dist_to_Fm(CIRCLE, FinSet.of([(0.0,), (1 / 3,), (2 / 3,)]), 1) == pytest.approx(1 / 3)


@given(st.lists(unit, min_size=2, max_size=4, unique=True), st.integers(1, 2))
def test_dist_to_Fm_against_brute_force(xs, m):
    got = dist_to_Fm(INTERVAL, S(*xs), m)
    want = brute_dist_to_Fm(xs, m, steps=100)
    assert got <= want + 1e-12
    assert want - got <= 1 / 100


def test_partitions_are_bell_numbers():
    assert sum(1 for _ in set_partitions(4, 4)) == 15
    assert sum(1 for _ in set_partitions(4, 2)) == 8
    assert sum(1 for _ in set_partitions(3, 1)) == 1


def test_susp_distance_examples():
    X = collapsed_point(INTERVAL, 2)
    assert susp_distance(X, X) == 0
    assert susp_distance(C(0, 1), X) == 0.5
    assert susp_distance(C(0, 0.5), C(0.4, 0.9)) == pytest.approx(0.4)


def test_collapse_shortcut_is_used():
    # d_H = 0.8, but both classes are 0.05 from F_1
    assert susp_distance(C(0, 0.1), C(0.9, 1.0)) == pytest.approx(0.1)


def test_quotient():
    assert quotient_q(S(0.3), 1, INTERVAL, 2).collapsed
    assert quotient_q(S(0, 1), 1, INTERVAL).payload == S(0, 1)
    assert not quotient_q(S(0, 0.5, 1), 2, INTERVAL).collapsed
    with pytest.raises(InputError):
        SuspPoint(INTERVAL, 1, 2, S(0.3, n=2))
    with pytest.raises(InputError):
        collapsed_point(INTERVAL, 2, 2)


def test_induced_map_S():
    sq = make_interval_map("square")
    X = collapsed_point(INTERVAL, 2)
    assert induced_map_S(sq, X) == X
    img = induced_map_S(sq, C(0.5, 0.6))
    assert [p[0] for p in img.payload] == pytest.approx([0.25, 0.36])
    assert induced_map_S(make_interval_map("identity"), C(0.2, 0.4)) == C(0.2, 0.4)


def test_merging_is_reported():
    sq = make_interval_map("square")
    tiny = C(1e-200, 2e-200)
    with pytest.raises(InvariantError):
        induced_map_S(sq, tiny)


def test_susp_grid_sizes():
    five = build_grid(INTERVAL, 0.25)
    assert len(susp_grid(hyper_grid(five, 2), 1)) == 11
    assert len(susp_grid(hyper_grid(build_grid(INTERVAL, 1 / 3), 2), 1)) == 7
    grid = susp_grid(hyper_grid(five, 3), 2)
    assert len(grid) == 11
    assert grid.members[0].collapsed


def test_iterate_identity():
    sq = make_interval_map("square")
    probe = C(0.5, 0.6)
    assert iterate_identity_check(sq, 2, [probe, collapsed_point(INTERVAL, 2)])
    lhs = induced_map_S(sq, induced_map_S(sq, probe))
    assert [p[0] for p in lhs.payload] == pytest.approx([0.0625, 0.1296])
    assert iterate_identity_check(make_circle_map("north-south"), 3,
                                  [quotient_q(FinSet.of([(0.1,), (0.7,)]), 1, CIRCLE)])
    assert iterate_identity_check(sq, 1, [probe])


@given(st.lists(unit, min_size=1, max_size=3), st.lists(unit, min_size=1, max_size=3),
       st.lists(unit, min_size=1, max_size=3))
def test_collapse_metric_triangle(a, b, c):
    p, q, r = (quotient_q(S(*x, n=3), 1, INTERVAL, 3) for x in (a, b, c))
    assert susp_distance(p, r) <= susp_distance(p, q) + susp_distance(q, r) + 1e-12
    assert susp_distance(p, q) == susp_distance(q, p)


def test_fixed_points_of_SF2():
    sq = make_interval_map("square")
    grid = susp_grid(hyper_grid(build_grid(INTERVAL, 1 / 8), 2), 1)
    assert fixed_points_of_induced_S(sq, grid) == [collapsed_point(INTERVAL, 2), C(0, 1, n=2)]
