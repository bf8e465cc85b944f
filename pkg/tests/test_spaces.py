import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyent.errors import InputError
from polyent.spaces import (
    CIRCLE,
    INTERVAL,
    base_distance,
    build_grid,
    coord_distance,
    make_point,
    nearest_grid_distance,
    power_space,
    product_space,
)

unit = st.floats(0.0, 1.0)
circ = st.floats(0.0, 1.0, exclude_max=True)


@pytest.mark.parametrize("space,p,q,want", [
    (INTERVAL, (0.0,), (1.0,), 1.0),
    (CIRCLE, (0.0,), (0.5,), 0.5),
    (CIRCLE, (0.1,), (0.9,), 0.2),
])
def test_base_distance_examples(space, p, q, want):
    assert base_distance(space, p, q) == pytest.approx(want, abs=1e-15)


def test_product_distance_is_max_metric():
    sq = product_space([INTERVAL, INTERVAL])
    assert sq.dimension == 2
    assert base_distance(sq, (0, 0), (1, 0.5)) == 1.0
    assert base_distance(sq, (0.1, 0.1), (0.2, 0.4)) == pytest.approx(0.3)


def test_grid_sizes():
    assert [p[0] for p in build_grid(INTERVAL, 0.25).points] == [0, 0.25, 0.5, 0.75, 1]
    assert [p[0] for p in build_grid(CIRCLE, 0.25).points] == [0, 0.25, 0.5, 0.75]
    assert len(build_grid(product_space([INTERVAL, INTERVAL]), 0.5)) == 9


def test_grid_is_a_half_mesh_net(rng):
    for space in (INTERVAL, CIRCLE, product_space([INTERVAL, CIRCLE])):
        grid = build_grid(space, 0.1)
        probes = rng.random((500, space.dimension))
        assert nearest_grid_distance(grid, probes).max() <= 0.05 + 1e-12


def test_bad_inputs():
    with pytest.raises(InputError):
        base_distance(INTERVAL, (0.0, 1.0), (0.0,))
    with pytest.raises(InputError):
        build_grid(INTERVAL, 0.0)
    with pytest.raises(InputError):
        product_space([INTERVAL])
    with pytest.raises(InputError):
        make_point(INTERVAL, (1.5,))


def test_make_point_wraps_circle():
    assert make_point(CIRCLE, (1.25,)) == (0.25,)
    assert make_point(CIRCLE, (-1e-18,)) == (0.0,)


def test_power_space():
    assert power_space(CIRCLE, 1) is CIRCLE
    assert power_space(CIRCLE, 3).periodic == (True, True, True)


@given(circ, circ, circ)
def test_circle_metric_axioms(x, y, z):
    d = lambda a, b: base_distance(CIRCLE, (a,), (b,))
    assert d(x, x) == 0
    assert d(x, y) == d(y, x)
    assert 0 <= d(x, y) <= 0.5
    assert d(x, z) <= d(x, y) + d(y, z) + 1e-12


@given(st.lists(st.tuples(unit, circ), min_size=3, max_size=3))
def test_vectorized_matches_scalar(pts):
    space = product_space([INTERVAL, CIRCLE])
    a = np.array(pts)
    vec = coord_distance(a[:, None, :], a[None, :, :], space.periodic)
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            assert math.isclose(vec[i, j], base_distance(space, p, q), abs_tol=1e-15)
