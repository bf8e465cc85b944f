import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyent.errors import InputError, ResourceError
from polyent.hyperspace import (
    FinSet,
    apply_product,
    distinct_tuple_grid,
    fixed_sets_of_induced,
    hausdorff_array,
    hausdorff_distance,
    hyper_grid,
    induced_map_F,
    project_pi,
)
from polyent.maps import make_circle_map, make_interval_map
from polyent.spaces import CIRCLE, INTERVAL, build_grid

unit = st.floats(0.0, 1.0)
finsets = st.lists(st.tuples(unit), min_size=1, max_size=4).map(lambda pts: FinSet.of(pts, 4))


def S(*xs, n=None):
    return FinSet.of([(x,) for x in xs], n)


def brute_hausdorff(A, B):
    # straight from the definition, no vectorization
    da = max(min(abs(a[0] - b[0]) for b in B) for a in A)
    db = max(min(abs(a[0] - b[0]) for a in A) for b in B)
    return max(da, db)


@pytest.mark.parametrize("A,B,want", [
    (S(0), S(1), 1.0),
    (S(0, 1), S(0), 1.0),
    (S(0, 0.5), S(0.25, 0.75), 0.25),
])
def test_hausdorff_examples(A, B, want):
    assert hausdorff_distance(INTERVAL, A, B) == want


@given(finsets, finsets)
def test_hausdorff_matches_definition(A, B):
    assert hausdorff_distance(INTERVAL, A, B) == brute_hausdorff(A, B)


@given(finsets, finsets, finsets)
def test_hausdorff_triangle(A, B, C):
    d = lambda X, Y: hausdorff_distance(INTERVAL, X, Y)
    assert d(A, C) <= d(A, B) + d(B, C) + 1e-12


def test_padded_array_ignores_repeats():
    a = np.array([[0.0], [0.5], [0.5]])
    b = np.array([[0.25], [0.75]])
    assert hausdorff_array(a, b, (False,)) == 0.25


def test_finset_canonical_form():
    assert S(0.2, 0.1, 0.2).elements == ((0.1,), (0.2,))
    with pytest.raises(InputError):
        FinSet(((0.2,), (0.1,)), 2)
    with pytest.raises(InputError):
        FinSet.of([(0.1,), (0.2,), (0.3,)], 2)


def test_induced_map():
    f = make_interval_map("square")
    assert induced_map_F(f, S(0, 1)) == S(0, 1)
    img = induced_map_F(f, S(0.5, 0.6))
    assert [p[0] for p in img] == pytest.approx([0.25, 0.36])
    A = S(0.1, 0.7, n=3)
    assert induced_map_F(make_interval_map("identity"), A) == A


def test_project_pi():
    assert project_pi([(0.5,), (0.5,)]) == S(0.5, n=2)
    assert project_pi([(0.2,), (0.1,)]) == S(0.1, 0.2)
    assert project_pi([(0.0,), (1.0,), (0.0,)]) == S(0, 1, n=3)


@given(st.lists(st.tuples(unit), min_size=1, max_size=4))
def test_semiconjugacy(t):
    f = make_interval_map("sqrt")
    assert project_pi(apply_product(f, t)) == induced_map_F(f, project_pi(t))


def test_grid_sizes():
    base = build_grid(INTERVAL, 0.25)
    assert len(hyper_grid(base, 2)) == 15
    assert len(hyper_grid(base, 1)) == 5
    assert len(distinct_tuple_grid(base, 2)) == 20
    three = build_grid(INTERVAL, 0.5)
    tuples = distinct_tuple_grid(three, 3)
    assert len(tuples) == 6
    assert all(len(set(t)) == len(t) for t in tuples)


def test_hyper_grid_is_a_net(rng):
    base = build_grid(INTERVAL, 1 / 16)
    grid = hyper_grid(base, 2)
    for _ in range(1000):
        A = FinSet.of(rng.random((int(rng.integers(1, 3)), 1)), 2)
        snapped = FinSet.of([base.points[int(np.argmin(np.abs(np.array(base.points)[:, 0] - p[0])))] for p in A], 2)
        assert snapped in set(grid.members)
        assert hausdorff_distance(INTERVAL, A, snapped) <= 1 / 16


def test_cap(monkeypatch):
    base = build_grid(INTERVAL, 0.1)
    with pytest.raises(ResourceError):
        hyper_grid(base, 2, cap=10)
    monkeypatch.setenv("POLYENT_CAP", "5")
    with pytest.raises(ResourceError) as err:
        distinct_tuple_grid(base, 2)
    assert err.value.required == 110


def test_fixed_sets():
    f = make_interval_map("square")
    grid = hyper_grid(build_grid(INTERVAL, 0.25), 2)
    assert set(fixed_sets_of_induced(f, grid)) == {S(0, n=2), S(1, n=2), S(0, 1, n=2)}
    ident = make_interval_map("identity")
    assert len(fixed_sets_of_induced(ident, grid)) == len(grid)
    rot = make_circle_map("rotation", [1, 2])
    assert fixed_sets_of_induced(rot, hyper_grid(build_grid(CIRCLE, 0.25), 1)) == []
