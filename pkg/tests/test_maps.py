import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyent.errors import InputError
from polyent.maps import (
    check_map,
    iterate_orbit,
    limit_sets,
    make_circle_map,
    make_conjugate,
    make_interval_map,
    make_power,
    make_product,
    parse_system,
)

unit = st.floats(0.0, 1.0)


def test_square_basics():
    f = make_interval_map("square")
    assert f.forward((0.5,)) == (0.25,)
    assert set(f.declared_fixed) == {(0.0,), (1.0,)}
    assert make_interval_map("identity").forward((0.3,)) == (0.3,)


def test_north_south_fixes_exactly_its_declared_points():
    f = make_circle_map("north-south", [0.5])
    assert f.forward((0.0,)) == pytest.approx((0.0,), abs=1e-15)
    assert f.forward((0.5,)) == pytest.approx((0.5,), abs=1e-15)
    x = np.linspace(0.01, 0.49, 49)[:, None]
    assert np.all(np.abs(f.fwd(x) - x) > 0)


def test_rotation():
    f = make_circle_map("rotation", [1, 2])
    assert f.forward((0.25,)) == pytest.approx((0.75,))
    assert f.forward(f.forward((0.25,))) == pytest.approx((0.25,))
    assert f.period == 2


def test_power():
    f = make_interval_map("square")
    assert make_power(f, 2).forward((0.5,)) == (0.0625,)
    assert make_power(f, 1) is f
    r2 = make_power(make_circle_map("rotation", [1, 2]), 2)
    x = np.random.default_rng(0).random((100, 1))
    assert np.allclose(r2.fwd(x), x, atol=1e-15)
    assert r2.period == 1
    with pytest.raises(InputError):
        make_power(f, 0)


def test_product():
    sq, idm = make_interval_map("square"), make_interval_map("identity")
    assert make_product(sq, idm).forward((0.5, 0.3)) == (0.25, 0.3)
    ss = make_product(sq, sq)
    assert {(0, 0), (0, 1), (1, 0), (1, 1)} <= set(ss.declared_fixed)
    assert ss.forward((0.5, 0.5)) == (0.25, 0.25)


def test_conjugate_by_cube_is_square_again():
    f = make_interval_map("square")
    g = make_conjugate((lambda x: x ** 3, np.cbrt), f)
    x = np.linspace(0, 1, 101)[:, None]
    assert np.allclose(g.fwd(x), x ** 2, atol=1e-14)
    assert set(g.declared_fixed) == {(0.0,), (1.0,)}
    ident = make_conjugate((lambda x: x.copy(), lambda x: x.copy()), f)
    assert np.array_equal(ident.fwd(x), f.fwd(x))


def test_conjugate_rejects_non_homeomorphism():
    f = make_interval_map("square")
    with pytest.raises(InputError):
        make_conjugate((lambda x: x ** 2, lambda x: x), f)


def test_orbits():
    f = make_interval_map("square")
    assert iterate_orbit(f, (0.5,), 3).states == ((0.5,), (0.25,), (0.0625,))
    assert set(iterate_orbit(make_interval_map("identity"), (0.3,), 5).states) == {(0.3,)}
    r = make_circle_map("rotation", [1, 2])
    assert [s[0] for s in iterate_orbit(r, (0.0,), 4).states] == [0, 0.5, 0, 0.5]


def test_limit_sets():
    rep = limit_sets(make_interval_map("square"), (0.5,), horizon=200)
    assert rep.omega == ((0.0,),)
    assert len(rep.alpha) == 1 and rep.alpha[0][0] == pytest.approx(1.0, abs=1e-12)
    rep = limit_sets(make_interval_map("identity"), (0.3,), horizon=20)
    assert rep.omega == rep.alpha == ((0.3,),)
    rep = limit_sets(make_circle_map("rotation", [1, 3]), (0.0,), horizon=30)
    assert [p[0] for p in rep.omega] == pytest.approx([0, 1 / 3, 2 / 3])


def test_parse_system():
    assert parse_system("square").label == "square"
    assert parse_system("rotation:1/3").period == 3
    assert parse_system("square^2").forward((0.5,)) == (0.0625,)
    assert parse_system("square*north-south").space.dimension == 2
    with pytest.raises(InputError):
        parse_system("tent")
    with pytest.raises(InputError):
        parse_system("power:1")


@pytest.mark.parametrize("name", ["square", "sqrt", "power:3", "three-fixed", "identity",
                                  "north-south:0.3", "rotation:2/5", "circle-identity"])
def test_catalog_round_trips(name):
    check_map(parse_system(name), probes=2000, seed=5)


@given(unit)
def test_square_orbits_are_monotone(x):
    f = make_interval_map("square")
    states = [s[0] for s in iterate_orbit(f, (x,), 10).states]
    assert all(a >= b for a, b in zip(states, states[1:]))
