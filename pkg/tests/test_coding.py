import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyent.entropy import Y_INF, CodingFamily, box_letter, code_orbit, transit_cloud, word_census
from polyent.errors import InputError
from polyent.maps import parse_system

SQ = parse_system("square")
K = CodingFamily((box_letter("K", [(0.2, 0.3)]),))


def brute_census(f, starts, N, family):
    words = set()
    for x in starts:
        words.update(code_orbit(f, x, N, family))
    return len(words)


def test_code_orbit_example():
    assert code_orbit(SQ, (0.25,), 3, K) == [("K", Y_INF, Y_INF)]


def test_orbit_missing_every_letter():
    assert code_orbit(SQ, (0.01,), 5, K) == [(Y_INF,) * 5]


def test_disjoint_letters_give_one_coding():
    fam = CodingFamily((box_letter("A", [(0.2, 0.3)]), box_letter("B", [(0.5, 0.6)])))
    for x in np.linspace(0.01, 0.99, 50):
        assert len(code_orbit(SQ, (x,), 8, fam)) == 1


def test_overlapping_letters_branch():
    fam = CodingFamily((box_letter("A", [(0.2, 0.5)]), box_letter("B", [(0.4, 0.6)])))
    words = code_orbit(SQ, (0.45,), 2, fam)
    assert sorted(words) == [("A", "A"), ("B", "A")]


def test_letters_must_avoid_fixed_points():
    with pytest.raises(InputError):
        code_orbit(SQ, (0.5,), 3, CodingFamily((box_letter("K", [(0.9, 1.0)]),)))
    with pytest.raises(InputError):
        code_orbit(parse_system("identity"), (0.5,), 3, K)
    with pytest.raises(InputError):
        box_letter(Y_INF, [(0.2, 0.3)])
    with pytest.raises(InputError):
        CodingFamily((box_letter("K", [(0.2, 0.3)]), box_letter("K", [(0.5, 0.6)])))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.001, 0.999), min_size=1, max_size=30), st.integers(1, 12))
def test_census_matches_brute_force(xs, N):
    fam = CodingFamily((box_letter("A", [(0.2, 0.5)]), box_letter("B", [(0.4, 0.6)])))
    census = word_census(SQ, [(x,) for x in xs], [N], fam)
    assert census.counts == ((N, brute_census(SQ, [(x,) for x in xs], N, fam)),)


def test_single_letter_census_is_linear():
    census = word_census(SQ, transit_cloud(SQ, 1 / 64, 64), [4, 8, 16, 32, 64], K)
    assert [c for _, c in census.counts] == [n + 1 for n in (4, 8, 16, 32, 64)]
    assert 0.75 <= census.slope <= 1.25


def test_empty_family_is_flat():
    census = word_census(SQ, transit_cloud(SQ, 1 / 32, 32), [4, 8, 16, 32], CodingFamily(()))
    assert all(c == 1 for _, c in census.counts)
    assert census.slope == 0.0
    assert census.alphabet_size == 1


def test_product_census_is_quadratic():
    f = parse_system("square*square")
    fam = CodingFamily((box_letter("A", [(0.2, 0.3), (0, 1)]), box_letter("B", [(0, 1), (0.2, 0.3)])))
    census = word_census(f, transit_cloud(f, 1 / 8, 64), [4, 8, 16, 32, 64], fam)
    assert 1.5 <= census.slope <= 2.5


def test_census_needs_horizon():
    with pytest.raises(InputError):
        word_census(SQ, transit_cloud(SQ, 1 / 8, 8), [16], K)
