import itertools
import json
import math

import pytest
from hypothesis import given, strategies as st

from symgamma.errors import InvalidDimension, InvalidPartition
from symgamma.partitions import (
    BasisWindow,
    Exponent,
    Side,
    StrictPartition,
    antisymmetrize_exponent,
    enumerate_window,
    orbit_of_exponent,
    permutation_sign,
    staircase,
)


def entries(window):
    return [p.entries for p in window]


def test_small_windows():
    assert entries(enumerate_window(2, 2, "analytic")) == [(1, 0), (2, 0), (2, 1)]
    assert entries(enumerate_window(3, 2, Side.ANALYTIC)) == [(2, 1, 0)]
    assert set(entries(enumerate_window(2, 1, "laurent"))) == {(1, 0), (1, -1), (0, -1)}


def test_coanalytic_is_complement():
    lau = set(entries(enumerate_window(3, 3, "laurent")))
    ana = set(entries(enumerate_window(3, 3, "analytic")))
    co = set(entries(enumerate_window(3, 3, "coanalytic")))
    assert co == lau - ana and not co & ana
    assert all(p[-1] <= -1 for p in co)


def test_dimension_errors():
    with pytest.raises(InvalidDimension):
        enumerate_window(1, 3)
    with pytest.raises(InvalidPartition):
        StrictPartition((1, 1))
    with pytest.raises(InvalidPartition):
        Exponent((0, 1))


def test_antisymmetrize_examples():
    assert antisymmetrize_exponent((2, 0)) == (StrictPartition((2, 0)), 1)
    assert antisymmetrize_exponent((0, 2)) == (StrictPartition((2, 0)), -1)
    assert antisymmetrize_exponent((1, 1)) is None


def test_orbit_examples():
    assert sorted(orbit_of_exponent(Exponent((1, 0)))) == [(0, 1), (1, 0)]
    assert orbit_of_exponent((1, 1)) == [(1, 1), (1, 1)]
    assert len(set(orbit_of_exponent((2, 1, 0)))) == 6


def test_window_json_round_trip():
    w = enumerate_window(3, 4, "laurent")
    data = json.loads(w.to_json())
    assert set(data) == {"n", "D", "side", "partitions"}
    back = BasisWindow.from_json(w.to_json())
    assert back == w and back.partitions == w.partitions
    data["partitions"] = data["partitions"][::-1]
    with pytest.raises(InvalidPartition):
        BasisWindow.from_dict(data)


def test_margins():
    w = enumerate_window(2, 4, "laurent")
    assert w.margin(StrictPartition((4, 0))) == 0
    assert w.margin(StrictPartition((1, -3))) == 1
    ana = enumerate_window(2, 4)
    assert ana.margin(StrictPartition((1, 0))) == 3
    assert staircase(3).entries == (2, 1, 0)


@given(st.integers(2, 4), st.integers(0, 6), st.sampled_from(list(Side)))
def test_window_size_order_and_idempotence(n, D, side):
    w = enumerate_window(n, D, side)
    assert len(w) == w.expected_size()
    keys = [(p[0], p.entries) for p in w]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    assert enumerate_window(n, D, side).partitions == w.partitions
    low = 0 if side is Side.ANALYTIC else -D
    for p in w:
        assert p[0] <= D and p[-1] >= low


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=4), st.data())
def test_antisymmetrize_sign_equivariance(t, data):
    perm = data.draw(st.permutations(range(len(t))))
    base = antisymmetrize_exponent(t)
    moved = antisymmetrize_exponent([t[i] for i in perm])
    if base is None:
        assert moved is None
    else:
        assert moved == (base[0], permutation_sign(perm) * base[1])


def test_antisymmetrize_exhaustive_n3():
    t = (3, -1, 2)
    p, s = antisymmetrize_exponent(t)
    for perm in itertools.permutations(range(3)):
        assert antisymmetrize_exponent([t[i] for i in perm]) == (p, s * permutation_sign(perm))


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=4))
def test_orbit_sizes(raw):
    m = Exponent(tuple(sorted(raw, reverse=True)))
    orbit = orbit_of_exponent(m)
    n = len(raw)
    assert len(orbit) == math.factorial(n)
    assert len(set(orbit)) == math.factorial(n) // m.stabilizer_order()
