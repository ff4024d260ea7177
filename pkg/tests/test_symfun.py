import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import fd_jacobian
from symgamma.errors import EvaluationDomain
from symgamma.partitions import permutation_sign, staircase
from symgamma.symfun import (
    Membership,
    eval_antisym,
    jacobian_at,
    jacobian_matrix,
    membership_gamma,
    symmetrize_point,
    vandermonde_product,
)

# radii near the underflow threshold break the determinant-based oracles, not the code under test
radius = st.one_of(st.just(0.0), st.floats(1e-6, 0.95))
complex_disk = st.builds(lambda r, t: r * np.exp(2j * np.pi * t), radius, st.floats(0, 1))
unit_circle = st.builds(lambda t: np.exp(2j * np.pi * t), st.floats(0, 1))


def test_symmetrize_examples():
    assert np.allclose(symmetrize_point([1, 1]), [2, 1])
    assert np.allclose(symmetrize_point([1j, -1j]), [0, 1])
    assert np.allclose(symmetrize_point([1, 1, 1]), [3, 3, 1])


def test_jacobian_examples_against_finite_differences():
    assert jacobian_at([1, 0]) == pytest.approx(1)
    assert jacobian_at([1, 1]) == pytest.approx(0)
    assert jacobian_at([1, 0, -1]) == pytest.approx(fd_jacobian([1, 0, -1]), abs=1e-6)
    assert jacobian_at([1, 0, -1]) == pytest.approx(2)
    assert jacobian_at([1, 0, -1]) == pytest.approx(vandermonde_product([1, 0, -1]))


def test_antisym_examples():
    assert eval_antisym((1, 0), [2, 3]) == pytest.approx(-1)
    assert eval_antisym((2, 1), [2, 3]) == pytest.approx(-6)
    # rows (1,1,1), (0,0,1), (1,-1,1): determinant 2
    assert eval_antisym((2, 1, 0), [1, 0, -1]) == pytest.approx(2)
    with pytest.raises(EvaluationDomain):
        eval_antisym((1, -1), [0, 1])


def test_membership_examples():
    assert membership_gamma([0, 0]) is Membership.INTERIOR
    assert membership_gamma([2, 1]) is Membership.BOUNDARY_DISTINGUISHED
    assert membership_gamma([3, 1]) is Membership.OUTSIDE
    # roots 1 and 0.5: inside the closed set but off the torus
    assert membership_gamma([1.5, 0.5]) is Membership.INSIDE_NOT_BGAMMA
    with pytest.raises(ValueError):
        membership_gamma([0, 0], tol=0)


@given(st.lists(complex_disk, min_size=2, max_size=4), st.data())
def test_symmetric_and_antisymmetric(z, data):
    perm = data.draw(st.permutations(range(len(z))))
    zp = [z[i] for i in perm]
    assert np.allclose(symmetrize_point(zp), symmetrize_point(z))
    assert jacobian_at(zp) == pytest.approx(permutation_sign(perm) * jacobian_at(z), abs=1e-10)


@given(st.lists(complex_disk, min_size=2, max_size=4))
def test_staircase_equals_jacobian(z):
    # same global sign for every point
    assert eval_antisym(staircase(len(z)), z) == pytest.approx(jacobian_at(z), abs=1e-10)
    assert jacobian_at(z) == pytest.approx(fd_jacobian(z), abs=1e-6)


@given(st.lists(unit_circle, min_size=2, max_size=4))
def test_torus_maps_to_distinguished_boundary(z):
    assert membership_gamma(symmetrize_point(z)) is Membership.BOUNDARY_DISTINGUISHED


def test_double_roots_on_circle_are_boundary():
    for theta in np.linspace(0, 2 * np.pi, 13):
        w = np.exp(1j * theta)
        for z in ([w, w], [w, w, w], [w, w, -w, 1j]):
            assert membership_gamma(symmetrize_point(z)) is Membership.BOUNDARY_DISTINGUISHED


@given(st.lists(st.builds(lambda r, t: r * np.exp(2j * np.pi * t), st.floats(0, 0.99), st.floats(0, 1)),
                min_size=2, max_size=4))
def test_interior_points(z):
    assert membership_gamma(symmetrize_point(z)) is Membership.INTERIOR


def test_exhaustive_permutations_n4():
    z = np.array([0.3 + 0.1j, -0.5j, 0.7, -0.2 + 0.4j])
    base = jacobian_at(z)
    for perm in itertools.permutations(range(4)):
        assert jacobian_at(z[list(perm)]) == pytest.approx(permutation_sign(perm) * base, abs=1e-12)


def test_jacobian_matches_matrix_determinant():
    rng = np.random.default_rng(1)
    for n in (2, 3, 4):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        assert jacobian_at(z) == pytest.approx(np.linalg.det(jacobian_matrix(z)), rel=1e-10)
    # entries underflowing into the subnormal range
    tiny = [0, 2.2250738585072014e-308, 0.5]
    assert np.isfinite(jacobian_at(tiny))
    assert eval_antisym((2, 1, 0), tiny) == pytest.approx(jacobian_at(tiny))
    assert np.isfinite(eval_antisym((1, 0), [0, 1.1e-308]))


@pytest.mark.parametrize("z", [
    [1, 1, np.exp(2j * np.pi * 6.103515625e-05)],
    [1, 1, 1, np.exp(1e-4j)],
    [1j, 1j, 1j, 1j],
])
def test_near_multiple_torus_roots(z):
    # forward root error here exceeds the tolerance; the backward test decides
    assert membership_gamma(symmetrize_point(z)) is Membership.BOUNDARY_DISTINGUISHED


def test_near_multiple_root_outside():
    assert membership_gamma(symmetrize_point([1, 1, 1.0001])) is Membership.OUTSIDE
    assert membership_gamma(symmetrize_point([1, 1, 0.999])) is Membership.INSIDE_NOT_BGAMMA
