import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import grid_points, symbol_values
from symgamma.errors import EvaluationDomain, GridTooCoarse, SymmetryViolation
from symgamma.symbols import (
    SymbolExpansion,
    conjugate_symbol,
    eval_symbol,
    format_symbol_text,
    load_symbol,
    multiply_symbols,
    parse_symbol_text,
    quadrature_coeffs,
    random_symbol,
    save_symbol,
    torus_grid,
)


@st.composite
def symbols(draw, n=None, max_abs=2):
    n = draw(st.integers(2, 3)) if n is None else n
    terms = draw(st.dictionaries(
        st.lists(st.integers(-max_abs, max_abs), min_size=n, max_size=n).map(lambda t: tuple(sorted(t, reverse=True))),
        st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
        max_size=4))
    return SymbolExpansion(n, terms)


def test_eval_examples():
    assert eval_symbol(SymbolExpansion(2, {(1, 0): 1}), [1, 1]) == pytest.approx(2)
    assert eval_symbol(SymbolExpansion(2, {(1, 1): 1}), [1j, 1j]) == pytest.approx(-2)
    assert eval_symbol(SymbolExpansion(2, {(0, 0): 1}), [1j, -1]) == pytest.approx(2)
    with pytest.raises(EvaluationDomain):
        eval_symbol(SymbolExpansion(2, {(1, 0): 1}), [0.5, 1])


def test_constant_and_elementary():
    one = SymbolExpansion.constant(3)
    assert one[(0, 0, 0)] == pytest.approx(1 / 6)
    z = np.exp(1j * np.array([0.3, 1.1, -2.0]))
    assert eval_symbol(one, z) == pytest.approx(1)
    e2 = SymbolExpansion.elementary(3, 2)
    assert eval_symbol(e2, z) == pytest.approx(z[0] * z[1] + z[0] * z[2] + z[1] * z[2])


def test_conjugate_examples():
    assert conjugate_symbol(SymbolExpansion(2, {(1, 0): 1})) == SymbolExpansion(2, {(0, -1): 1})
    c = 2 - 3j
    assert conjugate_symbol(SymbolExpansion(2, {(0, 0): c}))[(0, 0)] == np.conj(c)


def test_multiply_examples():
    s1 = SymbolExpansion(2, {(1, 0): 1})
    assert multiply_symbols(s1, s1) == SymbolExpansion(2, {(2, 0): 1, (1, 1): 1})
    phi = SymbolExpansion(2, {(2, -1): 1 + 1j, (0, 0): 0.5})
    assert multiply_symbols(phi, SymbolExpansion.constant(2)).distance(phi) < 1e-15
    assert multiply_symbols(phi, SymbolExpansion.zero(2)).is_zero()


def test_quadrature_examples():
    s1 = SymbolExpansion(2, {(1, 0): 1})
    samples = eval_symbol(s1, torus_grid(2, 8))
    assert quadrature_coeffs(samples, 2, 3).distance(s1) < 1e-12
    assert quadrature_coeffs(np.full((6, 6), 2.0), 2, 2).distance(SymbolExpansion(2, {(0, 0): 1})) < 1e-12
    z = torus_grid(2, 8)
    with pytest.raises(SymmetryViolation):
        quadrature_coeffs(z[..., 0], 2, 3)
    with pytest.raises(GridTooCoarse):
        quadrature_coeffs(samples, 2, 4)


def test_eval_matches_oracle():
    phi = SymbolExpansion(3, {(2, 0, -1): 1 - 2j, (1, 1, 0): 0.5})
    pts = grid_points(3, 5)
    assert np.allclose(eval_symbol(phi, pts), symbol_values(phi.coeffs, pts), atol=1e-12)


def test_text_round_trip(tmp_path):
    phi = SymbolExpansion(3, {(2, 0, -1): 1 / 3 - 2j, (1, 1, 0): 0.5})
    path = tmp_path / "phi.sym"
    save_symbol(phi, path)
    assert load_symbol(path) == phi
    assert parse_symbol_text("# comment\n\n1 0 2.0 0\n1 0 1 1\n") == SymbolExpansion(2, {(1, 0): 3 + 1j})
    with pytest.raises(ValueError):
        parse_symbol_text("1 0 0 1.0 0\n1 0 1.0 0\n")
    assert format_symbol_text(phi).startswith("#")


def test_degree_bookkeeping():
    phi = SymbolExpansion(3, {(2, 0, -1): 1, (1, 1, 1): 1})
    assert phi.degree == 3 and phi.max_abs == 2 and not phi.is_analytic
    assert SymbolExpansion(2, {(3, 0): 1}).is_analytic


def test_random_symbol_analytic_flag():
    rng = np.random.default_rng(3)
    for _ in range(20):
        assert random_symbol(3, rng, analytic=True).is_analytic
        assert not random_symbol(2, rng, analytic=False).is_analytic


@given(symbols())
def test_conjugate_involution_and_pointwise(phi):
    assert conjugate_symbol(conjugate_symbol(phi)) == phi
    z = grid_points(phi.n, 4)
    assert np.allclose(eval_symbol(conjugate_symbol(phi), z), np.conj(eval_symbol(phi, z)), atol=1e-10)
    assert np.allclose(eval_symbol(phi + conjugate_symbol(phi), z).imag, 0, atol=1e-10)


@given(st.integers(2, 3).flatmap(lambda n: st.tuples(symbols(n), symbols(n), symbols(n))))
def test_multiplication_commutative_associative(triple):
    a, b, c = triple
    z = grid_points(a.n, 4)
    ab = multiply_symbols(a, b)
    assert np.allclose(eval_symbol(ab, z), eval_symbol(a, z) * eval_symbol(b, z), atol=1e-9)
    assert multiply_symbols(b, a).distance(ab) < 1e-10
    left = multiply_symbols(ab, c)
    right = multiply_symbols(a, multiply_symbols(b, c))
    assert left.distance(right) < 1e-10


@given(symbols())
def test_quadrature_round_trip(phi):
    bound = max(phi.max_abs, 1)
    M = 2 * bound + 1
    samples = eval_symbol(phi, torus_grid(phi.n, M))
    assert quadrature_coeffs(samples, phi.n, bound).distance(phi) < 1e-10
