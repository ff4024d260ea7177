import numpy as np
import pytest

from symgamma.asymptotics import (
    DecayVerdict,
    asymptotic_toeplitz_diagnose,
    classify_decay,
    coefficient_projection,
    coefspace_projection_El,
    eta_map,
    eta_sequence,
    finite_rank_Fl,
    fl_expansion_residual,
    numerical_rank,
    x_shift,
)
from symgamma.errors import WindowTooSmall
from symgamma.operators import TruncatedOperator, coordinate_tuple, identity, toeplitz, y_shift
from symgamma.partitions import StrictPartition, enumerate_window, staircase
from symgamma.relations import check_brown_halmos
from symgamma.symbols import SymbolExpansion


def rank_one(window, p, scale=1.0):
    M = np.zeros((len(window), len(window)), dtype=complex)
    k = window.index[p]
    M[k, k] = scale
    return TruncatedOperator(M, window, window)


def test_classify_decay():
    assert classify_decay([1, 0.1, 1e-9, 0]) is DecayVerdict.DECAYS
    assert classify_decay([1, 1, 1]) is DecayVerdict.STAGNATES
    assert classify_decay([1, 2, 3]) is DecayVerdict.GROWS
    # a late bump is not decay even when the last value is small
    assert classify_decay([1, 1e-12, 1e-9, 5e-9]) is DecayVerdict.STAGNATES


@pytest.mark.parametrize("n", [2, 3])
def test_eta_rank_one_at_staircase(n):
    w = enumerate_window(n, 9)
    T = rank_one(w, staircase(n))
    for l in range(1, 4):
        assert eta_map(T, l).norm == 0


def test_eta_identity_block():
    w = enumerate_window(2, 8)
    res = eta_map(identity(w), 2)
    rows, cols = res.block(1, 1).interior(res.depth)
    assert np.array_equal(res.block(1, 1).matrix[np.ix_(rows, cols)], np.eye(len(rows)))
    assert res.norm >= 1


def test_eta_toeplitz_bounded_below():
    phi = SymbolExpansion(2, {(1, -1): 0.3, (0, 0): 1})
    T = toeplitz(phi, 10)
    assert min(eta_map(T, l).norm for l in range(1, 5)) > 0.1
    assert eta_map(T, 2, variant="column").norm > 0.1


def test_eta_window_too_small():
    with pytest.raises(WindowTooSmall):
        eta_map(identity(enumerate_window(2, 3)), 3)


def test_finite_rank_support_vanishes():
    rng = np.random.default_rng(0)
    for n, r in ((2, 3), (3, 4)):
        w = enumerate_window(n, 10)
        M = np.zeros((len(w), len(w)), dtype=complex)
        idx = [i for i, p in enumerate(w) if p[0] <= r]
        M[np.ix_(idx, idx)] = rng.normal(size=(len(idx), len(idx)))
        T = TruncatedOperator(M, w, w)
        assert eta_map(T, r - n + 1).norm > 0
        for l in range(r + 1, r + 3):
            assert eta_map(T, l).norm == 0


def test_El_examples():
    E = coefspace_projection_El(2, 2, 5)
    support = {p for p in E.domain if abs(E.entry(p, p)) > 0.5}
    assert support == {StrictPartition((1, 0)), StrictPartition((2, 0))}
    E = coefspace_projection_El(3, 1, 4)
    assert numerical_rank(E.matrix) == 1 and E.entry((2, 1, 0), (2, 1, 0)) == 1
    assert not coefspace_projection_El(3, 0, 4).matrix.any()


@pytest.mark.parametrize("n,l", [(2, 1), (2, 3), (3, 2), (3, 3), (4, 2)])
def test_El_is_gap_projection(n, l):
    D = l * (n - 1) + 1
    E = coefspace_projection_El(n, l, D).matrix
    assert np.allclose(E @ E, E) and np.allclose(E, E.conj().T)
    assert numerical_rank(E) == l ** (n - 1)
    w = enumerate_window(n, D)
    expected = [p[-1] == 0 and all(a - b <= l for a, b in zip(p, p.entries[1:])) for p in w]
    assert np.array_equal(np.diag(E).real > 0.5, np.array(expected))


@pytest.mark.parametrize("n,l", [(2, 1), (2, 2), (2, 4), (3, 2)])
def test_Fl_projection_and_rank(n, l):
    F = finite_rank_Fl(n, l, n * l + 1).matrix
    assert numerical_rank(F) == l ** n
    assert np.allclose(F @ F, F) and np.allclose(F, F.conj().T)
    assert fl_expansion_residual(n, l, n * l + 1) < 1e-12


def test_Fl_literal_variants_fail():
    # kernel of T_p^{*(l-1)} or the opposite inclusion-exclusion sign do not reproduce I - F_l
    assert fl_expansion_residual(3, 2, 7, kernel_power=1) > 0.5
    assert fl_expansion_residual(3, 2, 7, sign=-1) > 0.5


def test_Fl_edge_cases():
    assert not finite_rank_Fl(2, 0, 3).matrix.any()
    with pytest.raises(WindowTooSmall):
        finite_rank_Fl(2, 3, 4)


@pytest.mark.parametrize("n", [2, 3])
def test_Y_is_sum_of_shifted_X(n):
    D = 7
    P = coordinate_tuple(n, D).P.matrix
    for j in range(1, n):
        X = x_shift(j, n, D).matrix
        total = np.zeros_like(X)
        Pr = np.eye(len(X))
        for _ in range(D + 1):
            total += Pr @ X @ Pr.conj().T
            Pr = P @ Pr
        assert np.array_equal(total, y_shift(j, n, D).matrix)


def test_Y_doubly_commuting():
    n, D = 4, 8
    Y = [y_shift(j, n, D) for j in range(1, n)]
    for i in range(n - 1):
        for j in range(n - 1):
            if i != j:
                assert not (Y[i] @ Y[j] - Y[j] @ Y[i]).interior_block().any()
                assert not (Y[i] @ Y[j].H - Y[j].H @ Y[i]).interior_block().any()


def test_coefficient_projection():
    PE = coefficient_projection(3, 5)
    assert all((PE.entry(p, p) == 1) == (p[-1] == 0) for p in PE.domain)


@pytest.mark.parametrize("n,D", [(2, 14), (3, 12)])
def test_diagnose_toeplitz_plus_rank_one(n, D):
    phi = SymbolExpansion(n, {tuple([1] + [0] * (n - 1)): 1, tuple([0] * (n - 1) + [-1]): 0.5j})
    T = toeplitz(phi, D) + rank_one(enumerate_window(n, D), staircase(n), 2.0)
    diag = asymptotic_toeplitz_diagnose(T, 3)
    assert diag.verdict
    assert diag.symbol.distance(phi) < 1e-8
    assert diag.eta.values == [0.0] * 3 or max(diag.eta.values) < 1e-12
    assert check_brown_halmos(diag.B, coordinate_tuple(n, D), 1e-12).passed


def test_diagnose_toeplitz_itself():
    phi = SymbolExpansion(2, {(2, -1): 1})
    T = toeplitz(phi, 14)
    diag = asymptotic_toeplitz_diagnose(T, 3)
    assert diag.verdict and np.max(np.abs(diag.B.matrix - T.matrix)) < 1e-12


def test_diagnose_shift_negative():
    diag = asymptotic_toeplitz_diagnose(y_shift(1, 2, 14), 3)
    assert not diag.verdict
    assert diag.commutator.verdict is not DecayVerdict.DECAYS


def test_diagnose_window_too_small():
    with pytest.raises(WindowTooSmall):
        asymptotic_toeplitz_diagnose(toeplitz(SymbolExpansion(2, {(1, 0): 1}), 4), 4)


def test_eta_sequence_csv(tmp_path):
    seq = eta_sequence(toeplitz(SymbolExpansion(2, {(1, 0): 1}), 10), range(1, 4))
    seq.to_csv(tmp_path / "eta.csv")
    lines = (tmp_path / "eta.csv").read_text().splitlines()
    assert lines[0] == "l,value" and lines[1].startswith("1,")
