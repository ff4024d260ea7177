"""Compactness and asymptotic-Toeplitz diagnostics at finite truncation.

Weak limits become entrywise stabilization on a fixed interior sub-window.
The shifts ``Z_j`` of the coordinate model coincide with ``Y_j`` in the
shared coordinates, so ``Y_j`` is used directly.
"""
from __future__ import annotations

import csv
import enum
import itertools
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NotAToeplitzOperator, NumericalFailure, WindowTooSmall
from .operators import (
    SymbolFit,
    TruncatedOperator,
    coordinate_tuple,
    identity,
    recover_symbol,
    toeplitz,
    y_shift,
)
from .partitions import Side, enumerate_window
from .symbols import SymbolExpansion

DEFAULT_TOL = 1e-8


class DecayVerdict(str, enum.Enum):
    DECAYS = "decays_below_tol"
    STAGNATES = "stagnates"
    GROWS = "grows"


def classify_decay(values: Sequence[float], tol: float = DEFAULT_TOL) -> DecayVerdict:
    """Last value below ``tol`` and no increase over the final three samples.

    Increases smaller than ``1e-3 * tol`` count as rounding noise.
    """
    v = [float(x) for x in values]
    if not v:
        return DecayVerdict.STAGNATES
    tail = v[-3:]
    slack = 1e-3 * tol
    if v[-1] < tol and all(b <= a + slack for a, b in zip(tail, tail[1:])):
        return DecayVerdict.DECAYS
    if v[-1] > v[0] + tol:
        return DecayVerdict.GROWS
    return DecayVerdict.STAGNATES


@dataclass
class DecaySequence:
    values: list
    verdict: DecayVerdict
    bounds: Optional[list] = None
    start: int = 0

    @classmethod
    def from_values(cls, values, tol: float = DEFAULT_TOL, start: int = 0, bounds=None) -> "DecaySequence":
        values = [float(x) for x in values]
        return cls(values, classify_decay(values, tol), bounds, start)

    @property
    def decays(self) -> bool:
        return self.verdict is DecayVerdict.DECAYS

    def to_dict(self) -> dict:
        out = {"start": self.start, "values": self.values, "verdict": self.verdict.value}
        if self.bounds is not None:
            out["bounds"] = [float(b) for b in self.bounds]
        return out

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["l", "value"])
            for k, v in enumerate(self.values, start=self.start):
                writer.writerow([k, repr(v)])


# --- eta maps -----------------------------------------------------------------

def _shift_family(n: int, D: int) -> list[TruncatedOperator]:
    """``(Y_1, ..., Y_{n-1}, T_p)`` on the analytic window."""
    return [y_shift(j, n, D) for j in range(1, n)] + [coordinate_tuple(n, D).P]


def _compress(T: TruncatedOperator, left: TruncatedOperator, right: TruncatedOperator,
              l: int, lift: int) -> TruncatedOperator:
    """``left^{*l} T right^l``.

    Raising shifts move the grade up by at most ``lift`` in total and adjoint
    shifts never leave the window, so entries are exact at depth
    ``T.interior_depth + lift``.
    """
    out = left.power(l).H @ T @ right.power(l)
    return TruncatedOperator(out.matrix, T.domain, T.codomain, T.interior_depth + lift, out.reach)


@dataclass
class EtaResult:
    blocks: list
    norm: float
    depth: int
    variant: str

    def block(self, i: int, k: int = 0) -> TruncatedOperator:
        return self.blocks[i][k]


def _require_analytic(T: TruncatedOperator):
    if T.domain.side is not Side.ANALYTIC or T.codomain != T.domain:
        raise ValueError("expected a square operator on an analytic window")


def eta_map(T: TruncatedOperator, l: int, variant: str = "block") -> EtaResult:
    """``eta_l(T)``.

    ``block`` gives the n x n block matrix ``A_i^{*l} T A_k^l`` with
    ``A = (Y_1, ..., Y_{n-1}, T_p)``.  ``column`` gives the block column
    ``A_i^{*l} T (Y_1^l ... Y_{n-1}^l T_p^l)``.  The norm is the spectral
    norm of the exact interior part.
    """
    _require_analytic(T)
    n, D = T.domain.n, T.domain.D
    A = _shift_family(n, D)
    if variant == "block":
        blocks = [[_compress(T, A[i], A[k], l, l) for k in range(n)] for i in range(n)]
    elif variant == "column":
        prod = A[0]
        for B in A[1:]:
            prod = prod @ B
        blocks = []
        for i in range(n):
            right = (T @ prod.power(l))
            left = A[i].power(l).H @ right
            blocks.append([TruncatedOperator(left.matrix, T.domain, T.domain,
                                             T.interior_depth + n * l, left.reach)])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    depth = blocks[0][0].interior_depth
    rows, cols = blocks[0][0].interior(depth)
    if not rows:
        raise WindowTooSmall(f"no interior at depth {depth} for l={l} (D={D})")
    grid = [[b.matrix[np.ix_(rows, cols)] for b in row] for row in blocks]
    norm = float(np.linalg.norm(np.block(grid), 2))
    return EtaResult(blocks, norm, depth, variant)


def eta_sequence(T: TruncatedOperator, l_values: Sequence[int], tol: float = DEFAULT_TOL,
                 variant: str = "block") -> DecaySequence:
    l_values = list(l_values)
    return DecaySequence.from_values([eta_map(T, l, variant).norm for l in l_values], tol,
                                     start=l_values[0] if l_values else 0)


# --- E_l and F_l ------------------------------------------------------------------

def coefficient_projection(n: int, D: int) -> TruncatedOperator:
    """``P_E = I - T_p T_p^*``, the projection onto ``ker T_p^*``."""
    P = coordinate_tuple(n, D).P
    out = identity(P.domain) - P @ P.H
    return TruncatedOperator(out.matrix, P.domain, P.domain, 0, 0, "P_E")


def x_shift(j: int, n: int, D: int) -> TruncatedOperator:
    """``X_j = Y_j P_E``: the shift ``Y_j`` acting on the coefficient space."""
    Y = y_shift(j, n, D)
    out = Y @ coefficient_projection(n, D)
    return TruncatedOperator(out.matrix, Y.domain, Y.domain, 0, 1, f"X{j}")


def _exact(M: np.ndarray, window, label: str) -> TruncatedOperator:
    return TruncatedOperator(M, window, window, 0, 0, label)


def coefspace_projection_El(n: int, l: int, D: int) -> TruncatedOperator:
    """``E_l = (P_E - X_1^l X_1^{*l}) ... (P_E - X_{n-1}^l X_{n-1}^{*l})``.

    Its range is spanned by ``e_p`` with ``p_n = 0`` and every gap
    ``p_j - p_{j+1}`` at most ``l``, which has ``l^(n-1)`` elements.  The
    window must reach ``p_1 = l (n-1)``.  Lowering then raising never leaves
    the window, so the truncated product is exact.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    if D < max(l * (n - 1), n - 1):
        raise WindowTooSmall(f"E_{l} needs D >= {l * (n - 1)}")
    PE = coefficient_projection(n, D)
    out = PE.matrix.copy()
    for j in range(1, n):
        X = x_shift(j, n, D).matrix
        Xl = np.linalg.matrix_power(X, l)
        out = out @ (PE.matrix - Xl @ Xl.conj().T)
    return _exact(out, PE.domain, f"E{l}")


def _power(M: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(M, k)


def fl_expansion_residual(n: int, l: int, D: int, kernel_power: int | None = None,
                          sign: int = 1) -> float:
    """Largest entry of ``(I - F_l) - [T_p^l T_p^{*l} + P_k (sum_J sign (-1)^(|J|+1) prod_J Y_j^l Y_j^{*l}) P_k]``.

    ``P_k`` projects onto ``ker T_p^{*k}`` with ``k = kernel_power``
    (default ``l``).  The expansion is exact only for ``k = l`` and
    ``sign = +1``.
    """
    k = l if kernel_power is None else kernel_power
    F = finite_rank_Fl(n, l, D, verify=False).matrix
    P = coordinate_tuple(n, D).P.matrix
    I = np.eye(len(F))
    Pl = _power(P, l)
    Pk = I - _power(P, k) @ _power(P, k).conj().T
    proj = [_power(y_shift(j, n, D).matrix, l) @ _power(y_shift(j, n, D).matrix, l).conj().T
            for j in range(1, n)]
    incl = np.zeros_like(I, dtype=complex)
    for size in range(1, n):
        for J in itertools.combinations(range(n - 1), size):
            term = I.astype(complex)
            for j in J:
                term = term @ proj[j]
            incl += sign * (-1) ** (size + 1) * term
    rhs = Pl @ Pl.conj().T + Pk @ incl @ Pk
    return float(np.max(np.abs((I - F) - rhs), initial=0.0))


def finite_rank_Fl(n: int, l: int, D: int, verify: bool = True, tol: float = 1e-10) -> TruncatedOperator:
    """``F_l = sum_{r<l} T_p^r E_l T_p^{*r}``, a projection of rank ``l^n``.

    With ``verify`` the inclusion-exclusion expansion of ``I - F_l`` in
    powers of ``T_p`` and ``Y_j`` is checked entrywise.
    """
    if D < max(n * l - 1, n - 1):
        raise WindowTooSmall(f"F_{l} needs D >= {n * l - 1}")
    E = coefspace_projection_El(n, l, D).matrix
    P = coordinate_tuple(n, D).P.matrix
    out = np.zeros_like(E)
    Pr = np.eye(len(E), dtype=complex)
    for _ in range(l):
        out += Pr @ E @ Pr.conj().T
        Pr = P @ Pr
    F = _exact(out, coordinate_tuple(n, D).window, f"F{l}")
    if verify and l > 0:
        res = fl_expansion_residual(n, l, D)
        if res > tol:
            raise NumericalFailure(f"I - F_{l} expansion fails (residual {res:.3g})")
    return F


def numerical_rank(M: np.ndarray, tol: float = 1e-8) -> int:
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    return int(np.sum(s > tol))


# --- asymptotic Toeplitz diagnosis -----------------------------------------------------

@dataclass
class Diagnosis:
    verdict: bool
    B: Optional[TruncatedOperator]
    symbol: Optional[SymbolExpansion]
    commutator: DecaySequence
    stabilization: DecaySequence
    eta: Optional[DecaySequence]
    depth: int
    recovery_residual: Optional[float] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": "asymptotic_toeplitz" if self.verdict else "not_asymptotic_toeplitz",
            "symbol": None if self.symbol is None else
            [[list(m), [a.real, a.imag]] for m, a in sorted(self.symbol.items())],
            "commutator": self.commutator.to_dict(),
            "stabilization": self.stabilization.to_dict(),
            "eta": None if self.eta is None else self.eta.to_dict(),
            "interior_depth_used": int(self.depth),
            "recovery_residual": self.recovery_residual,
            "notes": list(self.notes),
        }


def _interior_max(op: TruncatedOperator, rows, cols) -> float:
    block = op.matrix[np.ix_(rows, cols)]
    return float(np.linalg.norm(block, 2)) if block.size else 0.0


def asymptotic_toeplitz_diagnose(T: TruncatedOperator, l_max: int, tol: float = DEFAULT_TOL,
                                 degree: int = 3) -> Diagnosis:
    """Test whether ``T`` is a Toeplitz operator plus a compact perturbation.

    Three sequences are recorded for ``l = 1..l_max`` on one fixed interior
    sub-window: ``||T_p^{*l} [T, T_{s_i}] T_p^l||``, the change between
    consecutive compressions ``T_p^{*l} T T_p^l``, and ``||eta_l(T - T_phi)||``
    where ``phi`` is recovered from the last compression.  The verdict is
    positive iff all three decay below ``tol``.
    """
    _require_analytic(T)
    n, D = T.domain.n, T.domain.D
    ct = coordinate_tuple(n, D)
    P = ct.P
    base = T.interior_depth + 1  # commutators with T_{s_i} spend one grade
    depth = int(base + l_max)
    rows, cols = T.interior(depth)
    if not rows:
        raise WindowTooSmall(f"no fixed sub-window at depth {depth} (D={D})")

    commutators = [T @ S - S @ T for S in ct.S]
    comm_values, stab_values = [], []
    previous = T
    for l in range(1, l_max + 1):
        comm_values.append(max(_interior_max(_compress(C, P, P, l, l), rows, cols) for C in commutators))
        current = _compress(T, P, P, l, l)
        stab_values.append(_interior_max(current - previous, rows, cols))
        previous = current
    commutator = DecaySequence.from_values(comm_values, tol, start=1)
    stabilization = DecaySequence.from_values(stab_values, tol, start=1)

    notes = []
    symbol = None
    residual = None
    B = None
    eta = None
    sub = enumerate_window(n, D - depth, Side.ANALYTIC)
    candidate = TruncatedOperator(previous.matrix[np.ix_(rows, cols)], sub, sub, 0)
    try:
        fit: SymbolFit = recover_symbol(candidate, degree, tol=max(tol, 1e-12))
        symbol, residual = fit.symbol, fit.residual
    except NotAToeplitzOperator as exc:
        residual = exc.residual
        notes.append(f"limit compression is not Toeplitz on the sub-window: {exc}")
    if symbol is not None:
        B = toeplitz(symbol, D)
        K = T - B
        K = TruncatedOperator(K.matrix, K.domain, K.codomain, T.interior_depth, K.reach)
        try:
            eta = eta_sequence(K, range(1, l_max + 1), tol)
        except WindowTooSmall as exc:
            notes.append(str(exc))
    verdict = bool(commutator.decays and stabilization.decays and eta is not None and eta.decays)
    return Diagnosis(verdict, B, symbol, commutator, stabilization, eta, depth, residual, notes)
