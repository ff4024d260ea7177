"""Checkers for Brown-Halmos relations and the Toeplitz characterizations.

Every check on truncated operators compares entries on the interior
sub-window where the composed products are exact; nothing here measures
operator norms of a whole truncation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, WindowTooSmall
from .operators import (
    CoordinateTuple,
    TruncatedOperator,
    assemble_laurent,
    coordinate_tuple,
    identity,
    split_blocks,
    toeplitz,
)
from .partitions import Side, enumerate_window
from .symbols import SymbolExpansion, conjugate_symbol, multiply_symbols
from .symfun import Membership, _cluster_moduli, gamma_roots, membership_gamma


@dataclass
class CheckReport:
    passed: bool
    max_residual: float
    tolerance: float
    witness: Optional[list] = None
    interior_depth_used: int = 0
    relations: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def failed_relations(self) -> list[str]:
        return [k for k, v in self.relations.items() if not v <= self.tolerance]

    def to_dict(self) -> dict:
        depth = self.interior_depth_used
        return {
            "passed": bool(self.passed),
            "max_residual": float(self.max_residual),
            "witness": self.witness,
            "interior_depth_used": None if depth == math.inf else int(depth),
            "tolerance": self.tolerance,
            "relations": {k: float(v) for k, v in self.relations.items()},
            "details": _jsonable(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if hasattr(obj, "value"):
        return obj.value
    return obj


class _Collector:
    """Accumulates named residuals and remembers the worst entry."""

    def __init__(self, tol: float):
        self.tol = tol
        self.relations: dict[str, float] = {}
        self.worst = -1.0
        self.witness = None
        self.depth = 0

    def truncated(self, name: str, diff: TruncatedOperator, depth: float | None = None):
        depth = diff.interior_depth if depth is None else depth
        rows, cols = diff.interior(depth)
        if not rows or not cols:
            raise WindowTooSmall(f"{name}: no interior at depth {depth} "
                                 f"(window D={diff.domain.D})")
        block = diff.matrix[np.ix_(rows, cols)]
        self.depth = max(self.depth, depth)
        k = int(np.argmax(np.abs(block))) if block.size else 0
        val = complex(block.flat[k]) if block.size else 0j
        res = abs(val)
        self.relations[name] = res
        if res > self.worst:
            i, j = divmod(k, block.shape[1])
            self.worst = res
            self.witness = [list(diff.codomain[rows[i]].entries), list(diff.domain[cols[j]].entries),
                            [val.real, val.imag], name]

    def dense(self, name: str, diff: np.ndarray):
        diff = np.asarray(diff)
        if diff.size == 0:
            self.relations[name] = 0.0
            return
        k = int(np.argmax(np.abs(diff)))
        val = complex(diff.flat[k])
        res = abs(val)
        self.relations[name] = res
        if res > self.worst:
            i, j = divmod(k, diff.shape[1])
            self.worst = res
            self.witness = [int(i), int(j), [val.real, val.imag], name]

    def scalar(self, name: str, value: float, witness=None):
        self.relations[name] = float(value)
        if value > self.worst:
            self.worst = float(value)
            self.witness = witness

    def report(self, **details) -> CheckReport:
        worst = max(self.worst, 0.0)
        return CheckReport(passed=bool(worst <= self.tol), max_residual=worst, tolerance=self.tol,
                           witness=self.witness, interior_depth_used=self.depth,
                           relations=dict(self.relations), details=details)


def _tuple_parts(tup):
    """``(S list, P)`` as either truncated operators or dense arrays."""
    if isinstance(tup, CoordinateTuple):
        return list(tup.S), tup.P, True
    S, P = list(tup.S), tup.P
    return [np.asarray(s) for s in S], np.asarray(P), False


# --- Brown-Halmos ---------------------------------------------------------------

def check_brown_halmos(X, tup, tol: float = 1e-8) -> CheckReport:
    """``S_i^* X P = X S_{n-i}`` for each i and ``P^* X P = X``."""
    S, P, truncated = _tuple_parts(tup)
    n = len(S) + 1
    col = _Collector(tol)
    if truncated:
        if not isinstance(X, TruncatedOperator):
            X = TruncatedOperator(np.asarray(X), P.domain, P.domain)
        for i in range(1, n):
            col.truncated(f"S{i}*XP=XS{n - i}", S[i - 1].H @ X @ P - X @ S[n - i - 1])
        col.truncated("P*XP=X", P.H @ X @ P - X)
    else:
        X = np.asarray(X.matrix if isinstance(X, TruncatedOperator) else X)
        for i in range(1, n):
            col.dense(f"S{i}*XP=XS{n - i}", S[i - 1].conj().T @ X @ P - X @ S[n - i - 1])
        col.dense("P*XP=X", P.conj().T @ X @ P - X)
    return col.report()


def _commutator(A, B):
    return A @ B - B @ A


def check_gamma_isometry(tup, tol: float = 1e-8) -> CheckReport:
    """``P^*P = I``, ``S_i = S_{n-i}^* P`` and pairwise commutation."""
    S, P, truncated = _tuple_parts(tup)
    n = len(S) + 1
    ops = S + [P]
    col = _Collector(tol)
    if truncated:
        col.truncated("P*P=I", P.H @ P - identity(P.domain))
        for i in range(1, n):
            col.truncated(f"S{i}=S{n - i}*P", S[i - 1] - S[n - i - 1].H @ P)
        for a in range(n):
            for b in range(a + 1, n):
                col.truncated(f"[A{a + 1},A{b + 1}]", _commutator(ops[a], ops[b]))
    else:
        col.dense("P*P=I", P.conj().T @ P - np.eye(P.shape[0]))
        for i in range(1, n):
            col.dense(f"S{i}=S{n - i}*P", S[i - 1] - S[n - i - 1].conj().T @ P)
        for a in range(n):
            for b in range(a + 1, n):
                col.dense(f"[A{a + 1},A{b + 1}]", _commutator(ops[a], ops[b]))
    return col.report()


# --- Gamma_n-unitaries ----------------------------------------------------------

def _clusters(values: np.ndarray, gap: float) -> list[list[int]]:
    k = len(values)
    labels = np.arange(k)
    close = np.abs(values[:, None] - values[None, :]) < gap
    # single linkage by repeated label propagation
    changed = True
    while changed:
        new = np.array([labels[close[i]].min() for i in range(k)])
        changed = bool(np.any(new != labels))
        labels = new
        close_labels = labels[:, None] == labels[None, :]
        close = close | close_labels
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return list(groups.values())


def joint_eigenvalues(mats: Sequence[np.ndarray], gap: float = 1e-8, seed: int = 0) -> np.ndarray:
    """Joint eigenvalue tuples of a commuting family of normal matrices.

    The last matrix is Schur-decomposed; clusters of its eigenvalues are
    refined by Schur-decomposing a random combination of the whole family
    compressed to the cluster.  Returns an array of shape ``(dim, len(mats))``.
    """
    mats = [np.asarray(m, dtype=complex) for m in mats]
    U = mats[-1]
    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Schur decomposition failed: {exc}") from exc
    eig = np.diag(T)
    rng = np.random.default_rng(seed)
    out = np.empty((len(eig), len(mats)), dtype=complex)
    row = 0
    for members in _clusters(eig, gap):
        Zc = Z[:, members]
        comp = [Zc.conj().T @ M @ Zc for M in mats]
        if len(members) > 1:
            weights = rng.normal(size=len(mats)) + 1j * rng.normal(size=len(mats))
            combo = sum(w * C for w, C in zip(weights, comp))
            try:
                _, W = scipy.linalg.schur(combo, output="complex")
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise NumericalFailure(f"Schur refinement failed: {exc}") from exc
            comp = [W.conj().T @ C @ W for C in comp]
        for k in range(len(members)):
            out[row] = [C[k, k] for C in comp]
            row += 1
    return out


def boundary_distance(c: Sequence[complex]) -> float:
    """How far the roots attached to ``c`` are from the unit circle."""
    return float(np.max(np.abs(_cluster_moduli(gamma_roots(c)) - 1.0)))


def check_gamma_unitary(mats: Sequence[np.ndarray], tol: float = 1e-8) -> CheckReport:
    """Commuting normal tuple with unitary last entry and joint spectrum in bGamma_n."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1 or mats[0].ndim != 2 or mats[0].shape[0] != mats[0].shape[1]:
        raise ValueError("need square matrices of one common size")
    n = len(mats)
    col = _Collector(tol)
    for a in range(n):
        for b in range(a + 1, n):
            col.dense(f"[A{a + 1},A{b + 1}]", _commutator(mats[a], mats[b]))
    for a, M in enumerate(mats):
        col.dense(f"A{a + 1} normal", M @ M.conj().T - M.conj().T @ M)
    U = mats[-1]
    col.dense("U*U=I", U.conj().T @ U - np.eye(U.shape[0]))
    joint = joint_eigenvalues(mats)
    worst, worst_pt, classes = 0.0, None, []
    for pt in joint:
        classes.append(membership_gamma(pt, tol))
        d = boundary_distance(pt)
        if d > worst:
            worst, worst_pt = d, pt
    col.scalar("joint spectrum in bGamma", worst,
                None if worst_pt is None else [[float(x.real), float(x.imag)] for x in worst_pt])
    report = col.report(joint_spectrum_classes=sorted({c.value for c in classes}))
    if any(c is not Membership.BOUNDARY_DISTINGUISHED for c in classes):
        report.passed = False
    return report


# --- product identities and the analytic characterization --------------------

def _laurent_pieces(phi: SymbolExpansion, D: int):
    window = enumerate_window(phi.n, D, Side.LAURENT)
    return split_blocks(assemble_laurent(phi, window))


def check_product_identities(phi: SymbolExpansion, psi: SymbolExpansion, D: int,
                             tol: float = 1e-10) -> CheckReport:
    """Adjoint, analytic-factor and Hankel-defect identities for ``T_phi``, ``T_psi``."""
    if max(phi.max_abs, psi.max_abs) > D:
        raise WindowTooSmall("window bound smaller than the symbols' exponents")
    phi_bar = conjugate_symbol(phi)
    prod = multiply_symbols(phi, psi)
    Bphi, Bpsi, Bbar, Bprod = (_laurent_pieces(s, D) for s in (phi, psi, phi_bar, prod))
    col = _Collector(tol)

    col.truncated("T_phi*=T_conj(phi)", Bphi.toeplitz.H - Bbar.toeplitz, depth=0)
    col.truncated("upper block = H_conj(phi)*", Bphi.hankel_conj_adj - Bbar.hankel.H, depth=0)

    TT = Bphi.toeplitz @ Bpsi.toeplitz
    applicable = psi.is_analytic or phi_bar.is_analytic
    if applicable:
        col.truncated("T_phi T_psi=T_phi.psi", TT - Bprod.toeplitz)

    hh = Bbar.hankel.H @ Bpsi.hankel
    col.truncated("T_phi T_psi-T_phi.psi=-H*H", TT - Bprod.toeplitz + hh)
    return col.report(analytic_factor_applicable=applicable)


def check_analytic_characterization(phi: SymbolExpansion, D: int, tol: float = 1e-10) -> CheckReport:
    """Confirm that the equivalent conditions for an analytic Toeplitz operator agree.

    ``passed`` means every condition (commuting with ``T_p`` and with each
    ``T_{s_i}``, invariance of ``Ran T_p``, and Brown-Halmos membership of
    ``T_p T_phi`` and ``T_{s_i} T_phi``) holds when the symbol is analytic
    and fails when it is not.
    """
    n = phi.n
    ct = coordinate_tuple(n, D)
    T = toeplitz(phi, D)
    P = ct.P
    col = _Collector(tol)
    col.truncated("[T,T_p]", _commutator(T, P))
    for i, S in enumerate(ct.S, start=1):
        col.truncated(f"[T,T_s{i}]", _commutator(T, S))
    # Ran T_p is spanned by e_p with p_n >= 1, and finite-section entries of T
    # are exact, so invariance is read off the block from p_n >= 1 to q_n = 0
    w = T.domain
    rows = [i for i, q in enumerate(w) if q[-1] == 0]
    cols = [j for j, p in enumerate(w) if p[-1] >= 1]
    block = T.matrix[np.ix_(rows, cols)]
    k = int(np.argmax(np.abs(block))) if block.size else 0
    val = complex(block.flat[k]) if block.size else 0j
    i, j = divmod(k, max(block.shape[1], 1))
    witness = [list(w[rows[i]].entries), list(w[cols[j]].entries), [val.real, val.imag],
               "T(Ran T_p) in Ran T_p"] if block.size else None
    col.scalar("T(Ran T_p) in Ran T_p", abs(val), witness)
    bh = check_brown_halmos(P @ T, ct, tol)
    col.scalar("T_p T is Toeplitz", bh.max_residual, bh.witness)
    col.depth = max(col.depth, bh.interior_depth_used)
    for i, S in enumerate(ct.S, start=1):
        bh = check_brown_halmos(S @ T, ct, tol)
        col.scalar(f"T_s{i} T is Toeplitz", bh.max_residual, bh.witness)
        col.depth = max(col.depth, bh.interior_depth_used)
    analytic = phi.is_analytic
    holds = {k: v <= tol for k, v in col.relations.items()}
    consistent = all(h == analytic for h in holds.values())
    commutators = [v for k, v in col.relations.items() if k.startswith("[")]
    report = col.report(analytic=analytic, conditions_hold=holds, consistent=consistent,
                        max_commutator=max(commutators))
    report.passed = consistent
    return report
