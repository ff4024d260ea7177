"""Finite-dimensional Gamma_n-contractions.

Covers the limit ``Q = lim P*^j P^j``, fundamental operators, the decay
of ``P*^j (S_{n-i} - S_i^* P) P^j``, the unitary extension built on
``ran Q^{1/2}``, and the Gamma_2 embedding ``Pi``.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.stats import unitary_group

from .asymptotics import DecaySequence, classify_decay
from .errors import (
    ExtensionIllDefined,
    InvalidDimension,
    InvalidSpec,
    InvalidTuple,
    NoFundamentalOperator,
    NotApplicable,
    SlowConvergence,
)
from .relations import CheckReport, _Collector, check_brown_halmos, check_gamma_unitary
from .symfun import elementary_symmetric

COMMUTE_TOL = 1e-10
CONVERGENCE_TOL = 1e-10
RELATION_TOL = 1e-8
MAX_ITER = 10**5


def _norm(A) -> float:
    A = np.asarray(A)
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """Commuting ``(S_1, ..., S_{n-1}, P)`` on a finite-dimensional space."""

    S: tuple
    P: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=complex)
        S = tuple(np.asarray(s, dtype=complex) for s in self.S)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidTuple("P must be square")
        if any(s.shape != P.shape for s in S):
            raise InvalidTuple("all entries must share P's shape")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "S", S)
        ops = (*S, P)
        scale = max(1.0, max(_norm(A) for A in ops))
        for a, b in itertools.combinations(range(len(ops)), 2):
            gap = _norm(ops[a] @ ops[b] - ops[b] @ ops[a])
            if gap > COMMUTE_TOL * scale:
                raise InvalidTuple(f"entries {a + 1} and {b + 1} do not commute (residual {gap:.3g})")
        if _norm(P) > 1 + COMMUTE_TOL:
            raise InvalidTuple(f"||P|| = {_norm(P):.12g} exceeds 1")

    @property
    def n(self) -> int:
        return len(self.S) + 1

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    @property
    def ops(self) -> tuple:
        return (*self.S, self.P)

    def conjugated(self, W: np.ndarray) -> "OperatorTuple":
        """``W A W^*`` applied to every entry."""
        Wh = W.conj().T
        return OperatorTuple(tuple(W @ s @ Wh for s in self.S), W @ self.P @ Wh)

    def to_dict(self) -> dict:
        return {"S": [_matrix_to_json(s) for s in self.S], "P": _matrix_to_json(self.P)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "OperatorTuple":
        try:
            S = tuple(_matrix_from_json(s) for s in data["S"])
            P = _matrix_from_json(data["P"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTuple(f"malformed tuple description: {exc}") from exc
        return cls(S, P)

    @classmethod
    def from_json(cls, text: str) -> "OperatorTuple":
        return cls.from_dict(json.loads(text))


def _matrix_to_json(A: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(A, dtype=complex)]


def _matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrices are nested [[ [re, im], ... ], ...] lists")
    return arr[..., 0] + 1j * arr[..., 1]


def save_tuple(t: OperatorTuple, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(t.to_json())


def load_tuple(path: str | os.PathLike) -> OperatorTuple:
    with open(path, encoding="utf-8") as fh:
        return OperatorTuple.from_json(fh.read())


# --- Q ------------------------------------------------------------------------

def compute_Q(P: np.ndarray, tol: float = CONVERGENCE_TOL, max_iter: int = MAX_ITER) -> np.ndarray:
    """``lim_j P*^j P^j``.

    The power is doubled each round (``A_2j = P*^j A_j P^j``), so ``max_iter``
    bounds the exponent ``j`` rather than the number of rounds.  Stopping when
    ``A_j`` and ``A_2j`` agree is a stricter test than comparing neighbours.
    """
    P = np.asarray(P, dtype=complex)
    A = np.eye(P.shape[0], dtype=complex)
    Pj = P.copy()
    j = 1
    residual = math.inf
    while True:
        A_next = Pj.conj().T @ A @ Pj
        A_next = (A_next + A_next.conj().T) / 2
        residual = _norm(A_next - A)
        A = A_next
        if residual < tol:
            break
        j *= 2
        if j > max_iter:
            raise SlowConvergence(f"P*^j P^j not settled by j={max_iter} (residual {residual:.3g})",
                                  residual)
        Pj = Pj @ Pj
    return A


def nonemptiness_check(t: OperatorTuple, tol: float = CONVERGENCE_TOL, Q: np.ndarray | None = None) -> bool:
    """True iff ``Q != 0``, i.e. ``P^j`` does not tend to zero."""
    Q = compute_Q(t.P, tol) if Q is None else Q
    return bool(_norm(Q) > max(1e-8, 10 * tol))


def q_membership_check(t: OperatorTuple, tol: float = RELATION_TOL, Q: np.ndarray | None = None) -> CheckReport:
    """Brown-Halmos relations for ``Q`` with respect to the tuple."""
    Q = compute_Q(t.P) if Q is None else Q
    return check_brown_halmos(Q, t, tol)


# --- fundamental operators ---------------------------------------------------

def defect_operator(P: np.ndarray, rank_tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``D_P`` together with an orthonormal basis ``E`` of ``ran D_P`` and its singular values."""
    P = np.asarray(P, dtype=complex)
    G = np.eye(P.shape[0]) - P.conj().T @ P
    w, E = np.linalg.eigh((G + G.conj().T) / 2)
    d = np.sqrt(np.clip(w, 0.0, None))
    keep = d > rank_tol
    # sqrt turns rounding noise of size 1e-16 in I - P*P into 1e-8 defects
    d = np.where(keep, d, 0.0)
    D = (E * d) @ E.conj().T
    return D, E[:, keep], d[keep]


def fundamental_operators(t: OperatorTuple, tol: float = RELATION_TOL,
                          rank_tol: float = 1e-6) -> tuple[list[np.ndarray], float]:
    """Solve ``S_i - S_{n-i}^* P = D_P F_i D_P`` on ``ran D_P``.

    Each ``F_i`` is returned as a matrix on the whole space vanishing on
    ``ker D_P``; the second value is the largest residual.
    """
    D, E, d = defect_operator(t.P, rank_tol)
    n = t.n
    F, worst = [], 0.0
    for i in range(1, n):
        G = t.S[i - 1] - t.S[n - i - 1].conj().T @ t.P
        core = (E.conj().T @ G @ E) / np.outer(d, d) if d.size else np.zeros((0, 0))
        Fi = E @ core @ E.conj().T
        worst = max(worst, _norm(G - D @ Fi @ D))
        F.append(Fi)
    if worst > tol:
        raise NoFundamentalOperator(f"S_i - S_(n-i)^* P is not of the form D_P F D_P "
                                    f"(residual {worst:.3g})", worst)
    return F, worst


def decay_check(t: OperatorTuple, j_max: int = 200, tol: float = RELATION_TOL) -> DecaySequence:
    """``max_i ||P*^j (S_{n-i} - S_i^* P) P^j||`` for ``j = 0..j_max``.

    When fundamental operators exist the bound ``||F_{n-i}|| ||D_P P^j||^2``
    is recorded alongside.
    """
    n, P = t.n, t.P
    G = [t.S[n - i - 1] - t.S[i - 1].conj().T @ P for i in range(1, n)]
    try:
        F, _ = fundamental_operators(t)
        fnorm = max(_norm(f) for f in F)
    except NoFundamentalOperator:
        fnorm = None
    Pj = np.eye(t.dim, dtype=complex)
    values, bounds = [], []
    for _ in range(j_max + 1):
        Pjh = Pj.conj().T
        values.append(max(_norm(Pjh @ g @ Pj) for g in G))
        if fnorm is not None:
            nxt = P @ Pj
            bounds.append(fnorm * _norm(Pjh @ Pj - nxt.conj().T @ nxt))
        Pj = P @ Pj
    return DecaySequence(values, classify_decay(values, tol), bounds or None)


# --- extension -----------------------------------------------------------------

@dataclass
class ExtensionTriple:
    R: list
    U: np.ndarray
    V: np.ndarray
    K_dim: int
    report: Optional[CheckReport] = None
    residuals: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _q_root(Q: np.ndarray, rank_tol: float) -> np.ndarray:
    """``V`` with ``V^* V = Q`` and trivial kernel on ``ran Q``."""
    mu, E = np.linalg.eigh(Q)
    top = max(float(mu.max(initial=0.0)), 0.0)
    keep = mu > rank_tol * max(top, 1.0)
    if keep.all():
        # full rank: stay in the original coordinates so that Q = I gives V = I
        return (E * np.sqrt(mu)) @ E.conj().T
    return np.sqrt(mu[keep])[:, None] * E[:, keep].conj().T


def _extension_parts(t: OperatorTuple, Q: np.ndarray, rank_tol: float):
    V = _q_root(Q, rank_tol)
    Vp = np.linalg.pinv(V, rcond=rank_tol) if V.size else np.zeros((t.dim, 0))
    U = V @ t.P @ Vp
    R = [V @ s @ Vp for s in t.S]
    res = {
        "V*V-Q": _norm(V.conj().T @ V - Q),
        "VP-UV": _norm(V @ t.P - U @ V),
        "U*U-I": _norm(U.conj().T @ U - np.eye(U.shape[0])),
    }
    for i, (s, r) in enumerate(zip(t.S, R), start=1):
        res[f"VS{i}-R{i}V"] = _norm(V @ s - r @ V)
    return R, U, V, res


def extend_via_Q(t: OperatorTuple, tol: float = RELATION_TOL, rank_tol: float = 1e-6,
                 Q: np.ndarray | None = None) -> ExtensionTriple:
    """``(R, U)`` on ``K = ran Q^{1/2}`` with ``V P = U V`` and ``V S_i = R_i V``."""
    Q = compute_Q(t.P) if Q is None else Q
    if not nonemptiness_check(t, Q=Q):
        raise NotApplicable("P^* is pure (Q = 0); there is nothing to extend")
    R, U, V, res = _extension_parts(t, Q, rank_tol)
    worst_name = max(res, key=res.get)
    if res[worst_name] > tol:
        raise ExtensionIllDefined(f"{worst_name} residual {res[worst_name]:.3g} exceeds {tol}",
                                  res[worst_name])
    report = check_gamma_unitary([*R, U], tol)
    return ExtensionTriple(R, U, V, V.shape[0], report, res)


def _words(letters: int, max_degree: int):
    for k in range(max_degree + 1):
        yield from itertools.product(range(letters), repeat=k)


def extension_moments(triple: ExtensionTriple, max_degree: int = 3) -> dict[str, np.ndarray]:
    """``V^* f V`` for every word ``f`` of length ``<= max_degree`` in ``R_i, R_i^*, U, U^*``.

    Entry ``(h', h)`` is the moment ``<f(R, R^*) V h, V h'>``.
    """
    base = [*triple.R, triple.U]
    names = [f"R{i + 1}" for i in range(len(triple.R))] + ["U"]
    letters = base + [A.conj().T for A in base]
    labels = names + [nm + "*" for nm in names]
    V = triple.V
    out = {}
    for word in _words(len(letters), max_degree):
        M = np.eye(V.shape[0], dtype=complex)
        for k in word:
            M = M @ letters[k]
        out[".".join(labels[k] for k in word) or "1"] = V.conj().T @ M @ V
    return out


# --- Gamma_2 embedding ----------------------------------------------------------

def gamma2_pi_embedding(t: OperatorTuple, N: int = 60, tol: float = RELATION_TOL,
                        rank_tol: float = 1e-6) -> CheckReport:
    """Truncated ``Pi h = (D_P P^j h)_{j<N} (+) Q^{1/2} h`` and its residuals.

    ``Pi`` intertwines ``P`` with the backward shift plus ``U`` and ``S``
    with the adjoint of ``T_{F^* + F z}`` plus ``R``.  The second block is
    compared against the extension triple, whose adjoint pair is the
    unitary part of the Wold decomposition.
    """
    if t.n != 2:
        raise InvalidDimension("the Pi embedding is implemented for n = 2")
    P, S = t.P, t.S[0]
    dim = t.dim
    Q = compute_Q(P)
    D, _, _ = defect_operator(P, rank_tol)
    F, _ = fundamental_operators(t, tol, rank_tol)
    F = F[0]
    R, U, V, ext_res = _extension_parts(t, Q, rank_tol)
    k = V.shape[0]

    slots, Pj = [], np.eye(dim, dtype=complex)
    for _ in range(N):
        slots.append(D @ Pj)
        Pj = P @ Pj
    Pi = np.vstack(slots + [V])
    col = _Collector(tol)
    defect = _norm(Pi.conj().T @ Pi - np.eye(dim))
    col.scalar("isometry defect", defect)
    col.scalar("tail |Q - P*^N P^N|", _norm(Q - Pj.conj().T @ Pj))

    # P: slot j of Pi P is slot j+1 of Pi; the second block moves by U
    col.scalar("Pi P = shift* Pi (slots)",
               max((_norm(slots[j] @ P - slots[j + 1]) for j in range(N - 1)), default=0.0))
    col.scalar("V P = U V", ext_res["VP-UV"])
    # S: slot j of Pi S is F D_P P^j + F^* D_P P^(j+1)
    col.scalar("Pi S = T*_(F*+Fz) Pi (slots)",
               max((_norm(slots[j] @ S - F @ slots[j] - F.conj().T @ slots[j + 1])
                    for j in range(N - 1)), default=0.0))
    col.scalar("V S = R V", ext_res["VS1-R1V"])

    # Wold block: (R^*, U^*) restricted to K must be a Gamma_2-unitary of size rank Q
    col.scalar("V*V = Q", ext_res["V*V-Q"])
    if k:
        wold = check_gamma_unitary([R[0].conj().T, U.conj().T], tol)
        col.scalar("Wold unitary part", wold.max_residual)
        shift = np.eye(N, k=-1)
        V1 = scipy.linalg.block_diag(np.kron(shift, np.eye(dim)), U.conj().T)
        unimodular = int(np.sum(np.abs(np.abs(np.linalg.eigvals(V1)) - 1) < 1e-6))
        col.scalar("unimodular count mismatch", float(abs(unimodular - k)))
    report = col.report(N=N, K_dim=k, dim=dim)
    if defect > tol:
        raise SlowConvergence(f"isometry defect {defect:.3g} above {tol} at N={N}", defect)
    return report


# --- generators --------------------------------------------------------------------

def generate_symmetrized_tuple(n: int, eigenvalues, seed: int | None = None) -> OperatorTuple:
    """Symmetrize commuting normal ``T_1..T_n`` with the given joint eigenvalues.

    ``eigenvalues`` has shape ``(dim, n)``; row ``k`` is the joint eigenvalue
    on the k-th eigenvector.  With a seed the tuple is conjugated by a Haar
    random unitary, otherwise it stays diagonal.
    """
    lam = np.atleast_2d(np.asarray(eigenvalues, dtype=complex))
    if lam.shape[1] != n:
        raise InvalidSpec(f"eigenvalue rows must have length {n}")
    if np.any(np.abs(lam) > 1 + 1e-12):
        raise InvalidSpec("eigenvalues must lie in the closed unit disk")
    e = np.array([elementary_symmetric(row) for row in lam])
    diag = [np.diag(e[:, i]) for i in range(1, n + 1)]
    if seed is not None:
        W = unitary_group.rvs(lam.shape[0], random_state=seed) if lam.shape[0] > 1 else np.eye(1)
        Wh = W.conj().T
        diag = [W @ d @ Wh for d in diag]
    return OperatorTuple(tuple(diag[:-1]), diag[-1])


def random_eigenvalues(n: int, dim: int, rng: np.random.Generator, p_unimodular: float = 0.5,
                       max_modulus: float = 0.9) -> np.ndarray:
    """Each coordinate is unimodular with probability ``p_unimodular``, else of modulus ``<= max_modulus``."""
    phase = np.exp(2j * np.pi * rng.random((dim, n)))
    modulus = np.where(rng.random((dim, n)) < p_unimodular, 1.0, max_modulus * rng.random((dim, n)))
    return modulus * phase


def random_symmetrized_tuple(n: int, dim: int, rng: np.random.Generator, p_unimodular: float = 0.5,
                             max_modulus: float = 0.9, conjugate: bool = True) -> OperatorTuple:
    lam = random_eigenvalues(n, dim, rng, p_unimodular, max_modulus)
    seed = int(rng.integers(2**31)) if conjugate else None
    return generate_symmetrized_tuple(n, lam, seed)


# --- sampled spectral-set inequality ------------------------------------------------

def _poly_terms(n: int, max_deg: int) -> list[tuple[int, ...]]:
    return [a for a in itertools.product(range(max_deg + 1), repeat=n) if sum(a) <= max_deg]


def _eval_poly_matrix(terms, coeffs, ops) -> np.ndarray:
    dim = ops[0].shape[0]
    powers = []
    for A in ops:
        pw = [np.eye(dim, dtype=complex)]
        for _ in range(max(a[len(powers)] for a in terms)):
            pw.append(pw[-1] @ A)
        powers.append(pw)
    out = np.zeros((dim, dim), dtype=complex)
    for a, c in zip(terms, coeffs):
        M = np.eye(dim, dtype=complex)
        for k, ak in enumerate(a):
            M = M @ powers[k][ak]
        out += c * M
    return out


def _eval_poly_points(terms, coeffs, pts) -> np.ndarray:
    out = np.zeros(pts.shape[0], dtype=complex)
    for a, c in zip(terms, coeffs):
        out += c * np.prod(pts ** np.asarray(a), axis=1)
    return out


def _symmetrized_torus(theta: np.ndarray) -> np.ndarray:
    z = np.exp(1j * np.atleast_2d(theta))
    return np.array([elementary_symmetric(row)[1:] for row in z])


def check_gamma_contraction_sampled(t: OperatorTuple, trials: int = 20, max_deg: int = 3,
                                    grid: int = 16, seed: int = 0, tol: float = RELATION_TOL,
                                    refine: int = 3) -> CheckReport:
    """Compare ``||f(S, P)||`` with the sup of ``|f|`` over ``s(T^n)`` for random ``f``.

    The sup over the torus grid is polished by local maximization from the
    best grid points.  Passing is only a necessary condition for Gamma_n
    being a spectral set.  The last coordinate polynomial is always tried.
    """
    n = t.n
    rng = np.random.default_rng(seed)
    terms = _poly_terms(n, max_deg)
    axes = np.meshgrid(*([2 * np.pi * np.arange(grid) / grid] * n), indexing="ij")
    thetas = np.stack([a.ravel() for a in axes], axis=1)
    grid_pts = _symmetrized_torus(thetas)
    candidates = []
    last = tuple([0] * (n - 1) + [1])
    candidates.append(np.array([1.0 if a == last else 0.0 for a in terms], dtype=complex))
    for _ in range(trials):
        candidates.append(rng.normal(size=len(terms)) + 1j * rng.normal(size=len(terms)))
    worst_margin, worst = math.inf, None
    for k, coeffs in enumerate(candidates):
        op_norm = _norm(_eval_poly_matrix(terms, coeffs, t.ops))
        vals = np.abs(_eval_poly_points(terms, coeffs, grid_pts))
        sup = float(vals.max())
        for start in np.argsort(vals)[-refine:]:
            res = scipy.optimize.minimize(
                lambda th: -abs(_eval_poly_points(terms, coeffs, _symmetrized_torus(th))[0]),
                thetas[start], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
            sup = max(sup, -float(res.fun))
        margin = sup - op_norm
        if margin < worst_margin:
            worst_margin, worst = margin, k
    report = CheckReport(passed=bool(worst_margin >= -tol), max_residual=max(0.0, -worst_margin),
                         tolerance=tol, witness=[int(worst), float(worst_margin)],
                         relations={"spectral-set margin": -worst_margin},
                         details={"trials": len(candidates), "worst_margin": worst_margin})
    return report
