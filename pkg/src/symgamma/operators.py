"""Exact assembly of truncated Laurent, Toeplitz, Hankel and dual Toeplitz matrices.

Coordinates are taken with respect to the orthonormal vectors
``e_p = a_p / sqrt(n!)``.  The identity ``s_m a_p = sum_sigma a_(p + m_sigma)``
makes every matrix entry a finite signed sum of coefficients, so no
quadrature is involved.  The three Hardy-space models share these
coordinates; the unitaries between them are index conventions.

Every :class:`TruncatedOperator` carries two integers of bookkeeping:

``reach``
    how far (in the grade ``p_1`` and, on the Laurent side, ``p_n``) the
    operator can move a basis index; ``inf`` when unknown.
``interior_depth``
    entries whose row and column both sit at least this far from the
    truncation boundary equal those of the untruncated operator.

Products combine them as ``depth = max(depths) + min(reaches)`` and
``reach = sum(reaches)``.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidDimension, NotAToeplitzOperator, WindowTooSmall
from .partitions import (
    BasisWindow,
    Exponent,
    Side,
    StrictPartition,
    antisymmetrize_exponent,
    enumerate_window,
    f_vector,
    orbit_of_exponent,
)
from .symbols import SymbolExpansion, conjugate_symbol

INF = math.inf


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: np.ndarray
    domain: BasisWindow
    codomain: BasisWindow
    interior_depth: float = 0
    reach: float = INF
    label: str = field(default="", compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.codomain), len(self.domain)):
            raise ValueError(
                f"matrix shape {m.shape} does not match windows "
                f"({len(self.codomain)}, {len(self.domain)})"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def H(self) -> "TruncatedOperator":
        return TruncatedOperator(self.matrix.conj().T, self.codomain, self.domain,
                                 self.interior_depth, self.reach, self.label + "*")

    adjoint = H

    def _check_compatible(self, other: "TruncatedOperator"):
        if self.domain != other.domain or self.codomain != other.codomain:
            raise ValueError("operators act between different windows")

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return self.matrix @ other
        if not isinstance(other, TruncatedOperator):
            return NotImplemented
        if self.domain != other.codomain:
            raise ValueError("window mismatch in composition")
        depth = max(self.interior_depth, other.interior_depth) + min(self.reach, other.reach)
        return TruncatedOperator(self.matrix @ other.matrix, other.domain, self.codomain,
                                 depth, self.reach + other.reach)

    def __add__(self, other):
        if not isinstance(other, TruncatedOperator):
            return NotImplemented
        self._check_compatible(other)
        return TruncatedOperator(self.matrix + other.matrix, self.domain, self.codomain,
                                 max(self.interior_depth, other.interior_depth),
                                 max(self.reach, other.reach))

    def __neg__(self):
        return replace(self, matrix=-self.matrix)

    def __sub__(self, other):
        if not isinstance(other, TruncatedOperator):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return replace(self, matrix=self.matrix * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def power(self, k: int) -> "TruncatedOperator":
        if self.domain != self.codomain:
            raise ValueError("power of a non-square operator")
        out = identity(self.domain)
        for _ in range(k):
            out = self @ out
        return out

    def interior(self, depth: float | None = None) -> tuple[list[int], list[int]]:
        depth = self.interior_depth if depth is None else depth
        return self.codomain.interior_indices(depth), self.domain.interior_indices(depth)

    def interior_block(self, depth: float | None = None) -> np.ndarray:
        rows, cols = self.interior(depth)
        return self.matrix[np.ix_(rows, cols)]

    def entry(self, q: StrictPartition | Sequence[int], p: StrictPartition | Sequence[int]) -> complex:
        q, p = _as_partition(q), _as_partition(p)
        return complex(self.matrix[self.codomain.index[q], self.domain.index[p]])

    def column(self, p: StrictPartition | Sequence[int]) -> dict[StrictPartition, complex]:
        """Non-zero entries of the image of ``e_p``."""
        j = self.domain.index[_as_partition(p)]
        col = self.matrix[:, j]
        return {self.codomain[i]: complex(col[i]) for i in np.flatnonzero(col)}


def _as_partition(p) -> StrictPartition:
    return p if isinstance(p, StrictPartition) else StrictPartition(tuple(p))


def identity(window: BasisWindow) -> TruncatedOperator:
    return TruncatedOperator(np.eye(len(window), dtype=complex), window, window, 0, 0, "I")


def zero(window: BasisWindow, codomain: BasisWindow | None = None) -> TruncatedOperator:
    codomain = window if codomain is None else codomain
    return TruncatedOperator(np.zeros((len(codomain), len(window)), dtype=complex),
                             window, codomain, 0, 0, "0")


# --- assembly -----------------------------------------------------------------

def multiplication_matrix(phi: SymbolExpansion, codomain: BasisWindow, domain: BasisWindow) -> np.ndarray:
    """Entry ``(q, p)``: sum of ``alpha_m * eps`` over sigma with ``p + m_sigma ~ eps * q``."""
    if phi.n != domain.n or phi.n != codomain.n:
        raise InvalidDimension("symbol and window dimensions differ")
    out = np.zeros((len(codomain), len(domain)), dtype=complex)
    orbits = [(alpha, orbit_of_exponent(m)) for m, alpha in phi.items()]
    index = codomain.index
    for j, p in enumerate(domain):
        pe = p.entries
        for alpha, orbit in orbits:
            # integer sign counts first, so entries are alpha times an integer
            counts: dict[int, int] = {}
            for t in orbit:
                hit = antisymmetrize_exponent(a + b for a, b in zip(pe, t))
                if hit is None:
                    continue
                q, sign = hit
                i = index.get(q)
                if i is not None:
                    counts[i] = counts.get(i, 0) + sign
            for i, c in counts.items():
                out[i, j] += c * alpha
    return out


def assemble(phi: SymbolExpansion, window: BasisWindow, codomain: BasisWindow | None = None,
             label: str = "") -> TruncatedOperator:
    codomain = window if codomain is None else codomain
    return TruncatedOperator(multiplication_matrix(phi, codomain, window), window, codomain,
                             0, phi.max_abs, label)


def assemble_laurent(phi: SymbolExpansion, window: BasisWindow) -> TruncatedOperator:
    """Truncated Laurent (multiplication) operator ``M_phi`` on a Laurent window."""
    if window.side is not Side.LAURENT:
        raise ValueError("assemble_laurent needs a laurent window")
    return assemble(phi, window, label="M")


def toeplitz(phi: SymbolExpansion, D: int) -> TruncatedOperator:
    """Direct Toeplitz assembly ``T_phi`` on the analytic window of bound ``D``."""
    return assemble(phi, enumerate_window(phi.n, D, Side.ANALYTIC), label="T")


class Blocks(NamedTuple):
    toeplitz: TruncatedOperator       # analytic -> analytic
    hankel: TruncatedOperator         # analytic -> coanalytic, H_phi
    hankel_conj_adj: TruncatedOperator  # coanalytic -> analytic, H_{conj phi}^*
    dual: TruncatedOperator           # coanalytic -> coanalytic, DT_phi


def split_windows(window: BasisWindow) -> tuple[BasisWindow, BasisWindow, list[int], list[int]]:
    ana = enumerate_window(window.n, window.D, Side.ANALYTIC)
    co = enumerate_window(window.n, window.D, Side.COANALYTIC)
    return ana, co, [window.index[p] for p in ana], [window.index[p] for p in co]


def split_blocks(L: TruncatedOperator) -> Blocks:
    """The 2x2 block decomposition of a Laurent operator along H^2 and its complement."""
    if L.domain.side is not Side.LAURENT or L.domain != L.codomain:
        raise ValueError("split_blocks needs a square operator on a laurent window")
    ana, co, ia, ic = split_windows(L.domain)
    m = L.matrix

    def block(rows, cols, rw, cw, label):
        return TruncatedOperator(m[np.ix_(rows, cols)], cw, rw, L.interior_depth, L.reach, label)

    return Blocks(
        block(ia, ia, ana, ana, "T"),
        block(ic, ia, co, ana, "H"),
        block(ia, ic, ana, co, "H*"),
        block(ic, ic, co, co, "DT"),
    )


def reassemble(blocks: Blocks, window: BasisWindow) -> np.ndarray:
    _, _, ia, ic = split_windows(window)
    out = np.zeros((len(window), len(window)), dtype=complex)
    out[np.ix_(ia, ia)] = blocks.toeplitz.matrix
    out[np.ix_(ic, ia)] = blocks.hankel.matrix
    out[np.ix_(ia, ic)] = blocks.hankel_conj_adj.matrix
    out[np.ix_(ic, ic)] = blocks.dual.matrix
    return out


def hankel(phi: SymbolExpansion, D: int) -> TruncatedOperator:
    return split_blocks(assemble_laurent(phi, enumerate_window(phi.n, D, Side.LAURENT))).hankel


def dual_toeplitz(phi: SymbolExpansion, D: int) -> TruncatedOperator:
    return split_blocks(assemble_laurent(phi, enumerate_window(phi.n, D, Side.LAURENT))).dual


# --- the coordinate Gamma_n-isometry and the shifts Y_j ---------------------------

@dataclass(frozen=True)
class CoordinateTuple:
    """``(S_1, ..., S_{n-1}, P)`` as truncated operators on one window."""

    S: tuple[TruncatedOperator, ...]
    P: TruncatedOperator

    @property
    def n(self) -> int:
        return len(self.S) + 1

    @property
    def window(self) -> BasisWindow:
        return self.P.domain

    @property
    def ops(self) -> tuple[TruncatedOperator, ...]:
        return (*self.S, self.P)

    def __iter__(self):
        return iter(self.ops)

    @property
    def max_reach(self) -> float:
        return max(op.reach for op in self.ops)


def coordinate_tuple(n: int, D: int) -> CoordinateTuple:
    """``(T_{s_1}, ..., T_{s_{n-1}}, T_p)`` on the analytic window of bound ``D``."""
    if n < 2:
        raise InvalidDimension(f"n must be at least 2, got {n}")
    if D < n - 1:
        raise WindowTooSmall(f"D={D} gives an empty analytic window for n={n}")
    S = tuple(toeplitz(SymbolExpansion.elementary(n, i), D) for i in range(1, n))
    P = toeplitz(SymbolExpansion.elementary(n, n), D)
    return CoordinateTuple(S, P)


def dual_tuple(n: int, D: int) -> CoordinateTuple:
    """``(DT_{conj s_1}, ..., DT_{conj p})`` on the co-analytic window."""
    S = tuple(dual_toeplitz(conjugate_symbol(SymbolExpansion.elementary(n, i)), D) for i in range(1, n))
    P = dual_toeplitz(conjugate_symbol(SymbolExpansion.elementary(n, n)), D)
    return CoordinateTuple(S, P)


def shift_operator(t: Sequence[int], window: BasisWindow, label: str = "") -> TruncatedOperator:
    """``e_p -> e_(p+t)`` when ``p + t`` is a partition of the window, else 0."""
    out = np.zeros((len(window), len(window)), dtype=complex)
    for j, p in enumerate(window):
        image = tuple(a + b for a, b in zip(p.entries, t))
        if all(a > b for a, b in zip(image, image[1:])):
            i = window.index.get(StrictPartition(image))
            if i is not None:
                out[i, j] = 1.0
    reach = max(abs(x) for x in t)
    return TruncatedOperator(out, window, window, 0, reach, label)


def y_shift(j: int, n: int, D: int) -> TruncatedOperator:
    """``Y_j e_p = e_(p + f_j)`` with ``f_j = (1, ..., 1, 0, ..., 0)`` (j ones)."""
    if not 1 <= j <= n - 1:
        raise ValueError(f"need 1 <= j <= n-1, got j={j}")
    return shift_operator(f_vector(j, n), enumerate_window(n, D, Side.ANALYTIC), f"Y{j}")


def u1_reindex(n: int, D: int) -> dict[StrictPartition, tuple[int, StrictPartition]]:
    """``a_p -> z^(p_n) a_(p - p_n)``: coordinates of the vector-valued Hardy model."""
    window = enumerate_window(n, D, Side.ANALYTIC)
    return {p: (p.entries[-1], StrictPartition(tuple(x - p.entries[-1] for x in p.entries)))
            for p in window}


def u1_inverse(k: int, base: StrictPartition) -> StrictPartition:
    if base.entries[-1] != 0:
        raise ValueError("coefficient-space partitions end in 0")
    return StrictPartition(tuple(x + k for x in base.entries))


# --- symbol recovery ------------------------------------------------------------

class SymbolFit(NamedTuple):
    symbol: SymbolExpansion
    residual: float


def candidate_exponents(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponents with ``|m_i| <= d``."""
    return list(itertools.combinations_with_replacement(range(d, -d - 1, -1), n))


def recover_symbol(X: TruncatedOperator, d: int, tol: float = 1e-8,
                   prune: float = 1e-10) -> SymbolFit:
    """Least-squares symbol whose Toeplitz compression reproduces ``X``.

    Raises :class:`NotAToeplitzOperator` when the best fit leaves an entry
    residual above ``tol``.
    """
    window = X.domain
    if window.side is not Side.ANALYTIC or X.codomain != window:
        raise ValueError("recover_symbol needs a square operator on an analytic window")
    n = window.n
    exps = candidate_exponents(n, d)
    design = np.empty((len(window) ** 2, len(exps)), dtype=complex)
    for k, m in enumerate(exps):
        design[:, k] = multiplication_matrix(SymbolExpansion(n, {m: 1.0}), window, window).ravel()
    target = X.matrix.ravel()
    alpha, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.max(np.abs(design @ alpha - target), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(alpha), initial=0.0)))
    symbol = SymbolExpansion(n, dict(zip(exps, alpha)), atol=prune * scale)
    if residual > tol:
        raise NotAToeplitzOperator(f"no symbol with |m_i| <= {d} fits (residual {residual:.3g})",
                                   residual)
    return SymbolFit(symbol, residual)


# --- export -----------------------------------------------------------------------

def _depth_to_json(x):
    return None if x == INF else int(x)


def _sidecar(csv_path) -> str:
    root, _ = os.path.splitext(os.fspath(csv_path))
    return root + ".json"


def operator_metadata(op: TruncatedOperator) -> dict:
    return {
        "domain": op.domain.to_dict(),
        "codomain": op.codomain.to_dict(),
        "interior_depth": _depth_to_json(op.interior_depth),
        "reach": _depth_to_json(op.reach),
        "shape": list(op.shape),
        "label": op.label,
    }


def export_operator(op: TruncatedOperator, csv_path: str | os.PathLike,
                    json_path: str | os.PathLike | None = None) -> None:
    """Write non-zero entries as ``row_index,col_index,re,im`` plus a JSON sidecar."""
    if json_path is None:
        json_path = _sidecar(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_index", "col_index", "re", "im"])
        rows, cols = np.nonzero(op.matrix)
        for i, j in zip(rows, cols):
            v = op.matrix[i, j]
            writer.writerow([int(i), int(j), repr(float(v.real)), repr(float(v.imag))])
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(operator_metadata(op), fh, indent=2)


def load_operator(csv_path: str | os.PathLike, json_path: str | os.PathLike | None = None) -> TruncatedOperator:
    if json_path is None:
        json_path = _sidecar(csv_path)
    with open(json_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    domain = BasisWindow.from_dict(meta["domain"])
    codomain = BasisWindow.from_dict(meta["codomain"])
    matrix = np.zeros((len(codomain), len(domain)), dtype=complex)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["row_index", "col_index", "re", "im"]:
            raise ValueError("unexpected CSV header")
        for row in reader:
            if not row:
                continue
            i, j = int(row[0]), int(row[1])
            matrix[i, j] = complex(float(row[2]), float(row[3]))
    depth = meta.get("interior_depth")
    reach = meta.get("reach")
    return TruncatedOperator(matrix, domain, codomain,
                             INF if depth is None else depth,
                             INF if reach is None else reach,
                             meta.get("label", ""))
