"""Pointwise symmetric-function evaluation and Gamma_n membership."""
from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .errors import EvaluationDomain, NumericalFailure
from .partitions import StrictPartition

DEFAULT_TOL = 1e-9

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class Membership(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY_DISTINGUISHED = "boundary_distinguished"
    INSIDE_NOT_BGAMMA = "inside_not_bGamma"
    OUTSIDE = "outside"


def elementary_symmetric(z: Sequence[complex]) -> np.ndarray:
    """Return ``(e_0, e_1, ..., e_n)`` of the coordinates of ``z``."""
    z = np.asarray(z, dtype=complex)
    e = np.zeros(len(z) + 1, dtype=complex)
    e[0] = 1.0
    for k, zk in enumerate(z, start=1):
        # e_j(z_1..z_k) = e_j(z_1..z_{k-1}) + z_k e_{j-1}(z_1..z_{k-1})
        e[1 : k + 1] = e[1 : k + 1] + zk * e[0:k]
    return e


def symmetrize_point(z: Sequence[complex]) -> np.ndarray:
    """The symmetrization map ``z -> (s_1(z), ..., s_n(z))``."""
    return elementary_symmetric(z)[1:]


def jacobian_matrix(z: Sequence[complex]) -> np.ndarray:
    """Derivative matrix ``d s_i / d z_j``.

    Differentiating ``s_i`` in ``z_j`` leaves ``s_{i-1}`` of the remaining
    coordinates, so the matrix is exact without finite differences.
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)
    J = np.empty((n, n), dtype=complex)
    for j in range(n):
        rest = np.delete(z, j)
        J[:, j] = elementary_symmetric(rest)[:n]
    return J


def jacobian_at(z: Sequence[complex]) -> complex:
    """Complex Jacobian determinant of the symmetrization map.

    With this convention it equals ``prod_{i<j} (z_i - z_j)``, which is
    also ``a_(n-1,...,1,0)(z)``. The product form is used: an LU
    factorisation of ``jacobian_matrix`` returns NaN once entries underflow.
    """
    return vandermonde_product(z)


def vandermonde_product(z: Sequence[complex]) -> complex:
    z = np.asarray(z, dtype=complex)
    out = 1.0 + 0j
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            out *= z[i] - z[j]
    return complex(out)


def eval_antisym(p: StrictPartition | Sequence[int], z: Sequence[complex]) -> complex:
    """``a_p(z) = det(z_i ** p_j)``."""
    entries = p.entries if isinstance(p, StrictPartition) else tuple(p)
    z = np.asarray(z, dtype=complex)
    if min(entries) < 0 and np.any(z == 0):
        raise EvaluationDomain("negative exponent at a zero coordinate")
    M = z[:, None] ** np.asarray(entries)[None, :]
    # subnormal entries make LAPACK's LU return NaN
    M[np.abs(M) < _TINY] = 0
    return complex(np.linalg.det(M))


def eval_antisym_grid(p: Sequence[int], points: np.ndarray) -> np.ndarray:
    """Vectorised ``a_p`` over an array of points of shape ``(..., n)``."""
    points = np.asarray(points, dtype=complex)
    M = points[..., :, None] ** np.asarray(tuple(p))[None, :]
    M[np.abs(M) < _TINY] = 0
    return np.linalg.det(M)


def _cluster_radius(roots: np.ndarray) -> float:
    # a k-fold root perturbed by rounding splits by about eps^(1/k)
    n = len(roots)
    scale = 1.0 + float(np.max(np.abs(roots), initial=0.0))
    return max(1e-7, 10 * (_EPS * scale) ** (1.0 / n))


def _cluster_moduli(roots: np.ndarray) -> np.ndarray:
    """Moduli with each near-coincident cluster replaced by the modulus of its centroid.

    A multiple root split by rounding lies on a small star around the true
    root; the centroid is accurate to O(eps) while single members are only
    accurate to O(eps^(1/k)).
    """
    roots = np.asarray(roots)
    n = len(roots)
    radius = _cluster_radius(roots)
    labels = list(range(n))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) < radius:
                labels[find(i)] = find(j)
    out = np.abs(roots).astype(float)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for members in groups.values():
        out[members] = abs(roots[members].mean())
    return out


def gamma_roots(c: Sequence[complex]) -> np.ndarray:
    """Roots of ``t^n - c_1 t^(n-1) + c_2 t^(n-2) - ... + (-1)^n c_n``."""
    c = np.asarray(c, dtype=complex)
    n = len(c)
    coeffs = np.empty(n + 1, dtype=complex)
    coeffs[0] = 1.0
    for i in range(1, n + 1):
        coeffs[i] = (-1) ** i * c[i - 1]
    if not np.all(np.isfinite(coeffs)):
        raise NumericalFailure("non-finite coordinates")
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(str(exc)) from exc
    if len(roots) != n or not np.all(np.isfinite(roots)):
        raise NumericalFailure("root finder did not return n finite roots")
    return roots


def membership_gamma(c: Sequence[complex], tol: float = DEFAULT_TOL) -> Membership:
    """Classify a point of C^n relative to Gamma_n and its distinguished boundary."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = np.asarray(c, dtype=complex)
    roots = gamma_roots(c)
    mods = _cluster_moduli(roots)
    # the boundary test runs first: near a multiple root on the circle the
    # forward moduli can drift below 1 - tol while the backward test still holds
    if np.all(np.abs(mods - 1) <= tol) or _backward_ok(c, roots, tol, onto_circle=True):
        return Membership.BOUNDARY_DISTINGUISHED
    if np.all(mods < 1 - tol):
        return Membership.INTERIOR
    if np.all(mods <= 1 + tol) or _backward_ok(c, roots, tol, onto_circle=False):
        return Membership.INSIDE_NOT_BGAMMA
    return Membership.OUTSIDE


def _backward_ok(c: np.ndarray, roots: np.ndarray, tol: float, onto_circle: bool) -> bool:
    """Do the roots moved onto the circle (or into the disk) symmetrize back to ``c``?

    Roots of a near-multiple factor carry forward error ~ eps / gap^(k-1),
    which can exceed ``tol`` while the point itself is within rounding of
    the set; this backward test catches those.
    """
    mods = np.abs(roots)
    if onto_circle:
        if np.any(mods == 0):
            return False
        moved = roots / mods
    else:
        moved = roots / np.maximum(mods, 1.0)
    scale = 1.0 + float(np.max(np.abs(c), initial=0.0))
    return bool(np.max(np.abs(symmetrize_point(moved) - c)) <= tol * scale)


def in_closed_polydisk(z: Sequence[complex], tol: float = 0.0) -> bool:
    return bool(np.max(np.abs(np.asarray(z, dtype=complex))) <= 1 + tol)
