"""Boundary symbols as finite expansions over the symmetrized monomials ``s_m``.

``s_m(z) = sum over all permutations sigma of z ** m_sigma``, summed over
every one of the ``n!`` permutations, so repeated entries of ``m`` are
counted with multiplicity.  In particular the constant function 1 is
``s_(0,...,0) / n!``.
"""
from __future__ import annotations

import itertools
import math
import os
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EvaluationDomain, GridTooCoarse, InvalidPartition, SymmetryViolation
from .partitions import Exponent, f_vector, orbit_of_exponent

TORUS_TOL = 1e-12


def _key(m) -> tuple[int, ...]:
    return Exponent(tuple(m)).entries


class SymbolExpansion:
    """Finite map ``Exponent -> complex`` representing ``phi o s`` on the torus."""

    __slots__ = ("n", "_coeffs")

    def __init__(self, n: int, coeffs: Mapping[Sequence[int], complex] | None = None, atol: float = 0.0):
        self.n = int(n)
        out: dict[tuple[int, ...], complex] = {}
        for m, a in (coeffs or {}).items():
            key = _key(m)
            if len(key) != self.n:
                raise InvalidPartition(f"exponent {key} has length {len(key)}, expected {self.n}")
            out[key] = out.get(key, 0j) + complex(a)
        self._coeffs = {m: a for m, a in out.items() if abs(a) > atol}

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "SymbolExpansion":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: complex = 1.0) -> "SymbolExpansion":
        return cls(n, {(0,) * n: complex(value) / math.factorial(n)})

    @classmethod
    def elementary(cls, n: int, i: int) -> "SymbolExpansion":
        """The coordinate function ``s_i`` of Gamma_n pulled back to the torus."""
        if not 0 <= i <= n:
            raise ValueError(f"need 0 <= i <= n, got {i}")
        return cls(n, {f_vector(i, n): 1.0 / (math.factorial(i) * math.factorial(n - i))})

    @classmethod
    def from_monomials(cls, n: int, monomials: Mapping[Sequence[int], complex], atol: float = 0.0) -> "SymbolExpansion":
        """Re-expand a symmetric trigonometric polynomial given by monomial coefficients."""
        coeffs = {}
        for t, c in monomials.items():
            t = tuple(t)
            if all(a >= b for a, b in zip(t, t[1:])):
                coeffs[t] = c / Exponent(t).stabilizer_order()
        return cls(n, coeffs, atol=atol)

    # container protocol ---------------------------------------------------
    @property
    def coeffs(self) -> dict[tuple[int, ...], complex]:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __getitem__(self, m) -> complex:
        return self._coeffs.get(_key(m), 0j)

    def __repr__(self) -> str:
        body = ", ".join(f"{m}: {a:.6g}" for m, a in sorted(self._coeffs.items()))
        return f"SymbolExpansion(n={self.n}, {{{body}}})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolExpansion):
            return NotImplemented
        return self.n == other.n and self._coeffs == other._coeffs

    __hash__ = None

    def is_zero(self) -> bool:
        return not self._coeffs

    # degree bookkeeping ---------------------------------------------------
    @property
    def degree(self) -> int:
        """Largest spread ``m_1 - m_n`` over the stored exponents."""
        return max((m[0] - m[-1] for m in self._coeffs), default=0)

    @property
    def max_abs(self) -> int:
        """Largest ``|m_i|``; bounds how far multiplication moves a basis index."""
        return max((max(abs(x) for x in m) for m in self._coeffs), default=0)

    @property
    def is_analytic(self) -> bool:
        return all(m[-1] >= 0 for m in self._coeffs)

    # algebra ------------------------------------------------------------
    def _check_same_n(self, other: "SymbolExpansion"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, SymbolExpansion):
            return NotImplemented
        self._check_same_n(other)
        out = defaultdict(complex, self._coeffs)
        for m, a in other.items():
            out[m] += a
        return SymbolExpansion(self.n, {m: a for m, a in out.items() if a != 0})

    def __neg__(self):
        return SymbolExpansion(self.n, {m: -a for m, a in self.items()})

    def __sub__(self, other):
        if not isinstance(other, SymbolExpansion):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SymbolExpansion):
            return multiply_symbols(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return SymbolExpansion(self.n, {m: a * other for m, a in self.items()})
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "SymbolExpansion":
        return conjugate_symbol(self)

    def monomials(self) -> dict[tuple[int, ...], complex]:
        """Fourier coefficients on the torus, keyed by (unsorted) exponent."""
        out: dict[tuple[int, ...], complex] = defaultdict(complex)
        for m, a in self.items():
            for t in orbit_of_exponent(m):
                out[t] += a
        return dict(out)

    def __call__(self, z):
        return eval_symbol(self, z)

    def distance(self, other: "SymbolExpansion") -> float:
        """Max coefficient difference."""
        self._check_same_n(other)
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self[m] - other[m]) for m in keys), default=0.0)


def eval_symbol(phi: SymbolExpansion, z, check_torus: bool = True):
    """Evaluate ``phi o s`` at torus point(s) ``z`` of shape ``(..., n)``."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != phi.n:
        raise ValueError(f"points must have last dimension {phi.n}")
    if check_torus and np.any(np.abs(np.abs(z) - 1) > TORUS_TOL):
        raise EvaluationDomain("symbol evaluation requires points on the unit torus")
    out = np.zeros(z.shape[:-1], dtype=complex)
    for t, c in phi.monomials().items():
        out = out + c * np.prod(z ** np.asarray(t), axis=-1)
    if out.ndim == 0:
        return complex(out)
    return out


def conjugate_symbol(phi: SymbolExpansion) -> SymbolExpansion:
    """Pointwise conjugate on the torus: ``m -> reverse(-m)``, coefficient conjugated."""
    return SymbolExpansion(phi.n, {tuple(-x for x in reversed(m)): np.conj(a) for m, a in phi.items()})


def multiply_symbols(phi: SymbolExpansion, psi: SymbolExpansion) -> SymbolExpansion:
    """Pointwise product, via convolution of the monomial orbits."""
    phi._check_same_n(psi)
    left, right = phi.monomials(), psi.monomials()
    prod: dict[tuple[int, ...], complex] = defaultdict(complex)
    for t, a in left.items():
        for u, b in right.items():
            prod[tuple(x + y for x, y in zip(t, u))] += a * b
    return SymbolExpansion.from_monomials(phi.n, {t: c for t, c in prod.items() if c != 0})


def torus_grid(n: int, M: int) -> np.ndarray:
    """Tensor grid of ``M ** n`` equispaced torus points, shape ``(M,)*n + (n,)``."""
    w = np.exp(2j * np.pi * np.arange(M) / M)
    mesh = np.meshgrid(*([w] * n), indexing="ij")
    return np.stack(mesh, axis=-1)


def quadrature_coeffs(samples: np.ndarray, n: int, bound: int, atol: float = 1e-12,
                      symmetry_tol: float = 1e-8) -> SymbolExpansion:
    """Recover a symbol from samples on a full equispaced torus grid.

    ``samples[k_1, ..., k_n]`` is the value at ``(w**k_1, ..., w**k_n)`` with
    ``w = exp(2 pi i / M)``.  Coefficients ``alpha_m`` are returned for every
    exponent with ``|m_i| <= bound``.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != n or len(set(samples.shape)) != 1:
        raise ValueError(f"samples must be an M**{n} tensor grid")
    M = samples.shape[0]
    if M <= 2 * bound:
        raise GridTooCoarse(f"grid size {M} cannot resolve exponents up to {bound}")
    for perm in itertools.permutations(range(n)):
        gap = np.max(np.abs(samples - np.transpose(samples, perm)))
        if gap > symmetry_tol:
            raise SymmetryViolation(f"samples are not symmetric (gap {gap:.3g})")
    fourier = np.fft.fftn(samples) / M**n
    monomials = {}
    for m in itertools.combinations_with_replacement(range(bound, -bound - 1, -1), n):
        monomials[m] = fourier[tuple(x % M for x in m)]
    return SymbolExpansion.from_monomials(n, monomials, atol=atol)


# --- text file format: one term per line "m_1 ... m_n re im" -----------------

def parse_symbol_text(text: str, n: int | None = None) -> SymbolExpansion:
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 3:
            raise ValueError(f"line {lineno}: expected 'm_1 ... m_n re im'")
        m = tuple(int(x) for x in fields[:-2])
        terms.append((m, complex(float(fields[-2]), float(fields[-1]))))
    if not terms:
        if n is None:
            raise ValueError("empty symbol file and no dimension given")
        return SymbolExpansion.zero(n)
    dims = {len(m) for m, _ in terms}
    if len(dims) != 1 or (n is not None and dims != {n}):
        raise ValueError(f"inconsistent exponent lengths {sorted(dims)}")
    out: dict = defaultdict(complex)
    for m, a in terms:
        out[m] += a
    return SymbolExpansion(dims.pop(), out)


def format_symbol_text(phi: SymbolExpansion) -> str:
    lines = [f"# symbol, n={phi.n}: m_1 ... m_n re im"]
    for m, a in sorted(phi.items(), reverse=True):
        lines.append(" ".join(str(x) for x in m) + f" {a.real!r} {a.imag!r}")
    return "\n".join(lines) + "\n"


def load_symbol(path: str | os.PathLike, n: int | None = None) -> SymbolExpansion:
    with open(path, encoding="utf-8") as fh:
        return parse_symbol_text(fh.read(), n)


def save_symbol(phi: SymbolExpansion, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_symbol_text(phi))


def random_symbol(n: int, rng: np.random.Generator, n_terms: int = 3, max_abs: int = 2,
                  max_spread: int = 3, analytic: bool | None = None) -> SymbolExpansion:
    """Random trigonometric-polynomial symbol with complex Gaussian coefficients."""
    coeffs: dict = {}
    low = 0 if analytic else -max_abs
    while len(coeffs) < n_terms:
        m = tuple(sorted(rng.integers(low, max_abs + 1, size=n).tolist(), reverse=True))
        if m[0] - m[-1] > max_spread:
            continue
        coeffs[m] = complex(rng.normal(), rng.normal())
    phi = SymbolExpansion(n, coeffs)
    if analytic is False and phi.is_analytic:
        m = tuple(sorted(rng.integers(-max_abs, 0, size=n).tolist(), reverse=True))
        if m[0] - m[-1] > max_spread:
            m = (m[-1],) * n
        phi = phi + SymbolExpansion(n, {m: complex(rng.normal(), rng.normal()) + 1.0})
    return phi
