"""Strict partitions, exponents and the finite basis windows built from them.

A strict partition ``p = (p_1 > ... > p_n)`` labels the antisymmetrized
monomial ``a_p(z) = det(z_i ** p_j)``.  Those with ``p_n >= 0`` span the
analytic (Hardy) side, the rest the co-analytic complement inside the
antisymmetric L^2 space of the torus.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterable, Iterator, Optional, Sequence

from .errors import InvalidDimension, InvalidPartition


class Side(str, enum.Enum):
    ANALYTIC = "analytic"
    COANALYTIC = "coanalytic"
    LAURENT = "laurent"


@dataclass(frozen=True, order=True)
class StrictPartition:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) == 0:
            raise InvalidPartition("empty partition")
        if any(a <= b for a, b in zip(entries, entries[1:])):
            raise InvalidPartition(f"entries not strictly decreasing: {entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_analytic(self) -> bool:
        return self.entries[-1] >= 0

    def shifted(self, t: Sequence[int]) -> "StrictPartition":
        return StrictPartition(tuple(a + b for a, b in zip(self.entries, t)))

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __repr__(self) -> str:
        return f"StrictPartition{self.entries}"


@dataclass(frozen=True, order=True)
class Exponent:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) == 0:
            raise InvalidPartition("empty exponent")
        if any(a < b for a, b in zip(entries, entries[1:])):
            raise InvalidPartition(f"entries not weakly decreasing: {entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def spread(self) -> int:
        return self.entries[0] - self.entries[-1]

    @property
    def max_abs(self) -> int:
        return max(abs(e) for e in self.entries)

    def stabilizer_order(self) -> int:
        """Number of permutations fixing the tuple."""
        out = 1
        for _, grp in itertools.groupby(self.entries):
            k = len(list(grp))
            for i in range(2, k + 1):
                out *= i
        return out

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __repr__(self) -> str:
        return f"Exponent{self.entries}"


def _order_key(p: StrictPartition):
    # graded by p_1, ties broken lexicographically
    return (p.entries[0], p.entries)


@dataclass(frozen=True)
class BasisWindow:
    """Finite, deterministically ordered set of strict partitions.

    ``analytic``: p_n >= 0 and p_1 <= D.  ``laurent``: -D <= p_n, p_1 <= D.
    ``coanalytic``: the laurent window minus the analytic one.
    """

    n: int
    D: int
    side: Side
    partitions: tuple[StrictPartition, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.partitions)

    def __iter__(self) -> Iterator[StrictPartition]:
        return iter(self.partitions)

    def __getitem__(self, i) -> StrictPartition:
        return self.partitions[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, BasisWindow):
            return NotImplemented
        return (self.n, self.D, self.side) == (other.n, other.D, other.side)

    def __hash__(self) -> int:
        return hash((self.n, self.D, self.side))

    @cached_property
    def index(self) -> dict[StrictPartition, int]:
        return {p: i for i, p in enumerate(self.partitions)}

    def __contains__(self, p) -> bool:
        return p in self.index

    def margin(self, p: StrictPartition) -> int:
        """Distance of ``p`` from the truncation boundary of the window.

        The analytic window is only truncated from above; ``p_n >= 0`` is a
        genuine subspace boundary, not a truncation.
        """
        top = self.D - p.entries[0]
        if self.side is Side.ANALYTIC:
            return top
        return min(top, p.entries[-1] + self.D)

    @cached_property
    def margins(self) -> tuple[int, ...]:
        return tuple(self.margin(p) for p in self.partitions)

    def interior_indices(self, depth: int) -> list[int]:
        return [i for i, m in enumerate(self.margins) if m >= depth]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "D": self.D,
            "side": self.side.value,
            "partitions": [list(p.entries) for p in self.partitions],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "BasisWindow":
        window = enumerate_window(int(data["n"]), int(data["D"]), data["side"])
        listed = data.get("partitions")
        if listed is not None:
            if [list(p.entries) for p in window.partitions] != [list(map(int, p)) for p in listed]:
                raise InvalidPartition("partition list does not match the (n, D, side) window")
        return window

    @classmethod
    def from_json(cls, text: str) -> "BasisWindow":
        return cls.from_dict(json.loads(text))

    def expected_size(self) -> int:
        full = comb(2 * self.D + 1, self.n)
        analytic = comb(self.D + 1, self.n)
        return {Side.ANALYTIC: analytic, Side.LAURENT: full, Side.COANALYTIC: full - analytic}[self.side]


def enumerate_window(n: int, D: int, side: Side | str = Side.ANALYTIC) -> BasisWindow:
    """All strict partitions of length ``n`` in the requested window."""
    if n < 2:
        raise InvalidDimension(f"n must be at least 2, got {n}")
    if D < 0:
        raise InvalidDimension(f"D must be non-negative, got {D}")
    side = Side(side)
    low = 0 if side is Side.ANALYTIC else -D
    parts = [
        StrictPartition(tuple(reversed(c)))
        for c in itertools.combinations(range(low, D + 1), n)
    ]
    if side is Side.COANALYTIC:
        parts = [p for p in parts if not p.is_analytic]
    parts.sort(key=_order_key)
    return BasisWindow(n=n, D=D, side=side, partitions=tuple(parts))


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation given in one-line notation (0-based)."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def antisymmetrize_exponent(t: Iterable[int]) -> Optional[tuple[StrictPartition, int]]:
    """Sort ``t`` into a strict partition, returning the sign of the sort.

    Returns ``None`` when ``t`` has a repeated entry (the antisymmetrized
    monomial vanishes identically).
    """
    t = tuple(int(x) for x in t)
    if len(set(t)) < len(t):
        return None
    order = sorted(range(len(t)), key=lambda i: -t[i])
    return StrictPartition(tuple(t[i] for i in order)), permutation_sign(order)


def orbit_of_exponent(m: Exponent | Sequence[int]) -> list[tuple[int, ...]]:
    """All ``n!`` rearrangements ``m_sigma``, counted with multiplicity."""
    entries = m.entries if isinstance(m, Exponent) else tuple(m)
    return list(itertools.permutations(entries))


def staircase(n: int) -> StrictPartition:
    """The minimal analytic partition ``(n-1, ..., 1, 0)``."""
    return StrictPartition(tuple(range(n - 1, -1, -1)))


def f_vector(j: int, n: int) -> tuple[int, ...]:
    """``(1, ..., 1, 0, ..., 0)`` with ``j`` leading ones."""
    return tuple([1] * j + [0] * (n - j))
