"""Exact null distributions of the two-sample Kolmogorov-Smirnov statistics.

With samples of sizes m and n pooled into N = m + n order statistics, every
interleaving corresponds to a monotone lattice path from (0,0) to (m,n) and
the scaled EDF difference at the corner (i,j) is

    sqrt(mn/N) * (i/m - j/n) = d / sqrt(m*n*N),   d = i*n - j*m.

Statistics therefore live on the integer grid d, all threshold comparisons
are integer comparisons, and tail probabilities are ratios of path counts.
Three routes are provided: closed forms for m = n, a two-row lattice DP for
general (m, n), and a full-enumeration oracle for small cases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate

from .rational_core import binomial

__all__ = [
    "StatKind",
    "TwoSampleParams",
    "Atom",
    "AtomGrid",
    "DistTable",
    "exact_onesided_equal",
    "exact_twosided_equal",
    "exact_general",
    "brute_force_oracle",
    "atom_grid",
    "dist_table",
    "atom_for_a",
]

BRUTE_FORCE_LIMIT = 14


class StatKind(Enum):
    PLUS = "plus"
    MINUS = "minus"
    TWO_SIDED = "two_sided"


@dataclass(frozen=True)
class TwoSampleParams:
    m: int
    n: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError(f"sample sizes must be >= 1, got m={self.m}, n={self.n}")

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def lambda_N(self) -> Fraction:
        return Fraction(self.m, self.N)

    @property
    def scale_sq(self) -> int:
        """m*n*N; the statistic value at lattice level d is d/sqrt(scale_sq)."""
        return self.m * self.n * self.N


@dataclass(frozen=True, order=True)
class Atom:
    """One achievable statistic value t = d / sqrt(m n N), d integer."""

    d: int
    scale_sq: int

    @property
    def t_squared(self) -> Fraction:
        return Fraction(self.d * self.d, self.scale_sq)

    @property
    def t(self) -> float:
        return self.d / math.sqrt(self.scale_sq)

    def a_index(self, n: int) -> int:
        """For m = n the atom is a/sqrt(2n) with a = d/n."""
        if self.d % n:
            raise ValueError(f"atom d={self.d} is not an m=n grid point")
        return self.d // n


def atom_for_a(n: int, a: int) -> Atom:
    """The m = n atom t = a/sqrt(2n)."""
    return Atom(d=a * n, scale_sq=2 * n**3)


@dataclass(frozen=True)
class AtomGrid:
    params: TwoSampleParams
    kind: StatKind
    atoms: tuple[Atom, ...]

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)


@dataclass(frozen=True)
class DistTable:
    """Exact survival table: rows (atom, P(D >= atom.t)), atoms ascending."""

    params: TwoSampleParams
    kind: StatKind
    rows: tuple[tuple[Atom, Fraction], ...]

    def probability_at(self, atom: Atom) -> Fraction:
        for a, prob in self.rows:
            if a.d == atom.d:
                return prob
        raise KeyError(f"atom d={atom.d} not in table")


def exact_onesided_equal(n: int, a: int) -> Fraction:
    """P(D+_{n,n} >= a/sqrt(2n)) = C(2n, n-a)/C(2n, n) for 0 <= a <= n."""
    if not 0 <= a <= n:
        raise ValueError(f"need 0 <= a <= n, got a={a}, n={n}")
    return Fraction(binomial(2 * n, n - a), binomial(2 * n, n))


def exact_twosided_equal(n: int, a: int) -> Fraction:
    """P(D_{n,n} >= a/sqrt(2n)) by the alternating reflection sum."""
    if not 1 <= a <= n:
        raise ValueError(f"need 1 <= a <= n, got a={a}, n={n}")
    total = 0
    sign = 1
    for j in range(1, n // a + 1):
        total += sign * binomial(2 * n, n - j * a)
        sign = -sign
    return Fraction(2 * total, binomial(2 * n, n))


# ----------------------------------------------------------------------------
# General (m, n): two-row lattice DP over path counts
# ----------------------------------------------------------------------------


def _count_paths_max_below(m: int, n: int, d0: int) -> int:
    """Paths (0,0)->(m,n) with i*n - j*m < d0 at every corner (d0 >= 1)."""
    cur = [1] * (n + 1)  # column i = 0: d = -j*m < d0 always
    for i in range(1, m + 1):
        base = i * n - d0
        jmin = max(0, base // m + 1)  # smallest j with i*n - j*m < d0
        if jmin > n:
            return 0
        nxt = [0] * jmin
        nxt.extend(accumulate(cur[jmin:]))
        cur = nxt
    return cur[n]


def _count_paths_in_strip(m: int, n: int, d0: int) -> int:
    """Paths (0,0)->(m,n) with |i*n - j*m| < d0 at every corner (d0 >= 1)."""
    jmax0 = min(n, (d0 - 1) // m)
    cur = [1] * (jmax0 + 1) + [0] * (n - jmax0)
    for i in range(1, m + 1):
        base = i * n
        jmin = max(0, (base - d0) // m + 1)
        jmax = min(n, (base + d0 - 1) // m)
        if jmin > jmax:
            return 0
        window = list(accumulate(cur[jmin : jmax + 1]))
        cur = [0] * jmin + window + [0] * (n - jmax)
    return cur[n]


def exact_general(p: TwoSampleParams, atom: Atom | int, kind: StatKind) -> Fraction:
    """P(D >= t) at a grid atom, by exact path counting."""
    d0 = atom.d if isinstance(atom, Atom) else int(atom)
    if isinstance(atom, Atom) and atom.scale_sq != p.scale_sq:
        raise ValueError("atom belongs to different (m, n)")
    if d0 <= 0:
        return Fraction(1)
    total = binomial(p.N, p.m)
    if kind is StatKind.PLUS:
        below = _count_paths_max_below(p.m, p.n, d0)
    elif kind is StatKind.MINUS:
        below = _count_paths_max_below(p.n, p.m, d0)
    elif kind is StatKind.TWO_SIDED:
        below = _count_paths_in_strip(p.m, p.n, d0)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return Fraction(total - below, total)


# ----------------------------------------------------------------------------
# Atom grids and tables
# ----------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _corner_values(m: int, n: int) -> frozenset[int]:
    return frozenset(i * n - j * m for i in range(m + 1) for j in range(n + 1))


def atom_grid(p: TwoSampleParams, kind: StatKind) -> AtomGrid:
    """All corner values the statistic can attain, ascending.

    PLUS/MINUS grids coincide: the corner map (i,j) -> (m-i, n-j) negates d.
    """
    values = _corner_values(p.m, p.n)
    if kind in (StatKind.PLUS, StatKind.MINUS):
        ds = sorted(v for v in values if v >= 0)
    else:
        ds = sorted({abs(v) for v in values})
    atoms = tuple(Atom(d=d, scale_sq=p.scale_sq) for d in ds)
    return AtomGrid(params=p, kind=kind, atoms=atoms)


def dist_table(p: TwoSampleParams, kind: StatKind) -> DistTable:
    """Survival probabilities at every grid atom, via the lattice DP."""
    grid = atom_grid(p, kind)
    rows = tuple((atom, exact_general(p, atom, kind)) for atom in grid)
    return DistTable(params=p, kind=kind, rows=rows)


def brute_force_oracle(p: TwoSampleParams, kind: StatKind) -> DistTable:
    """Full-enumeration survival table over all C(m+n, m) interleavings.

    Atoms are the values the statistic actually attains, which for PLUS
    includes d = 0 (a path can stay nonpositive) but for TWO_SIDED starts
    at the smallest positive attained level.
    """
    m, n = p.m, p.n
    if m + n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force capped at m+n <= {BRUTE_FORCE_LIMIT}")
    counts: dict[int, int] = {}
    for x_positions in itertools.combinations(range(m + n), m):
        xs = set(x_positions)
        d = 0
        best = 0
        worst = 0
        for pos in range(m + n):
            d += n if pos in xs else -m
            if d > best:
                best = d
            if d < worst:
                worst = d
        if kind is StatKind.PLUS:
            stat = max(best, 0)
        elif kind is StatKind.MINUS:
            stat = max(-worst, 0)
        else:
            stat = max(best, -worst)
        counts[stat] = counts.get(stat, 0) + 1
    total = binomial(m + n, m)
    rows = []
    running = 0
    for d in sorted(counts, reverse=True):
        running += counts[d]
        rows.append((Atom(d=d, scale_sq=p.scale_sq), Fraction(running, total)))
    rows.reverse()
    return DistTable(params=p, kind=kind, rows=tuple(rows))
