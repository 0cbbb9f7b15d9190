"""Exact integer/rational arithmetic and certified comparison against
transcendental expressions.

Exact quantities are carried by Python's unbounded ``int`` and
``fractions.Fraction`` (always reduced, positive denominator).  Everything
that cannot be represented exactly is enclosed in an outward-rounded
:class:`Interval` whose endpoints live at a chosen working precision, so a
comparison between an exact rational ``p`` and a bound ``exp(q)`` can be
*certified*: we refine the enclosures of ``ln p`` and ``q`` until they
separate, or declare equality-within-guard once the precision cap is hit.

The refinement protocol is fixed: start at ``START_PRECISION`` bits, double
up to ``MAX_PRECISION``.  True equalities exist in the quantities this
package verifies, so a bare refine-until-separated loop would not
terminate; the guard tolerance (in log space) is what makes those cells
decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence, Union

from mpmath.libmp import (
    from_int,
    from_man_exp,
    from_rational,
    mpf_cmp,
    mpf_pi,
    mpf_sub,
    mpi_add,
    mpi_div,
    mpi_exp,
    mpi_log,
    mpi_mul,
    mpi_neg,
    mpi_sqrt,
    mpi_sub,
    round_ceiling,
    round_floor,
    to_float,
    to_str,
)

__all__ = [
    "START_PRECISION",
    "MAX_PRECISION",
    "DEFAULT_GUARD",
    "DomainError",
    "UndecidableComparisonError",
    "Interval",
    "LogLinear",
    "Relation",
    "CertifiedOrdering",
    "binomial",
    "ln_rational",
    "compare_exact_vs_exp",
    "clamp_unit",
]

START_PRECISION = 64
MAX_PRECISION = 4096
DEFAULT_GUARD = 1e-12

RationalLike = Union[int, Fraction]


class DomainError(ValueError):
    """An operation was asked for outside its stated domain."""


class UndecidableComparisonError(ArithmeticError):
    """Certified comparison hit the precision cap without separating.

    Raised only when the caller's guard leaves no room to declare
    equality (guard too small for the residual overlap, or zero).
    """

    def __init__(self, log_gap_estimate: float, precision: int):
        self.log_gap_estimate = log_gap_estimate
        self.precision = precision
        super().__init__(
            f"comparison undecidable at precision cap {precision} bits "
            f"(log-gap estimate {log_gap_estimate:.3e})"
        )


def binomial(n: int, k: int) -> int:
    """Binomial coefficient C(n, k); zero for k outside [0, n]."""
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _raw_from_fraction(value: Fraction, prec: int, rnd: str):
    return from_rational(value.numerator, value.denominator, prec, rnd)


@dataclass(frozen=True)
class Interval:
    """Closed enclosure [lower, upper], endpoints outward-rounded mpf values.

    Instances are immutable; ``working_precision`` records the bit precision
    the endpoints were rounded at.  All arithmetic rounds outward, so any
    derived interval still encloses the exact result.
    """

    _lo: tuple
    _hi: tuple
    working_precision: int

    def __post_init__(self) -> None:
        if mpf_cmp(self._lo, self._hi) > 0:
            raise ValueError("interval endpoints out of order")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_fraction(cls, value: RationalLike, prec: int) -> "Interval":
        q = Fraction(value)
        if q.denominator == 1:
            raw = from_int(q.numerator)
            return cls(raw, raw, prec)
        return cls(
            _raw_from_fraction(q, prec, round_floor),
            _raw_from_fraction(q, prec, round_ceiling),
            prec,
        )

    @classmethod
    def pi(cls, prec: int) -> "Interval":
        return cls(mpf_pi(prec, round_floor), mpf_pi(prec, round_ceiling), prec)

    # -- basic queries -----------------------------------------------------

    @property
    def lower(self) -> float:
        return to_float(self._lo, rnd=round_floor)

    @property
    def upper(self) -> float:
        return to_float(self._hi, rnd=round_ceiling)

    @property
    def width(self) -> float:
        return to_float(
            mpf_sub(self._hi, self._lo, self.working_precision, round_ceiling),
            rnd=round_ceiling,
        )

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: RationalLike) -> bool:
        q = Fraction(value)
        exact = Interval.from_fraction(q, max(self.working_precision, 64))
        return mpf_cmp(self._lo, exact._hi) <= 0 and mpf_cmp(self._hi, exact._lo) >= 0

    def strictly_below(self, other: "Interval") -> bool:
        return mpf_cmp(self._hi, other._lo) < 0

    def strictly_above(self, other: "Interval") -> bool:
        return mpf_cmp(self._lo, other._hi) > 0

    def is_positive(self) -> bool:
        return mpf_cmp(self._lo, from_int(0)) > 0

    def is_negative(self) -> bool:
        return mpf_cmp(self._hi, from_int(0)) < 0

    def __str__(self) -> str:
        dps = max(1, int(self.working_precision / 3.33) - 1)
        return f"[{to_str(self._lo, dps)}, {to_str(self._hi, dps)}]"

    # -- arithmetic (outward rounded) --------------------------------------

    def _coerce(self, other: Union["Interval", RationalLike]) -> "Interval":
        if isinstance(other, Interval):
            return other
        return Interval.from_fraction(other, self.working_precision)

    def _pair(self):
        return (self._lo, self._hi)

    def _wrap(self, pair, prec: int) -> "Interval":
        return Interval(pair[0], pair[1], prec)

    def __add__(self, other):
        o = self._coerce(other)
        prec = max(self.working_precision, o.working_precision)
        return self._wrap(mpi_add(self._pair(), o._pair(), prec), prec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        prec = max(self.working_precision, o.working_precision)
        return self._wrap(mpi_sub(self._pair(), o._pair(), prec), prec)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        o = self._coerce(other)
        prec = max(self.working_precision, o.working_precision)
        return self._wrap(mpi_mul(self._pair(), o._pair(), prec), prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        prec = max(self.working_precision, o.working_precision)
        return self._wrap(mpi_div(self._pair(), o._pair(), prec), prec)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def __neg__(self):
        return self._wrap(mpi_neg(self._pair(), self.working_precision), self.working_precision)

    def exp(self) -> "Interval":
        return self._wrap(mpi_exp(self._pair(), self.working_precision), self.working_precision)

    def log(self) -> "Interval":
        if mpf_cmp(self._lo, from_int(0)) <= 0:
            raise DomainError("log of interval touching (-inf, 0]")
        return self._wrap(mpi_log(self._pair(), self.working_precision), self.working_precision)

    def sqrt(self) -> "Interval":
        if mpf_cmp(self._lo, from_int(0)) < 0:
            raise DomainError("sqrt of interval touching negatives")
        return self._wrap(mpi_sqrt(self._pair(), self.working_precision), self.working_precision)

    def min_with(self, other: "Interval") -> "Interval":
        """Enclosure of min(x, y) for x in self, y in other."""
        o = self._coerce(other)
        prec = max(self.working_precision, o.working_precision)
        lo = self._lo if mpf_cmp(self._lo, o._lo) <= 0 else o._lo
        hi = self._hi if mpf_cmp(self._hi, o._hi) <= 0 else o._hi
        return Interval(lo, hi, prec)


def clamp_unit(iv: Interval) -> Interval:
    """Intersect an enclosure of a raw bound with [0, 1] (probability cap)."""
    one = from_int(1)
    zero = from_int(0)
    lo = iv._lo
    hi = iv._hi
    if mpf_cmp(lo, one) > 0:
        lo = one
    if mpf_cmp(hi, one) > 0:
        hi = one
    if mpf_cmp(lo, zero) < 0:
        lo = zero
    if mpf_cmp(hi, zero) < 0:
        hi = zero
    return Interval(lo, hi, iv.working_precision)


@dataclass(frozen=True)
class LogLinear:
    """Exact-coefficient log expression ``constant + sum c_i * ln(r_i)``.

    All coefficients and log arguments are rationals, so the expression can
    be re-enclosed at any precision; this is the canonical refinable form
    for the logs of the exponential bounds handled by this package (their
    exponents are rational and their constants are rational or rational
    multiples of powers of e, which fold into ``constant``).
    """

    constant: Fraction = Fraction(0)
    terms: tuple = ()  # tuple[(Fraction coefficient, Fraction log-argument)]

    def __post_init__(self) -> None:
        for coef, arg in self.terms:
            if arg <= 0:
                raise DomainError(f"ln of nonpositive argument {arg}")

    def __call__(self, prec: int) -> Interval:
        acc = Interval.from_fraction(self.constant, prec)
        for coef, arg in self.terms:
            if coef == 0 or arg == 1:
                continue
            acc = acc + Interval.from_fraction(arg, prec).log() * Fraction(coef)
        return acc

    def as_fraction(self) -> Fraction | None:
        """The exact value, when no genuine log term survives."""
        if all(coef == 0 or arg == 1 for coef, arg in self.terms):
            return self.constant
        return None


def _ln_interval(p: Fraction, prec: int) -> Interval:
    return Interval.from_fraction(p, prec).log()


def ln_rational(p: RationalLike, precision: int = START_PRECISION) -> Interval:
    """Enclosure of ln(p) with width at most 2**(-precision + 2).

    The working precision adapts upward until the requested absolute width
    is met (large |ln p| needs extra working bits).
    """
    q = Fraction(p)
    if q <= 0:
        raise DomainError(f"ln_rational requires p > 0, got {q}")
    if q == 1:
        zero = from_int(0)
        return Interval(zero, zero, precision)
    target = from_man_exp(1, -precision + 2)
    work = max(precision + 8, START_PRECISION)
    while True:
        iv = _ln_interval(q, work)
        width = mpf_sub(iv._hi, iv._lo, work, round_ceiling)
        if mpf_cmp(width, target) <= 0:
            return iv
        work *= 2


class Relation(Enum):
    LESS = "LESS"
    GREATER = "GREATER"
    EQUAL_WITHIN_GUARD = "EQUAL_WITHIN_GUARD"


@dataclass(frozen=True)
class CertifiedOrdering:
    """Outcome of a certified comparison of ln(p) against a log-bound q.

    ``log_gap`` is the midpoint estimate of ln(p) - q at the precision the
    decision was reached; for LESS/GREATER the enclosures were disjoint, for
    EQUAL_WITHIN_GUARD the gap magnitude was at most ``guard`` at the cap.
    """

    relation: Relation
    log_gap: float
    guard: float
    precision: int

    @property
    def is_le(self) -> bool:
        return self.relation in (Relation.LESS, Relation.EQUAL_WITHIN_GUARD)

    @property
    def is_ge(self) -> bool:
        return self.relation in (Relation.GREATER, Relation.EQUAL_WITHIN_GUARD)


LogBound = Union[RationalLike, Interval, LogLinear, Callable[[int], Interval]]


def _as_refiner(log_bound: LogBound):
    """Normalize a log-bound spec into (refine(prec) -> Interval, exact Fraction|None)."""
    if isinstance(log_bound, (int, Fraction)):
        q = Fraction(log_bound)
        return (lambda prec: Interval.from_fraction(q, prec)), q
    if isinstance(log_bound, LogLinear):
        return log_bound, log_bound.as_fraction()
    if isinstance(log_bound, Interval):
        return (lambda prec: log_bound), None
    return log_bound, None


def compare_exact_vs_exp(
    p: RationalLike,
    log_bound: LogBound,
    guard: float = DEFAULT_GUARD,
    *,
    start_precision: int = START_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> CertifiedOrdering:
    """Certify the ordering of an exact rational p against exp(log_bound).

    ``log_bound`` may be an exact rational, a fixed :class:`Interval`, a
    :class:`LogLinear`, or any callable mapping a bit precision to an
    enclosure of q.  Refinement doubles the working precision until the
    enclosures of ln(p) and q separate (LESS / GREATER).  If the cap is
    reached, EQUAL_WITHIN_GUARD is declared when the residual gap estimate
    is within ``guard``; otherwise :class:`UndecidableComparisonError`.
    """
    p = Fraction(p)
    if p <= 0:
        raise DomainError(f"compare_exact_vs_exp requires p > 0, got {p}")
    if guard < 0:
        raise ValueError("guard must be >= 0")

    refine, exact_q = _as_refiner(log_bound)

    # Exact shortcut: ln(1) = 0 is the one rational log, so p = 1 against a
    # rational q is decidable symbolically, including true equality.
    if p == 1 and exact_q is not None:
        gap = -exact_q
        if gap == 0:
            return CertifiedOrdering(Relation.EQUAL_WITHIN_GUARD, 0.0, guard, 0)
        rel = Relation.GREATER if gap > 0 else Relation.LESS
        return CertifiedOrdering(rel, float(gap), guard, 0)

    prec = start_precision
    while True:
        lhs = _ln_interval(p, prec)
        rhs = refine(prec)
        gap = lhs.midpoint - rhs.midpoint
        if lhs.strictly_below(rhs):
            return CertifiedOrdering(Relation.LESS, gap, guard, prec)
        if lhs.strictly_above(rhs):
            return CertifiedOrdering(Relation.GREATER, gap, guard, prec)
        if prec >= max_precision:
            if guard > 0 and abs(gap) <= guard:
                return CertifiedOrdering(Relation.EQUAL_WITHIN_GUARD, gap, guard, prec)
            raise UndecidableComparisonError(gap, prec)
        prec = min(2 * prec, max_precision)
