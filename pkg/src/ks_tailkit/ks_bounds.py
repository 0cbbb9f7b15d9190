"""Exponential upper bounds for two-sample KS statistics and the scalar
criteria attached to them.

Every bound here has the shape C * exp(E) with E rational in t^2 (and all
grid atoms have rational t^2), so the log of a bound is an exact rational
plus a rational multiple of the log of a rational: a
:class:`~ks_tailkit.rational_core.LogLinear`.  Constants are carried as
``rational * e**k`` so that e-based constants stay exact in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

from .ks_exact import Atom, StatKind, TwoSampleParams
from .rational_core import (
    START_PRECISION,
    DomainError,
    Interval,
    LogLinear,
    binomial,
)

__all__ = [
    "KsBoundKind",
    "BoundConstant",
    "C_ONE",
    "C_TWO",
    "C_E",
    "C_HALF_E",
    "C_WEI_DUDLEY",
    "C_WEI_DUDLEY_HALF",
    "ks_log_bound",
    "ks_bound",
    "pb2_log",
    "pb3_log",
    "r_n",
    "r_n_log_threshold",
    "t0",
    "combined_min_bound",
]

RealLike = Union[int, float, Fraction]


@dataclass(frozen=True)
class BoundConstant:
    """A bound constant C = rational * e**e_power (so ln C is LogLinear)."""

    rational: Fraction = Fraction(1)
    e_power: int = 0

    def __post_init__(self) -> None:
        if self.rational <= 0:
            raise ValueError("constant must be positive")

    def log_linear(self) -> LogLinear:
        return LogLinear(
            constant=Fraction(self.e_power),
            terms=((Fraction(1), self.rational),) if self.rational != 1 else (),
        )

    def as_float(self) -> float:
        return float(self.rational) * math.e**self.e_power

    @classmethod
    def of(cls, c: Union["BoundConstant", RealLike]) -> "BoundConstant":
        if isinstance(c, BoundConstant):
            return c
        return cls(rational=Fraction(c))


C_ONE = BoundConstant()
C_TWO = BoundConstant(Fraction(2))
C_E = BoundConstant(e_power=1)
C_HALF_E = BoundConstant(Fraction(1, 2), e_power=1)
# stored at printed precision; they originate in external computation
C_WEI_DUDLEY = BoundConstant(Fraction(216863, 100000))
C_WEI_DUDLEY_HALF = BoundConstant(Fraction(1084315, 1000000))


class KsBoundKind(Enum):
    PB2 = "pb2"
    PB3 = "pb3"
    DKW = "dkw"
    DKWM_TWO = "dkwm_two"
    DKWM_ONE = "dkwm_one"
    MODIFIED_DKWM_TWO = "modified_dkwm_two"
    MODIFIED_DKWM_ONE = "modified_dkwm_one"
    SERFLING_HEURISTIC = "serfling_heuristic"
    COMBINED_MIN = "combined_min"


_DEFAULT_CONSTANTS = {
    KsBoundKind.PB2: C_ONE,
    KsBoundKind.PB3: C_ONE,
    KsBoundKind.DKWM_TWO: C_TWO,
    KsBoundKind.DKWM_ONE: C_ONE,
    KsBoundKind.MODIFIED_DKWM_TWO: C_TWO,
    KsBoundKind.MODIFIED_DKWM_ONE: C_ONE,
    KsBoundKind.SERFLING_HEURISTIC: C_ONE,
    KsBoundKind.COMBINED_MIN: C_WEI_DUDLEY_HALF,
}


def _t_squared(t: Union[RealLike, Atom]) -> Fraction:
    if isinstance(t, Atom):
        if t.d <= 0:
            raise DomainError("bounds are evaluated at t > 0")
        return t.t_squared
    q = Fraction(t)
    if q <= 0:
        raise DomainError(f"bounds are evaluated at t > 0, got {q}")
    return q * q


def pb2_log(n: int, a: int) -> Fraction:
    """Exponent of the m = n one-sided bound with the finite sampling
    fraction: -(2n-1) a^2 / (2 n^2)."""
    return Fraction(-(2 * n - 1) * a * a, 2 * n * n)


def pb3_log(n: int, a: int) -> Fraction:
    """Exponent of the plain m = n one-sided bound: -a^2/n."""
    return Fraction(-a * a, n)


def ks_log_bound(
    kind: KsBoundKind,
    p: TwoSampleParams,
    t: Union[RealLike, Atom],
    sided: StatKind = StatKind.PLUS,
    c: Union[BoundConstant, RealLike, None] = None,
) -> LogLinear:
    """Refinable log of C * exp(exponent) for the requested bound kind."""
    if kind is KsBoundKind.COMBINED_MIN:
        raise ValueError("combined_min is not log-linear; use combined_min_bound")
    t_sq = _t_squared(t)
    const = BoundConstant.of(c) if c is not None else _DEFAULT_CONSTANTS.get(kind)
    if const is None:
        raise ValueError(f"bound kind {kind} requires an explicit constant")

    if kind is KsBoundKind.PB2:
        if p.m != p.n:
            raise DomainError("pb2 is the m = n form")
        # recover the integer atom index a from t^2 = a^2/(2n)
        a_sq = 2 * p.n * t_sq
        a = math.isqrt(a_sq.numerator // a_sq.denominator) if a_sq.denominator == 1 else None
        if a is None or a * a != a_sq:
            raise DomainError("pb2 is defined on the a/sqrt(2n) grid")
        exponent = pb2_log(p.n, a)
    elif kind is KsBoundKind.PB3:
        if p.m != p.n:
            raise DomainError("pb3 is the m = n form")
        exponent = -2 * t_sq
    elif kind in (KsBoundKind.DKW, KsBoundKind.DKWM_TWO, KsBoundKind.DKWM_ONE):
        exponent = -2 * t_sq
    elif kind in (KsBoundKind.MODIFIED_DKWM_TWO, KsBoundKind.MODIFIED_DKWM_ONE):
        exponent = -2 * Fraction(p.N - 1, p.N) * t_sq
    elif kind is KsBoundKind.SERFLING_HEURISTIC:
        # heuristic one-sided form with the f* sampling fraction
        # (1 - f_m^*) = (N - m + 1)/N on the PLUS side
        if sided is StatKind.PLUS:
            exponent = -2 * (1 - p.lambda_N) * t_sq * Fraction(p.N, p.N - p.m + 1)
        elif sided is StatKind.MINUS:
            exponent = -2 * p.lambda_N * t_sq * Fraction(p.N, p.N - p.n + 1)
        else:
            raise DomainError("serfling heuristic is one-sided")
    else:
        raise ValueError(f"unknown bound kind {kind!r}")

    base = const.log_linear()
    return LogLinear(constant=base.constant + exponent, terms=base.terms)


def ks_bound(
    kind: KsBoundKind,
    p: TwoSampleParams,
    t: Union[RealLike, Atom],
    sided: StatKind = StatKind.PLUS,
    c: Union[BoundConstant, RealLike, None] = None,
    precision: int = START_PRECISION,
) -> Interval:
    """Enclosure of the raw bound value C * exp(exponent)."""
    if kind is KsBoundKind.COMBINED_MIN:
        const = BoundConstant.of(c) if c is not None else C_WEI_DUDLEY_HALF
        return combined_min_bound(p, t, const, precision)
    return ks_log_bound(kind, p, t, sided, c)(precision).exp()


def r_n_log_threshold(n: int, a: int) -> tuple[Fraction, Fraction]:
    """(ratio, q): r_n(a) > 0 iff ln(ratio) > q with q = -a^2/n."""
    if not 1 <= a <= n:
        raise ValueError(f"need 1 <= a <= n, got a={a}, n={n}")
    ratio = Fraction(binomial(2 * n, n - a), binomial(2 * n, n))
    return ratio, Fraction(-a * a, n)


def r_n(n: int, a: int, precision: int = START_PRECISION) -> Interval:
    """Enclosure of ln C(2n, n-a) - ln C(2n, n) + a^2/n.

    Positivity of this margin is exactly the failure of the plain
    one-sided bound exp(-2t^2) at the atom a/sqrt(2n).
    """
    ratio, q = r_n_log_threshold(n, a)
    return Interval.from_fraction(ratio, precision).log() - q


def t0(c: Union[BoundConstant, RealLike], n: int, precision: int = START_PRECISION) -> Interval:
    """Crossover point sqrt(n * log C) between the modified and plain forms."""
    if n < 1:
        raise ValueError("n must be >= 1")
    const = BoundConstant.of(c)
    log_c = const.log_linear()(precision)
    if not log_c.is_positive():
        raise DomainError(f"t0 requires C > 1, got {const.as_float()}")
    return (log_c * n).sqrt()


def combined_min_bound(
    p: TwoSampleParams,
    t: Union[RealLike, Atom],
    c: Union[BoundConstant, RealLike] = C_WEI_DUDLEY_HALF,
    precision: int = START_PRECISION,
) -> Interval:
    """Pointwise min of the modified one-sided bound and C*exp(-2t^2);
    the branches cross at t0(C, n)."""
    if p.m != p.n:
        raise DomainError("combined bound is stated for m = n")
    modified = ks_bound(KsBoundKind.MODIFIED_DKWM_ONE, p, t, precision=precision)
    plain = ks_bound(KsBoundKind.DKW, p, t, c=BoundConstant.of(c), precision=precision)
    return modified.min_with(plain)
