"""Exact hypergeometric pmf/tails, finite-sampling moments, and the family
of exponential upper bounds for the standardized sample mean of draws
without replacement.

The standardized tail event is sqrt(n) * (Ybar_n - mu_N) >= lambda.  On the
support of the count statistic this threshold is an exact comparison of
rationals once squared, so tails are computed with no rounding at all.
Bound values are transcendental; their logs are assembled exactly where
possible (rational exponents) and enclosed in intervals otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Union

from .rational_core import (
    START_PRECISION,
    DomainError,
    Interval,
    LogLinear,
    binomial,
)

__all__ = [
    "HypergeomParams",
    "PopulationSummary",
    "HgLambda",
    "HgBoundKind",
    "pmf",
    "support",
    "tail_count",
    "tail_standardized",
    "moments",
    "bennett_h",
    "bennett_psi",
    "hg_bound",
    "hg_log_bound",
    "lambda_atoms",
]

RealLike = Union[int, float, Fraction]


@dataclass(frozen=True)
class HypergeomParams:
    """Sampling n_draws times without replacement from a population of N
    items, D of which are successes."""

    n_draws: int
    D: int
    N: int

    def __post_init__(self) -> None:
        if not (0 <= self.D <= self.N):
            raise ValueError(f"need 0 <= D <= N, got D={self.D}, N={self.N}")
        if not (1 <= self.n_draws <= self.N):
            raise ValueError(f"need 1 <= n_draws <= N, got n_draws={self.n_draws}, N={self.N}")

    @property
    def mu(self) -> Fraction:
        return Fraction(self.D, self.N)

    @property
    def sigma_sq(self) -> Fraction:
        return self.mu * (1 - self.mu)

    @property
    def f_n(self) -> Fraction:
        """Finite sampling fraction (n-1)/(N-1); 1 for the degenerate N=1."""
        if self.N == 1:
            return Fraction(1)
        return Fraction(self.n_draws - 1, self.N - 1)

    @property
    def f_n_star(self) -> Fraction:
        return Fraction(self.n_draws - 1, self.N)

    @property
    def f_n_bar(self) -> Fraction:
        return Fraction(self.n_draws, self.N)


@dataclass(frozen=True)
class PopulationSummary:
    """Mean/variance/extremes of a finite population of real values."""

    mean: Fraction
    variance: Fraction
    minimum: Fraction
    maximum: Fraction

    def __post_init__(self) -> None:
        if self.variance < 0:
            raise ValueError("variance must be >= 0")
        if not (self.minimum <= self.mean <= self.maximum):
            raise ValueError("need minimum <= mean <= maximum")

    @classmethod
    def from_values(cls, values) -> "PopulationSummary":
        vals = [Fraction(v) for v in values]
        if not vals:
            raise ValueError("empty population")
        n = len(vals)
        mean = sum(vals, Fraction(0)) / n
        var = sum(((v - mean) ** 2 for v in vals), Fraction(0)) / n
        return cls(mean=mean, variance=var, minimum=min(vals), maximum=max(vals))

    @classmethod
    def zero_one(cls, params: HypergeomParams) -> "PopulationSummary":
        return cls(
            mean=params.mu,
            variance=params.sigma_sq,
            minimum=Fraction(0),
            maximum=Fraction(1),
        )


@dataclass(frozen=True)
class HgLambda:
    """A standardized threshold lambda carried through its exact square.

    ``over_root_n`` is lambda/sqrt(n) when that happens to be rational
    (true at every atom of the statistic, where sqrt(n)*lambda is an
    integer-minus-rational); when None, formulas needing lambda/sqrt(n)
    fall back to an interval square root.
    """

    square: Fraction
    over_root_n: Fraction | None = None

    def __post_init__(self) -> None:
        if self.square <= 0:
            raise DomainError(f"lambda must be > 0, got lambda^2 = {self.square}")
        if self.over_root_n is not None and self.over_root_n <= 0:
            raise DomainError("lambda/sqrt(n) must be > 0")

    @classmethod
    def from_value(cls, lam: RealLike) -> "HgLambda":
        q = Fraction(lam)
        return cls(square=q * q)

    @classmethod
    def from_count(cls, params: HypergeomParams, k: int) -> "HgLambda":
        """The atom lambda with sqrt(n)*(k/n - mu) = lambda, i.e. the exact
        threshold at which the tail jumps to P(X >= k)."""
        r = k - params.n_draws * params.mu
        if r <= 0:
            raise DomainError(f"count {k} is not above the mean")
        return cls(square=r * r / params.n_draws, over_root_n=r / params.n_draws)

    def as_float(self) -> float:
        return math.sqrt(float(self.square))


def _as_lambda(lam: Union[RealLike, HgLambda]) -> HgLambda:
    if isinstance(lam, HgLambda):
        return lam
    return HgLambda.from_value(lam)


def support(p: HypergeomParams) -> range:
    return range(max(0, p.D + p.n_draws - p.N), min(p.n_draws, p.D) + 1)


def pmf(p: HypergeomParams, k: int) -> Fraction:
    """P(X = k) for X ~ Hypergeometric(n_draws, D, N); zero off-support."""
    if k not in support(p):
        return Fraction(0)
    return Fraction(
        binomial(p.D, k) * binomial(p.N - p.D, p.n_draws - k),
        binomial(p.N, p.n_draws),
    )


def tail_count(p: HypergeomParams, k: int) -> Fraction:
    """P(X >= k), exactly."""
    sup = support(p)
    if k <= sup.start:
        return Fraction(1)
    num = sum(
        binomial(p.D, j) * binomial(p.N - p.D, p.n_draws - j)
        for j in range(max(k, sup.start), sup.stop)
    )
    return Fraction(num, binomial(p.N, p.n_draws))


def tail_standardized(p: HypergeomParams, lam: Union[RealLike, HgLambda]) -> Fraction:
    """P(sqrt(n) * (Ybar_n - mu_N) >= lambda), exactly, for lambda > 0.

    The threshold comparison k - n*mu >= sqrt(n)*lambda is decided by
    comparing squares, so irrational thresholds cost no precision.
    """
    hl = _as_lambda(lam)
    n_mu = p.n_draws * p.mu
    target = p.n_draws * hl.square  # (sqrt(n) * lambda)^2
    # smallest k above the mean with (k - n*mu)^2 >= n*lambda^2; exact ties
    # are included since the event is ">= lambda"
    for k in range(math.ceil(n_mu), p.n_draws + 1):
        r = k - n_mu
        if r > 0 and r * r >= target:
            return tail_count(p, k)
    return Fraction(0)


def moments(p: HypergeomParams) -> tuple[Fraction, Fraction]:
    """(mean of Ybar_n, variance of Ybar_n) with the finite-sampling factor."""
    var = p.sigma_sq * (1 - p.f_n) / p.n_draws
    return p.mu, var


# ----------------------------------------------------------------------------
# Bennett function and the bound family
# ----------------------------------------------------------------------------


def bennett_h(u: Union[RealLike, Interval], precision: int = START_PRECISION) -> Interval:
    """h(u) = u*(log(u) - 1) + 1 as an enclosure; h(1) = 0 exactly."""
    iv = u if isinstance(u, Interval) else Interval.from_fraction(Fraction(u), precision)
    return iv * (iv.log() - 1) + 1


def bennett_psi(y: Union[RealLike, Interval], precision: int = START_PRECISION) -> Interval:
    """psi(y) = 2 * y**-2 * h(1 + y) for y > 0."""
    if isinstance(y, Interval):
        if not y.is_positive():
            raise DomainError("bennett_psi requires y > 0")
        iv = y
    else:
        q = Fraction(y)
        if q <= 0:
            raise DomainError(f"bennett_psi requires y > 0, got {q}")
        iv = Interval.from_fraction(q, precision)
    return bennett_h(iv + 1, precision) * 2 / (iv * iv)


class HgBoundKind(Enum):
    SERFLING = "serfling"
    SERFLING_CONJ = "serfling_conj"
    BENNETT_COR1 = "bennett_cor1"
    HOEFF_BENNETT_COR2A = "hoeff_bennett_cor2a"
    HOEFF_BENNETT_COR2B = "hoeff_bennett_cor2b"
    GREENE_THM3 = "greene_thm3"
    GREENE_LIMIT = "greene_limit"


#: Bounds the source results actually assert (the conjectured improvement and
#: the N->infinity limit form are evaluated but not certified as dominating).
ASSERTED_KINDS = (
    HgBoundKind.SERFLING,
    HgBoundKind.BENNETT_COR1,
    HgBoundKind.HOEFF_BENNETT_COR2A,
    HgBoundKind.HOEFF_BENNETT_COR2B,
    HgBoundKind.GREENE_THM3,
)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def _bennett_precondition(p: HypergeomParams) -> None:
    _require(
        1 <= p.n_draws <= min(p.D, p.N - p.D),
        f"needs 1 <= n <= min(D, N-D); got n={p.n_draws}, D={p.D}, N={p.N}",
    )


def _psi_argument_exact(p: HypergeomParams, hl: HgLambda) -> Fraction | None:
    """lambda / (sqrt(n) * sigma^2 * (1 - f_n)) when exactly rational."""
    if hl.over_root_n is None:
        return None
    return hl.over_root_n / (p.sigma_sq * (1 - p.f_n))


def _psi_refiner(p: HypergeomParams, hl: HgLambda, coef: Fraction) -> Callable[[int], Interval]:
    """prec -> enclosure of -coef * psi(lambda / (sqrt(n) sigma^2 (1-f_n)))."""
    exact_arg = _psi_argument_exact(p, hl)
    denom = p.sigma_sq * (1 - p.f_n)
    lam_sq = hl.square

    def refine(prec: int) -> Interval:
        if exact_arg is not None:
            y = Interval.from_fraction(exact_arg, prec)
        else:
            lam = Interval.from_fraction(lam_sq, prec).sqrt()
            root_n = Interval.from_fraction(p.n_draws, prec).sqrt()
            y = lam / (root_n * Fraction(denom))
        return bennett_psi(y, prec) * Fraction(-coef)

    return refine


def _greene_refiner(
    p: HypergeomParams, hl: HgLambda, limit: bool
) -> Callable[[int], Interval]:
    """Log of the Greene bound (or its N->infinity limit form).

    log = E - ln 2 + (1/2) * (ln F - ln(2 pi lambda^2)) where E is the exact
    rational exponent and F is the product under the square root; F is exact
    rational whenever sqrt(n)*lambda is (the atom case).
    """
    n, N = p.n_draws, p.N
    lam_sq = hl.square
    if limit:
        exponent = -2 * lam_sq - lam_sq * lam_sq / (3 * n)
    else:
        exponent = -2 * lam_sq / (1 - Fraction(n, N)) - Fraction(1, 3) * (
            1 + Fraction(n**3, (N - n) ** 3)
        ) * lam_sq * lam_sq / n

    root_n_lam = None if hl.over_root_n is None else n * hl.over_root_n  # sqrt(n)*lambda

    def sqrt_factor(prec: int) -> Interval:
        # F = [(N-n)/N] * (sqrt(n)+2 lam)/(sqrt(n)-2 lam) * (N-n+2 sqrt(n) lam)/(N-n-2 sqrt(n) lam)
        # with the first ratio rewritten over sqrt(n)*lambda:
        # (n + 2 sqrt(n) lam)/(n - 2 sqrt(n) lam)
        if root_n_lam is not None:
            s = Fraction(root_n_lam)
            f = Fraction(n + 2 * s, n - 2 * s)
            if not limit:
                f *= Fraction(p.N - n, p.N) * Fraction(N - n + 2 * s, N - n - 2 * s)
            return Interval.from_fraction(f, prec)
        s = (Interval.from_fraction(n * lam_sq, prec)).sqrt()  # sqrt(n)*lambda
        f = (s * 2 + n) / (-(s * 2) + n)
        if not limit:
            f = f * Fraction(p.N - n, p.N) * ((s * 2 + (N - n)) / (-(s * 2) + (N - n)))
        return f

    def refine(prec: int) -> Interval:
        two_pi_lam_sq = Interval.pi(prec) * Fraction(2 * lam_sq)
        half = Fraction(1, 2)
        log_root = (sqrt_factor(prec).log() - two_pi_lam_sq.log()) * half
        ln2 = Interval.from_fraction(2, prec).log()
        return Interval.from_fraction(exponent, prec) + log_root - ln2

    return refine


def hg_log_bound(
    kind: HgBoundKind,
    p: HypergeomParams,
    lam: Union[RealLike, HgLambda],
    population: PopulationSummary | None = None,
) -> Union[Fraction, LogLinear, Callable[[int], Interval]]:
    """Refinable log of the requested bound; exact rational when possible.

    Raises DomainError when the bound's preconditions fail, signalling that
    the bound is not asserted at these parameters.
    """
    hl = _as_lambda(lam)
    pop = population if population is not None else PopulationSummary.zero_one(p)
    n, N = p.n_draws, p.N

    if kind is HgBoundKind.SERFLING:
        spread = pop.maximum - pop.minimum
        _require(spread > 0, "needs max > min in the population")
        return -2 * hl.square / ((1 - p.f_n_star) * spread * spread)

    if kind is HgBoundKind.SERFLING_CONJ:
        spread = pop.maximum - pop.minimum
        _require(spread > 0, "needs max > min in the population")
        _require(p.f_n < 1, "conjectured form degenerates at n = N")
        return -2 * hl.square / ((1 - p.f_n) * spread * spread)

    if kind is HgBoundKind.BENNETT_COR1:
        _bennett_precondition(p)
        coef = hl.square / (2 * p.sigma_sq * (1 - p.f_n))
        return _psi_refiner(p, hl, coef)

    if kind is HgBoundKind.HOEFF_BENNETT_COR2A:
        _bennett_precondition(p)
        coef = 2 * hl.square / (1 - p.f_n)
        return _psi_refiner(p, hl, coef)

    if kind is HgBoundKind.HOEFF_BENNETT_COR2B:
        _bennett_precondition(p)
        coef = 2 * hl.square / (1 - p.f_n)
        y = 1 / (p.sigma_sq * (1 - p.f_n))  # lambda-free argument, as stated

        def refine(prec: int) -> Interval:
            return bennett_psi(Interval.from_fraction(y, prec), prec) * Fraction(-coef)

        return refine

    if kind is HgBoundKind.GREENE_THM3:
        _require(N > 4, f"needs N > 4 (got N={N})")
        _require(2 <= n < p.D <= Fraction(N, 2), "needs 2 <= n < D <= N/2")
        _require(hl.square < Fraction(n, 4), "needs 0 < lambda < sqrt(n)/2")
        return _greene_refiner(p, hl, limit=False)

    if kind is HgBoundKind.GREENE_LIMIT:
        _require(n >= 2, "needs n >= 2")
        _require(hl.square < Fraction(n, 4), "needs 0 < lambda < sqrt(n)/2")
        return _greene_refiner(p, hl, limit=True)

    raise ValueError(f"unknown bound kind {kind!r}")


def hg_bound(
    kind: HgBoundKind,
    p: HypergeomParams,
    lam: Union[RealLike, HgLambda],
    population: PopulationSummary | None = None,
    precision: int = START_PRECISION,
) -> Interval:
    """Enclosure of the raw bound value (may exceed 1 for small lambda)."""
    logq = hg_log_bound(kind, p, lam, population)
    if isinstance(logq, Fraction):
        return Interval.from_fraction(logq, precision).exp()
    if isinstance(logq, LogLinear):
        return logq(precision).exp()
    return logq(precision).exp()


def lambda_atoms(p: HypergeomParams) -> list[tuple[int, HgLambda]]:
    """All (k, lambda) pairs where the standardized tail has an atom with
    lambda > 0: the counts k in the support strictly above the mean."""
    n_mu = p.n_draws * p.mu
    out = []
    for k in support(p):
        if k > n_mu:
            out.append((k, HgLambda.from_count(p, k)))
    return out
