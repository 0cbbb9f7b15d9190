"""Seed-reproducible Monte Carlo for sampling without replacement from a
finite population, probing tail bounds for the finite-sampling empirical
process.

Each replicate draws from its own counter-based RNG stream keyed by
(seed, replicate index), so estimates are bitwise identical for a fixed
seed no matter how replicates are scheduled across workers.  The module
only ever SUPPORTS or FLAGS a conjectured bound; it proves nothing.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .hypergeom import HypergeomParams, tail_standardized

__all__ = [
    "Sidedness",
    "PopulationSpec",
    "McEstimate",
    "ConjectureRow",
    "draw_without_replacement",
    "sup_ecdf_deviation",
    "mc_tail_estimate",
    "mc_tail_grid",
    "conjecture_report",
    "replicate_rng",
    "exact_onesided_binary_tail",
]

#: per-replicate stream stride in Philox counter space
_STREAM_STRIDE = 1 << 64

#: flag threshold in standard errors
FLAG_SIGMAS = 4.0


class Sidedness(Enum):
    ONE = "one"
    TWO = "two"


@dataclass(frozen=True)
class PopulationSpec:
    """A finite population of real values; ties allowed."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("population must be nonempty")

    @classmethod
    def binary(cls, ones: int, size: int) -> "PopulationSpec":
        """0/1 population with ``ones`` ones among ``size`` values."""
        if not 0 <= ones <= size:
            raise ValueError(f"need 0 <= ones <= size, got {ones}/{size}")
        return cls(values=tuple([1.0] * ones + [0.0] * (size - ones)))

    @property
    def size(self) -> int:
        return len(self.values)

    def sorted_values(self) -> np.ndarray:
        return np.sort(np.asarray(self.values, dtype=float))

    def jump_points(self) -> tuple[np.ndarray, np.ndarray]:
        """(distinct values ascending, F_N at those values)."""
        vals = self.sorted_values()
        uniq, counts = np.unique(vals, return_counts=True)
        return uniq, np.cumsum(counts) / self.size


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    reps: int
    seed: int
    lam: float
    sided: Sidedness

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError("p_hat must lie in [0, 1]")


@dataclass(frozen=True)
class ConjectureRow:
    lam: float
    p_hat: float
    stderr: float
    bound_conjecture: float
    bound_serfling_pointwise: float
    flagged: bool


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one replicate."""
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(replicate * _STREAM_STRIDE)
    return np.random.Generator(bitgen)


def draw_without_replacement(
    pop: PopulationSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform n-subset of the population via partial Fisher-Yates."""
    N = pop.size
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    idx = np.arange(N)
    u = rng.random(n)
    for i in range(n):
        j = i + int(u[i] * (N - i))
        idx[i], idx[j] = idx[j], idx[i]
    values = np.asarray(pop.values, dtype=float)
    return values[idx[:n]]


def sup_ecdf_deviation(
    sample: np.ndarray, pop: PopulationSpec, sided: Sidedness
) -> float:
    """sqrt(n) * sup_t (F_n - F_N) (ONE) or sqrt(n) * sup_t |F_n - F_N| (TWO).

    Both ECDFs are right-continuous step functions jumping only at
    population values, so the sup over all real t is attained at the jump
    points (and is >= 0 one-sided, since the difference vanishes at -inf).
    """
    n = len(sample)
    uniq, f_pop = pop.jump_points()
    f_sample = np.searchsorted(np.sort(sample), uniq, side="right") / n
    diff = f_sample - f_pop
    if sided is Sidedness.ONE:
        sup = max(0.0, float(diff.max()))
    else:
        sup = float(np.abs(diff).max())
    return math.sqrt(n) * sup


def _count_chunk(args) -> list[int]:
    """Hit counts against an ascending lambda grid for one replicate range."""
    pop_values, n, lams, sided_value, seed, start, stop = args
    pop = PopulationSpec(values=pop_values)
    sided = Sidedness(sided_value)
    hits = [0] * len(lams)
    for rep in range(start, stop):
        rng = replicate_rng(seed, rep)
        sample = draw_without_replacement(pop, n, rng)
        dev = sup_ecdf_deviation(sample, pop, sided)
        for i, lam in enumerate(lams):
            if dev >= lam:
                hits[i] += 1
            else:
                break  # grid ascending: no later lam can hit
    return hits


def _grid_hits(
    pop: PopulationSpec, n: int, lams: tuple[float, ...], sided: Sidedness,
    reps: int, seed: int, workers: int,
) -> list[int]:
    if workers <= 1:
        return _count_chunk((pop.values, n, lams, sided.value, seed, 0, reps))
    chunk = (reps + workers - 1) // workers
    jobs = [
        (pop.values, n, lams, sided.value, seed, start, min(start + chunk, reps))
        for start in range(0, reps, chunk)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        totals = [0] * len(lams)
        for part in pool.map(_count_chunk, jobs):
            totals = [a + b for a, b in zip(totals, part)]
        return totals


def mc_tail_grid(
    pop: PopulationSpec,
    n: int,
    lambda_grid,
    reps: int,
    seed: int,
    sided: Sidedness = Sidedness.ONE,
    workers: int = 1,
) -> list[McEstimate]:
    """One estimate per grid lambda from a single simulation pass.

    Deterministic in (seed, reps) regardless of worker count: replicate r
    always consumes stream r, and hit counts are integers summed in any
    order.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    lams = [float(lam) for lam in lambda_grid]
    order = sorted(range(len(lams)), key=lams.__getitem__)
    ascending = tuple(lams[i] for i in order)
    hits_sorted = _grid_hits(pop, n, ascending, sided, reps, seed, workers)
    hits = [0] * len(lams)
    for slot, idx in enumerate(order):
        hits[idx] = hits_sorted[slot]
    out = []
    for lam, h in zip(lams, hits):
        p_hat = h / reps
        stderr = math.sqrt(p_hat * (1.0 - p_hat) / reps)
        out.append(
            McEstimate(p_hat=p_hat, stderr=stderr, reps=reps, seed=seed, lam=lam, sided=sided)
        )
    return out


def mc_tail_estimate(
    pop: PopulationSpec,
    n: int,
    lam: float,
    reps: int,
    seed: int,
    sided: Sidedness = Sidedness.ONE,
    workers: int = 1,
) -> McEstimate:
    """Fraction of replicates whose sup deviation reaches lam."""
    return mc_tail_grid(pop, n, [lam], reps, seed, sided, workers)[0]


def exact_onesided_binary_tail(pop: PopulationSpec, n: int, lam: Fraction) -> Fraction:
    """Exact P(sup deviation >= lam) for a two-valued population, one-sided.

    The one-sided sup reduces to the single jump at the lower value, whose
    sample count is hypergeometric; this is the oracle the Monte Carlo path
    is calibrated against.
    """
    uniq = sorted(set(pop.values))
    if len(uniq) != 2:
        raise ValueError("exact reduction applies to two-valued populations")
    low_count = sum(1 for v in pop.values if v == uniq[0])
    return tail_standardized(HypergeomParams(n, low_count, pop.size), lam)


def conjecture_report(
    pop: PopulationSpec,
    n: int,
    lambda_grid,
    reps: int,
    seed: int,
    sided: Sidedness = Sidedness.ONE,
    workers: int = 1,
    constant: float = 1.0,
) -> list[ConjectureRow]:
    """Per-lambda comparison of the MC tail against the conjectured bound
    C*exp(-2 lam^2/(1-f_n)) and the pointwise Serfling-style bound with f*.

    A row is flagged when p_hat - 4*stderr exceeds the conjectured bound;
    a flag is evidence against the bound at these parameters, never a
    refutation.
    """
    N = pop.size
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    f_n = 1.0 if N == 1 else (n - 1) / (N - 1)
    f_star = (n - 1) / N
    if any(float(lam) < 0 for lam in lambda_grid):
        raise ValueError("lambda grid must be nonnegative")
    estimates = mc_tail_grid(pop, n, lambda_grid, reps, seed, sided, workers)
    rows = []
    for est in estimates:
        lam_f = est.lam
        if f_n >= 1.0:
            bound_conj = 0.0 if lam_f > 0 else constant
        else:
            bound_conj = constant * math.exp(-2.0 * lam_f**2 / (1.0 - f_n))
        bound_serf = math.exp(-2.0 * lam_f**2 / (1.0 - f_star))
        flagged = est.p_hat - FLAG_SIGMAS * est.stderr > bound_conj
        rows.append(
            ConjectureRow(
                lam=lam_f,
                p_hat=est.p_hat,
                stderr=est.stderr,
                bound_conjecture=bound_conj,
                bound_serfling_pointwise=bound_serf,
                flagged=flagged,
            )
        )
    return rows
