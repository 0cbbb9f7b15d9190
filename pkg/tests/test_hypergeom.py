import itertools
import math
from fractions import Fraction

import pytest

from ks_tailkit.hypergeom import (
    ASSERTED_KINDS,
    HgBoundKind,
    HgLambda,
    HypergeomParams,
    PopulationSummary,
    bennett_h,
    bennett_psi,
    hg_bound,
    hg_log_bound,
    lambda_atoms,
    moments,
    pmf,
    support,
    tail_count,
    tail_standardized,
)
from ks_tailkit.rational_core import (
    DomainError,
    Relation,
    compare_exact_vs_exp,
)


def enumerate_subset_means(n, D, N):
    """All C(N, n) equally likely sample means of a 0/1 population."""
    values = [1] * D + [0] * (N - D)
    return [
        Fraction(sum(combo), n) for combo in itertools.combinations(values, n)
    ]


class TestPmf:
    def test_no_successes(self):
        assert pmf(HypergeomParams(1, 0, 5), 0) == 1

    def test_small_example_vs_enumeration(self):
        p = HypergeomParams(2, 2, 4)
        means = enumerate_subset_means(2, 2, 4)
        # k successes <=> mean k/2
        assert pmf(p, 1) == Fraction(
            sum(1 for m in means if m == Fraction(1, 2)), len(means)
        )
        assert pmf(p, 1) == Fraction(2, 3)

    def test_formula_example(self):
        p = HypergeomParams(4, 10, 20)
        assert pmf(p, 3) == Fraction(1200, 4845)

    def test_enumeration_oracle_full_pmf(self):
        p = HypergeomParams(3, 4, 9)
        means = enumerate_subset_means(3, 4, 9)
        total = len(means)
        for k in support(p):
            expected = Fraction(sum(1 for m in means if m == Fraction(k, 3)), total)
            assert pmf(p, k) == expected

    def test_off_support_zero(self):
        p = HypergeomParams(4, 10, 20)
        assert pmf(p, -1) == 0
        assert pmf(p, 5) == 0

    @pytest.mark.parametrize("N", [1, 2, 7, 13, 24, 41, 60])
    def test_normalization(self, N):
        for n in {1, 2, N // 2, N}:
            if not 1 <= n <= N:
                continue
            for D in {0, 1, N // 3, N // 2, N}:
                if not 0 <= D <= N:
                    continue
                p = HypergeomParams(n, D, N)
                assert sum(pmf(p, k) for k in support(p)) == 1

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            HypergeomParams(0, 1, 5)
        with pytest.raises(ValueError):
            HypergeomParams(2, 6, 5)


class TestTail:
    def test_degenerate_full_draw(self):
        p = HypergeomParams(20, 7, 20)
        assert tail_standardized(p, Fraction(1, 100)) == 0

    def test_worked_example(self):
        p = HypergeomParams(4, 10, 20)
        # threshold k >= 2 + 2*(1/2) = 3
        expected = Fraction(1200 + 210, 4845)
        assert tail_standardized(p, Fraction(1, 2)) == expected
        assert expected == Fraction(94, 323)

    def test_single_draw(self):
        assert tail_standardized(HypergeomParams(1, 1, 2), Fraction(1, 4)) == Fraction(1, 2)

    def test_matches_pmf_summation(self):
        p = HypergeomParams(5, 6, 14)
        for k, hl in lambda_atoms(p):
            assert tail_standardized(p, hl) == sum(pmf(p, j) for j in range(k, 6))
            assert tail_standardized(p, hl) == tail_count(p, k)

    def test_tie_included(self):
        # n*mu = 2, lambda = 1/2 puts the threshold exactly on k = 3
        p = HypergeomParams(4, 10, 20)
        atom = HgLambda.from_count(p, 3)
        assert tail_standardized(p, atom) == tail_count(p, 3)

    def test_monotone_in_lambda(self):
        p = HypergeomParams(6, 9, 17)
        lams = [Fraction(i, 8) for i in range(1, 25)]
        tails = [tail_standardized(p, lam) for lam in lams]
        assert all(a >= b for a, b in zip(tails, tails[1:]))


class TestMoments:
    def test_full_draw_variance_zero(self):
        mean, var = moments(HypergeomParams(5, 3, 5))
        assert var == 0

    def test_single_bernoulli(self):
        mean, var = moments(HypergeomParams(1, 1, 2))
        assert (mean, var) == (Fraction(1, 2), Fraction(1, 4))

    def test_worked_example(self):
        mean, var = moments(HypergeomParams(4, 10, 20))
        assert mean == Fraction(1, 2)
        assert var == Fraction(1, 19)

    @pytest.mark.parametrize("n,D,N", [(2, 3, 7), (3, 4, 9), (4, 5, 11), (5, 6, 12)])
    def test_enumeration_oracle(self, n, D, N):
        means = enumerate_subset_means(n, D, N)
        total = len(means)
        mu = sum(means, Fraction(0)) / total
        var = sum(((m - mu) ** 2 for m in means), Fraction(0)) / total
        got_mean, got_var = moments(HypergeomParams(n, D, N))
        assert got_mean == mu
        assert got_var == var


class TestBennett:
    def test_h_at_one_exact_zero(self):
        iv = bennett_h(1)
        assert iv.lower == 0.0 and iv.upper == 0.0

    def test_psi_near_zero(self):
        iv = bennett_psi(Fraction(1, 10**6))
        assert abs(iv.midpoint - 1) < 1e-5

    def test_psi_at_one(self):
        iv = bennett_psi(1)
        assert abs(iv.midpoint - (4 * math.log(2) - 2)) < 1e-12

    def test_psi_decreasing(self):
        points = [Fraction(1, 4), Fraction(1, 2), 1, 2, 4]
        vals = [bennett_psi(y).midpoint for y in points]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_psi_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            bennett_psi(0)


class TestBounds:
    def test_serfling_single_draw_reduces(self):
        # f_1* = 0: bound is exp(-2 lambda^2) on a 0/1 population
        p = HypergeomParams(1, 1, 2)
        lam = Fraction(1, 4)
        iv = hg_bound(HgBoundKind.SERFLING, p, lam)
        assert abs(iv.midpoint - math.exp(-2 * float(lam) ** 2)) < 1e-15

    def test_serfling_conj_exact_exponent(self):
        p = HypergeomParams(4, 10, 20)
        q = hg_log_bound(HgBoundKind.SERFLING_CONJ, p, Fraction(1, 2))
        assert q == Fraction(-19, 32)
        iv = hg_bound(HgBoundKind.SERFLING_CONJ, p, Fraction(1, 2))
        assert abs(iv.midpoint - math.exp(-19 / 32)) < 1e-15
        assert tail_standardized(p, Fraction(1, 2)) <= Fraction(iv.midpoint)

    def test_greene_worked_example(self):
        p = HypergeomParams(4, 10, 20)
        iv = hg_bound(HgBoundKind.GREENE_THM3, p, Fraction(1, 2), precision=96)
        assert abs(iv.midpoint - 0.3731269144743374) < 1e-12
        exact = tail_standardized(p, Fraction(1, 2))
        assert exact == Fraction(1410, 4845)
        assert float(exact) <= iv.lower

    def test_greene_preconditions(self):
        with pytest.raises(DomainError):
            hg_log_bound(HgBoundKind.GREENE_THM3, HypergeomParams(2, 2, 4), Fraction(1, 4))
        with pytest.raises(DomainError):
            hg_log_bound(HgBoundKind.GREENE_THM3, HypergeomParams(4, 10, 20), Fraction(3, 2))
        with pytest.raises(DomainError):
            hg_log_bound(HgBoundKind.GREENE_THM3, HypergeomParams(4, 3, 20), Fraction(1, 2))

    def test_bennett_preconditions(self):
        with pytest.raises(DomainError):
            hg_log_bound(HgBoundKind.BENNETT_COR1, HypergeomParams(6, 5, 20), Fraction(1, 2))

    def test_cor2_line1_below_line2(self):
        # psi is decreasing and lambda <= sqrt(n) on atoms, so the first
        # display is the smaller bound
        for n, D, N in [(3, 6, 14), (4, 10, 20), (5, 8, 16)]:
            p = HypergeomParams(n, D, N)
            for _, hl in lambda_atoms(p):
                a = hg_bound(HgBoundKind.HOEFF_BENNETT_COR2A, p, hl)
                b = hg_bound(HgBoundKind.HOEFF_BENNETT_COR2B, p, hl)
                assert a.midpoint <= b.midpoint + 1e-15

    def test_domination_small_grid(self):
        # every asserted bound dominates the exact tail at every atom
        for N in range(2, 22):
            for n in range(1, N + 1):
                for D in range(0, N + 1):
                    p = HypergeomParams(n, D, N)
                    for k, hl in lambda_atoms(p):
                        exact = tail_count(p, k)
                        if exact == 0:
                            continue
                        for kind in ASSERTED_KINDS:
                            try:
                                q = hg_log_bound(kind, p, hl)
                            except DomainError:
                                continue
                            out = compare_exact_vs_exp(exact, q)
                            assert out.relation is not Relation.GREATER, (
                                f"{kind} violated at n={n} D={D} N={N} k={k}"
                            )

    def test_conjectured_bound_dominates_small_grid(self):
        for N in range(2, 18):
            for n in range(1, N):
                for D in range(1, N):
                    p = HypergeomParams(n, D, N)
                    for k, hl in lambda_atoms(p):
                        exact = tail_count(p, k)
                        if exact == 0:
                            continue
                        q = hg_log_bound(HgBoundKind.SERFLING_CONJ, p, hl)
                        out = compare_exact_vs_exp(exact, q)
                        assert out.relation is not Relation.GREATER

    def test_raw_bound_can_exceed_one(self):
        p = HypergeomParams(4, 10, 20)
        iv = hg_bound(HgBoundKind.GREENE_THM3, p, Fraction(1, 100))
        assert iv.lower > 1

    def test_limit_convergence(self):
        # at fixed (n, lambda) the finite-N bound approaches the limit form;
        # the 1e-6 threshold at N = 10**6/n holds on this grid (the gap is
        # ~c(n,lambda)/N and c grows with n)
        for n, lam in [(2, Fraction(1, 2)), (2, Fraction(3, 5)), (2, Fraction(5, 8))]:
            lim = hg_bound(
                HgBoundKind.GREENE_LIMIT, HypergeomParams(n, 10, 22), lam, precision=96
            )
            N = 10**6 // n
            fin = hg_bound(
                HgBoundKind.GREENE_THM3, HypergeomParams(n, N // 2, N), lam, precision=96
            )
            assert abs(fin.midpoint - lim.midpoint) <= 1e-6

    def test_limit_convergence_rate(self):
        # O(1/N) approach on a wider grid
        for n, lam in [(4, Fraction(1, 2)), (8, Fraction(1, 2))]:
            lim = hg_bound(
                HgBoundKind.GREENE_LIMIT, HypergeomParams(n, 10, 22), lam, precision=96
            )
            diffs = []
            for N in (10**3, 10**4, 10**5):
                fin = hg_bound(
                    HgBoundKind.GREENE_THM3, HypergeomParams(n, N // 2, N), lam, precision=96
                )
                diffs.append(abs(fin.midpoint - lim.midpoint))
            assert diffs[0] > diffs[1] > diffs[2]
            assert diffs[2] <= 4.0 / 10**5


class TestPopulationSummary:
    def test_from_values(self):
        s = PopulationSummary.from_values([0, 1, 1, 2])
        assert s.mean == Fraction(1)
        assert s.variance == Fraction(1, 2)
        assert (s.minimum, s.maximum) == (0, 2)

    def test_general_population_serfling(self):
        s = PopulationSummary.from_values([0, 2, 2, 4])
        p = HypergeomParams(2, 2, 4)
        q = hg_log_bound(HgBoundKind.SERFLING, p, Fraction(1, 2), population=s)
        # spread 4, 1 - f* = 3/4: exponent -2*(1/4)/((3/4)*16) = -1/24
        assert q == Fraction(-1, 24)

    def test_degenerate_population_rejected(self):
        s = PopulationSummary.from_values([3, 3, 3])
        with pytest.raises(DomainError):
            hg_log_bound(
                HgBoundKind.SERFLING, HypergeomParams(1, 1, 3), Fraction(1, 2), population=s
            )
