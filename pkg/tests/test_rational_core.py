import math
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ks_tailkit.rational_core import (
    CertifiedOrdering,
    DomainError,
    Interval,
    LogLinear,
    Relation,
    UndecidableComparisonError,
    binomial,
    clamp_unit,
    compare_exact_vs_exp,
    ln_rational,
)

getcontext().prec = 60


def decimal_ln(q: Fraction) -> Decimal:
    """Independent extended-precision log oracle (decimal module)."""
    return (Decimal(q.numerator) / Decimal(q.denominator)).ln()


class TestBinomial:
    def test_small_values(self):
        assert binomial(6, 3) == 20
        assert binomial(6, 2) == 15

    def test_out_of_range_is_zero(self):
        assert binomial(2, -1) == 0
        assert binomial(2, 3) == 0
        assert binomial(0, 1) == 0

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            binomial(-1, 0)

    @given(st.integers(0, 200), st.integers(0, 200))
    def test_symmetry(self, n, k):
        assert binomial(n, k) == binomial(n, n - k)

    def test_pascal_identity_to_200(self):
        for n in range(1, 201):
            for k in (0, 1, n // 3, n // 2, n - 1, n):
                assert binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k)


class TestInterval:
    def test_from_fraction_encloses(self):
        iv = Interval.from_fraction(Fraction(1, 3), 64)
        assert iv.lower <= 1 / 3 <= iv.upper
        assert iv.width < 1e-18

    def test_integer_is_exact(self):
        iv = Interval.from_fraction(7, 64)
        assert iv.lower == iv.upper == 7.0

    def test_arithmetic_encloses(self):
        a = Interval.from_fraction(Fraction(1, 3), 64)
        b = Interval.from_fraction(Fraction(2, 7), 64)
        s = a + b
        assert s.contains(Fraction(1, 3) + Fraction(2, 7))
        d = a - b
        assert d.contains(Fraction(1, 3) - Fraction(2, 7))
        m = a * b
        assert m.contains(Fraction(2, 21))
        q = a / b
        assert q.contains(Fraction(7, 6))

    def test_mul_sign_cases(self):
        for x in (Fraction(-5, 3), Fraction(-1, 7), Fraction(2, 9)):
            for y in (Fraction(-3, 4), Fraction(11, 5)):
                prod = Interval.from_fraction(x, 64) * Interval.from_fraction(y, 64)
                assert prod.contains(x * y)

    def test_exp_log_roundtrip(self):
        x = Fraction(3, 4)
        iv = Interval.from_fraction(x, 96).log().exp()
        assert iv.contains(x)

    def test_sqrt(self):
        iv = Interval.from_fraction(2, 64).sqrt()
        assert iv.lower <= math.sqrt(2) <= iv.upper

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            Interval.from_fraction(0, 64).log()
        with pytest.raises(DomainError):
            Interval.from_fraction(-1, 64).sqrt()

    def test_pi(self):
        iv = Interval.pi(64)
        assert iv.lower <= math.pi <= iv.upper
        assert 0 < iv.width < 1e-17

    def test_min_with(self):
        a = Interval.from_fraction(Fraction(1, 2), 64)
        b = Interval.from_fraction(Fraction(1, 3), 64)
        assert a.min_with(b).contains(Fraction(1, 3))

    def test_clamp_unit(self):
        big = Interval.from_fraction(Fraction(7, 2), 64)
        assert clamp_unit(big).upper == 1.0
        inside = Interval.from_fraction(Fraction(1, 3), 64)
        clamped = clamp_unit(inside)
        assert clamped.contains(Fraction(1, 3))


class TestLnRational:
    def test_ln_one_is_zero(self):
        iv = ln_rational(1, 64)
        assert iv.lower == iv.upper == 0.0

    def test_frozen_oracle_values(self):
        # oracle: decimal module ln at 60 digits
        assert str(decimal_ln(Fraction(3, 4)))[:10] == "-0.2876820"
        iv = ln_rational(Fraction(3, 4), 64)
        assert iv.contains(Fraction(decimal_ln(Fraction(3, 4))))
        assert str(decimal_ln(Fraction(1, 20)))[:9] == "-2.995732"
        iv = ln_rational(Fraction(1, 20), 64)
        assert iv.contains(Fraction(decimal_ln(Fraction(1, 20))))

    def test_width_contract(self):
        for prec in (16, 64, 128):
            for q in (Fraction(3, 4), Fraction(1, 20), Fraction(10**40, 3)):
                iv = ln_rational(q, prec)
                assert iv.width <= 2.0 ** (-prec + 2)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            ln_rational(0)
        with pytest.raises(DomainError):
            ln_rational(Fraction(-1, 2))

    @given(
        st.fractions(min_value=Fraction(1, 1000), max_value=1000),
        st.fractions(min_value=Fraction(1, 1000), max_value=1000),
    )
    @settings(max_examples=60, deadline=None)
    def test_product_rule(self, p, q):
        # ln(pq) enclosure must intersect ln(p) + ln(q) enclosure
        lhs = ln_rational(p * q, 64)
        rhs = ln_rational(p, 64) + ln_rational(q, 64)
        assert not lhs.strictly_below(rhs)
        assert not lhs.strictly_above(rhs)

    def test_width_shrinks_with_precision(self):
        widths = [ln_rational(Fraction(3, 7), prec).width for prec in (16, 32, 64, 128)]
        assert all(w2 <= w1 for w1, w2 in zip(widths, widths[1:]))


class TestCompare:
    def test_less_case(self):
        # ln(3/4) = -0.2877 < -10/36 = -0.2778
        out = compare_exact_vs_exp(Fraction(3, 4), Fraction(-10, 36))
        assert out.relation is Relation.LESS
        assert out.log_gap < 0

    def test_greater_case(self):
        out = compare_exact_vs_exp(Fraction(3, 4), Fraction(-1, 3))
        assert out.relation is Relation.GREATER

    def test_true_equality_hits_guard(self):
        # p = 1/2 against q = ln(e/2) - 1 = -ln 2, a genuine equality
        q = LogLinear(constant=Fraction(0), terms=((Fraction(-1), Fraction(2)),))
        out = compare_exact_vs_exp(Fraction(1, 2), q, guard=1e-12)
        assert out.relation is Relation.EQUAL_WITHIN_GUARD
        assert abs(out.log_gap) <= 1e-12
        assert out.precision == 4096

    def test_identity_shortcut(self):
        out = compare_exact_vs_exp(Fraction(1), Fraction(0), guard=0.0)
        assert out.relation is Relation.EQUAL_WITHIN_GUARD
        assert out.log_gap == 0.0

    def test_undecidable_with_zero_guard(self):
        q = LogLinear(constant=Fraction(0), terms=((Fraction(-1), Fraction(2)),))
        with pytest.raises(UndecidableComparisonError):
            compare_exact_vs_exp(Fraction(1, 2), q, guard=0.0, max_precision=256)

    def test_fixed_interval_bound(self):
        q = ln_rational(Fraction(2, 3), 64)
        out = compare_exact_vs_exp(Fraction(1, 2), q)
        assert out.relation is Relation.LESS

    def test_callable_bound(self):
        out = compare_exact_vs_exp(
            Fraction(3, 4), lambda prec: Interval.from_fraction(Fraction(-10, 36), prec)
        )
        assert out.relation is Relation.LESS

    def test_nonpositive_p_rejected(self):
        with pytest.raises(DomainError):
            compare_exact_vs_exp(Fraction(0), Fraction(0))

    @given(
        st.fractions(min_value=Fraction(1, 50), max_value=50),
        st.fractions(min_value=-3, max_value=3),
    )
    @settings(max_examples=60, deadline=None)
    def test_antisymmetry(self, p, q):
        # exp(q) vs p is the reciprocal comparison: 1/p against -q
        try:
            fwd = compare_exact_vs_exp(p, q, max_precision=512)
            rev = compare_exact_vs_exp(1 / p, -q, max_precision=512)
        except UndecidableComparisonError:
            return
        flip = {
            Relation.LESS: Relation.GREATER,
            Relation.GREATER: Relation.LESS,
            Relation.EQUAL_WITHIN_GUARD: Relation.EQUAL_WITHIN_GUARD,
        }
        assert rev.relation is flip[fwd.relation]

    def test_tiny_probability(self):
        p = Fraction(2, math.comb(940, 470))
        out = compare_exact_vs_exp(p, Fraction(-600))
        assert out.relation is Relation.LESS
        out = compare_exact_vs_exp(p, Fraction(-700))
        assert out.relation is Relation.GREATER


class TestLogLinear:
    def test_constant_only(self):
        q = LogLinear(constant=Fraction(5, 7))
        assert q.as_fraction() == Fraction(5, 7)
        assert q(64).contains(Fraction(5, 7))

    def test_log_terms(self):
        # 1 - ln 2 = ln(e/2)
        q = LogLinear(constant=Fraction(1), terms=((Fraction(-1), Fraction(2)),))
        assert q.as_fraction() is None
        iv = q(64)
        assert iv.lower <= 1 - math.log(2) <= iv.upper

    def test_nonpositive_argument_rejected(self):
        with pytest.raises(DomainError):
            LogLinear(terms=((Fraction(1), Fraction(-2)),))
