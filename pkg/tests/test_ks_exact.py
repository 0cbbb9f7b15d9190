import math
from fractions import Fraction

import pytest

from ks_tailkit.ks_exact import (
    Atom,
    StatKind,
    TwoSampleParams,
    atom_for_a,
    atom_grid,
    brute_force_oracle,
    dist_table,
    exact_general,
    exact_onesided_equal,
    exact_twosided_equal,
)

ALL_KINDS = (StatKind.PLUS, StatKind.MINUS, StatKind.TWO_SIDED)


class TestClosedFormsEqualSizes:
    def test_reference_table_n3(self):
        assert exact_onesided_equal(3, 1) == Fraction(3, 4)
        assert exact_onesided_equal(3, 2) == Fraction(3, 10)
        assert exact_onesided_equal(3, 3) == Fraction(1, 20)
        assert exact_onesided_equal(3, 0) == 1

    def test_onesided_range_check(self):
        with pytest.raises(ValueError):
            exact_onesided_equal(3, 4)
        with pytest.raises(ValueError):
            exact_onesided_equal(3, -1)

    def test_twosided_single_pair(self):
        assert exact_twosided_equal(1, 1) == 1

    def test_twosided_single_term(self):
        assert exact_twosided_equal(3, 3) == Fraction(1, 10)

    def test_twosided_vs_brute_force(self):
        p = TwoSampleParams(3, 3)
        oracle = brute_force_oracle(p, StatKind.TWO_SIDED)
        for a in (1, 2, 3):
            atom = atom_for_a(3, a)
            assert exact_twosided_equal(3, a) == oracle.probability_at(atom)

    def test_twosided_range_check(self):
        with pytest.raises(ValueError):
            exact_twosided_equal(3, 0)


class TestBruteForce:
    def test_single_pair_plus(self):
        table = brute_force_oracle(TwoSampleParams(1, 1), StatKind.PLUS)
        ds = [atom.d for atom, _ in table.rows]
        assert ds == [0, 1]
        assert table.rows[0][1] == 1
        assert table.rows[1][1] == Fraction(1, 2)
        assert abs(table.rows[1][0].t - 1 / math.sqrt(2)) < 1e-15

    def test_cap(self):
        with pytest.raises(ValueError):
            brute_force_oracle(TwoSampleParams(8, 8), StatKind.PLUS)

    def test_matches_section3_table(self):
        table = brute_force_oracle(TwoSampleParams(3, 3), StatKind.PLUS)
        for a, expected in [(1, Fraction(3, 4)), (2, Fraction(3, 10)), (3, Fraction(1, 20))]:
            assert table.probability_at(atom_for_a(3, a)) == expected


class TestExactGeneral:
    def test_single_pair(self):
        p = TwoSampleParams(1, 1)
        assert exact_general(p, Atom(1, p.scale_sq), StatKind.PLUS) == Fraction(1, 2)

    def test_largest_atom_2_1(self):
        p = TwoSampleParams(2, 1)
        grid = atom_grid(p, StatKind.PLUS)
        assert exact_general(p, grid.atoms[-1], StatKind.PLUS) == Fraction(1, 3)

    def test_zero_threshold_is_one(self):
        p = TwoSampleParams(4, 7)
        assert exact_general(p, Atom(0, p.scale_sq), StatKind.PLUS) == 1
        assert exact_general(p, Atom(0, p.scale_sq), StatKind.TWO_SIDED) == 1

    def test_atom_params_checked(self):
        p = TwoSampleParams(2, 3)
        with pytest.raises(ValueError):
            exact_general(p, Atom(1, 999), StatKind.PLUS)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_oracle_equivalence_all_small_pairs(self, kind):
        for m in range(1, 12):
            for n in range(1, 12):
                if m + n > 12:
                    continue
                p = TwoSampleParams(m, n)
                oracle = brute_force_oracle(p, kind)
                for atom, prob in oracle.rows:
                    assert exact_general(p, atom, kind) == prob, (m, n, kind, atom.d)

    def test_closed_form_consistency(self):
        for n in range(1, 16):
            p = TwoSampleParams(n, n)
            for a in range(0, n + 1):
                atom = atom_for_a(n, a)
                assert exact_general(p, atom, StatKind.PLUS) == exact_onesided_equal(n, a)
                if a >= 1:
                    assert exact_general(p, atom, StatKind.TWO_SIDED) == exact_twosided_equal(n, a)

    def test_plus_minus_symmetry(self):
        for m, n in [(2, 5), (3, 4), (1, 6), (4, 7)]:
            p = TwoSampleParams(m, n)
            q = TwoSampleParams(n, m)
            for atom in atom_grid(p, StatKind.PLUS):
                assert exact_general(p, atom, StatKind.PLUS) == exact_general(
                    q, atom.d, StatKind.MINUS
                )

    def test_union_bound(self):
        for m, n in [(2, 3), (3, 4), (2, 7), (5, 5)]:
            p = TwoSampleParams(m, n)
            for atom in atom_grid(p, StatKind.TWO_SIDED):
                two = exact_general(p, atom, StatKind.TWO_SIDED)
                plus = exact_general(p, atom.d, StatKind.PLUS)
                minus = exact_general(p, atom.d, StatKind.MINUS)
                assert two <= plus + minus


class TestAtomGrid:
    def test_equal_sizes_grid(self):
        p = TwoSampleParams(4, 4)
        grid = atom_grid(p, StatKind.PLUS)
        assert [atom.d for atom in grid] == [4 * a for a in range(5)]
        for a, atom in enumerate(grid):
            assert atom.a_index(4) == a
            assert abs(atom.t - a / math.sqrt(8)) < 1e-15

    def test_single_pair_grid(self):
        grid = atom_grid(TwoSampleParams(1, 1), StatKind.PLUS)
        assert [atom.d for atom in grid] == [0, 1]

    def test_2_1_grid(self):
        grid = atom_grid(TwoSampleParams(2, 1), StatKind.PLUS)
        assert len(grid) == 3

    def test_grids_sorted_distinct(self):
        for m, n in [(3, 5), (4, 6), (2, 9)]:
            for kind in ALL_KINDS:
                ds = [atom.d for atom in atom_grid(TwoSampleParams(m, n), kind)]
                assert ds == sorted(set(ds))

    def test_plus_and_minus_grids_match(self):
        p = TwoSampleParams(3, 7)
        assert atom_grid(p, StatKind.PLUS).atoms == atom_grid(p, StatKind.MINUS).atoms

    def test_t_squared_rational(self):
        atom = atom_for_a(3, 2)
        assert atom.t_squared == Fraction(4, 6)


class TestDistTable:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_monotone_nonincreasing_positive(self, kind):
        for m, n in [(2, 3), (4, 5), (6, 6)]:
            table = dist_table(TwoSampleParams(m, n), kind)
            probs = [prob for _, prob in table.rows]
            assert all(p > 0 for p in probs)
            assert all(a >= b for a, b in zip(probs, probs[1:]))
            assert probs[0] <= 1

    def test_first_entry_is_one_at_zero(self):
        table = dist_table(TwoSampleParams(3, 4), StatKind.PLUS)
        atom, prob = table.rows[0]
        assert atom.d == 0 and prob == 1
