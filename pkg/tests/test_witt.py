"""
Tests for witt module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import itertools  # noqa: E402
from unittest.mock import patch  # noqa: E402

import pytest  # noqa: E402
from exact_algebra import (  # noqa: E402
    DivisibilityError,
    IntPolynomial,
    ResidueRing,
)
from fp_algebra import dual_numbers, f4  # noqa: E402
from witt import (  # noqa: E402
    WittError,
    WittRing,
    check_delta_axioms,
    check_ghost_homomorphism,
    identity_delta,
    is_perfect_delta,
    mod_p_equivalence_check,
    residue_witt_isomorphism,
    strict_p_check,
    witt_add,
    witt_delta,
    witt_frobenius,
    witt_int_vector,
    witt_lift_diagnostics,
    witt_polys,
)


def all_pairs(ring):
    elements = ring.sorted_elements()
    return itertools.product(elements, repeat=2)


class TestWittPolynomials:
    """Test cases for the universal sum and product polynomials."""

    def test_second_sum_polynomial_at_two(self):
        """Test S_1 = X_1 + Y_1 - X_0 Y_0 for p = 2."""
        x0, x1, y0, y1 = IntPolynomial.variables_of(["X0", "X1", "Y0", "Y1"])
        polys = witt_polys(2, 2)
        assert polys.sums[0] == x0 + y0
        assert polys.sums[1] == x1 + y1 - x0 * y0
        assert polys.products[0] == x0 * y0

    @pytest.mark.parametrize("p,n", [(2, 3), (3, 3), (5, 2)])
    def test_ghost_identities(self, p, n):
        """Test that the solved polynomials satisfy the ghost identities exactly."""
        assert witt_polys(p, n).check_ghost_identities().passed

    def test_memoized(self):
        """Test that repeated requests return the same object."""
        assert witt_polys(3, 2) is witt_polys(3, 2)

    def test_zero_length_rejected(self):
        """Test that W_0 is refused."""
        with pytest.raises(WittError, match="at least 1"):
            witt_polys(2, 0)
        with pytest.raises(WittError):
            WittRing(ResidueRing(2, 1), 0)

    def test_integer_coordinates(self):
        """Test Witt coordinates of integers, whose ghost components are constant."""
        assert witt_int_vector(2, 2, 2) == (2, -1)
        assert witt_int_vector(1, 3, 3) == (1, 0, 0)


class TestWittRing:
    """Test cases for W_n(A) arithmetic."""

    def setup_method(self):
        """Set up test fixtures."""
        self.base = ResidueRing(2, 1)
        self.ring = WittRing(self.base, 2)

    def test_one_plus_one_carries(self):
        """Test that 1 + 1 = (0, 1) in W_2(F_2)."""
        one = self.ring.one()
        expected = self.ring.vector([self.base.element(0), self.base.element(1)])
        assert self.ring.add(one, one) == expected
        assert self.ring.from_int(2) == expected

    def test_describe_and_size(self):
        """Test W_n(A) description and cardinality."""
        assert self.ring.describe() == "W_2(Z/2^1)"
        assert self.ring.size() == 4

    def test_wrong_length_vector(self):
        """Test that vectors must have n components."""
        with pytest.raises(WittError, match="needs 2 components"):
            self.ring.vector([self.base.zero()])

    def test_mixed_rings_rejected(self):
        """Test that Witt vectors over different rings do not add."""
        other = WittRing(self.base, 3)
        with pytest.raises(WittError, match="must agree"):
            witt_add(self.ring.one(), other.one())

    def test_ghost_map_is_a_homomorphism(self):
        """Test the ghost map on W_2(Z/4), where p is not zero."""
        ring = WittRing(ResidueRing(2, 2), 2)
        assert check_ghost_homomorphism(ring, all_pairs(ring)).passed

    @pytest.mark.parametrize("p,n", [(2, 3), (3, 2), (5, 1)])
    def test_residue_isomorphism(self, p, n):
        """Test W_n(F_p) is isomorphic to Z/p^n."""
        assert residue_witt_isomorphism(p, n).passed

    def test_divide_by_p_needs_injective_frobenius(self):
        """Test that division by p over a non-reduced base is refused."""
        ring = WittRing(dual_numbers(2), 2)
        with pytest.raises(DivisibilityError, match="not determined"):
            ring.divide_by_p(ring.zero())

    def test_witt_frobenius_needs_perfect_base(self):
        """Test that the bijective Frobenius is only offered over perfect bases."""
        ring = WittRing(dual_numbers(2), 2)
        with pytest.raises(WittError, match="perfect"):
            witt_frobenius(ring.one())

    def test_arithmetic_cache_is_bounded(self):
        """Test that a tiny operation cache stays bounded and gives the same sums."""
        with patch("witt.MEMO_SIZE", 4):
            small = WittRing(ResidueRing(2, 2), 2)
            pairs = list(all_pairs(small))
            sums = [small.add(a, b) for a, b in pairs]
            products = [small.mul(a, b) for a, b in pairs]
        for cached in (small._add_components, small._mul_components):
            info = cached.cache_info()
            assert info.maxsize == 4
            assert info.currsize <= 4
        reference = WittRing(ResidueRing(2, 2), 2)
        assert sums == [reference.add(a, b) for a, b in pairs]
        assert products == [reference.mul(a, b) for a, b in pairs]


class TestDeltaStructures:
    """Test cases for δ-structures and their axioms."""

    def test_witt_delta_satisfies_axioms(self):
        """Test the δ-axioms for W(Frob) on W_2(F_4) on every pair."""
        ring = WittRing(f4(), 2)
        assert check_delta_axioms(witt_delta(ring), all_pairs(ring)).passed

    def test_identity_delta_on_residues(self):
        """Test that the identity lift gives the δ-structure of Z/8."""
        carrier = ResidueRing(2, 3)
        assert check_delta_axioms(identity_delta(carrier), all_pairs(carrier)).passed

    def test_shifted_delta_fails(self):
        """Test that δ + 1 is reported with the name of the corrupted structure."""
        ring = WittRing(f4(), 2)
        outcome = check_delta_axioms(witt_delta(ring).shifted(), all_pairs(ring))
        assert not outcome.passed
        assert outcome.witness["structure"] == "W(Frob)+shift"

    def test_perfect_delta(self):
        """Test bijectivity of the Frobenius lift over perfect and non-perfect bases."""
        perfect = WittRing(f4(), 2)
        assert is_perfect_delta(witt_delta(perfect).lift, perfect)
        imperfect = WittRing(dual_numbers(2), 2)
        assert not is_perfect_delta(witt_delta(imperfect).lift, imperfect)

    def test_delta_cache_is_bounded(self):
        """Test that δ values stay correct when the cache holds only three."""
        carrier = ResidueRing(2, 3)
        with patch("witt.MEMO_SIZE", 3):
            structure = identity_delta(carrier)
            values = [structure.delta(x) for x in carrier.sorted_elements()]
        info = structure._derived_delta.cache_info()
        assert (info.maxsize, info.currsize) == (3, 3)
        fresh = identity_delta(carrier)
        assert values == [fresh.delta(x) for x in carrier.sorted_elements()]


class TestStructuralChecks:
    """Test cases for W_n over perfect algebras."""

    def test_strict_p_check(self):
        """Test W_2(F_4)/p is F_4."""
        outcome = strict_p_check(f4(), 2)
        assert outcome.passed
        assert outcome.witness == {"quotient_size": 4}

    def test_strict_p_check_rejects_imperfect(self):
        """Test that non-perfect bases are refused."""
        with pytest.raises(WittError, match="perfect"):
            strict_p_check(dual_numbers(2), 2)

    def test_lift_diagnostics_for_dual_numbers(self):
        """Test that the lift on W_2(F_2[x]/x^2) matches reducedness."""
        diagnostics = witt_lift_diagnostics(dual_numbers(2), 2)
        assert not diagnostics.reduced
        assert not diagnostics.lift_injective
        assert diagnostics.consistent

    def test_mod_p_equivalence(self):
        """Test that δ-endomorphisms of W_2(F_4) match the two automorphisms of F_4."""
        outcome = mod_p_equivalence_check(f4(), f4(), 2)
        assert outcome.passed
        assert outcome.witness == {"maps": 2}
