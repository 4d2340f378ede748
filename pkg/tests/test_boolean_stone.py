"""
Tests for boolean_stone module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest  # noqa: E402
from boolean_stone import (  # noqa: E402
    PBooleanAlgebra,
    StoneError,
    char_p_diagnostics,
    coinvariants_adjunction_check,
    coperfection_adjunction_check,
    double_dual_check,
    dual_map,
    frobenius_coinvariants,
    frobenius_invariants,
    invariants_adjunction_check,
    is_p_boolean,
    p_boolean_iso_check,
    perfection_adjunction_check,
    perfections,
    pullback_map,
    spec_chars,
    stone_dual_of_set,
)
from fp_algebra import (  # noqa: E402
    dual_numbers,
    f4,
    function_algebra,
    idempotent_pair_algebra,
    prime_field,
)


class TestPBooleanAlgebras:
    """Test cases for p-Boolean algebras and their characters."""

    def test_is_p_boolean(self):
        """Test a^p = a detection on standard algebras."""
        assert is_p_boolean(function_algebra(["a", "b"], 3))
        assert is_p_boolean(idempotent_pair_algebra(2))
        assert not is_p_boolean(f4())
        assert not is_p_boolean(dual_numbers(2))

    def test_wrapper_rejects_non_boolean(self):
        """Test that PBooleanAlgebra refuses F_4."""
        with pytest.raises(StoneError, match="not p-Boolean"):
            PBooleanAlgebra(f4())

    def test_characters_of_idempotent_pair(self):
        """Test that {1, e} has the characters e -> 0 and e -> 1."""
        dual = spec_chars(idempotent_pair_algebra(2))
        assert dual.points == ((1, 0), (1, 1))
        assert len(dual) == 2

    def test_spec_chars_rejects_non_boolean(self):
        """Test that characters are only split for p-Boolean algebras."""
        with pytest.raises(StoneError, match="p-Boolean"):
            spec_chars(f4())

    def test_empty_set_has_no_dual(self):
        """Test that the empty set is refused."""
        with pytest.raises(StoneError, match="empty set"):
            stone_dual_of_set([], 2)

    @pytest.mark.parametrize(
        "algebra",
        [idempotent_pair_algebra(3), function_algebra(range(3), 2), prime_field(5)],
    )
    def test_evaluation_is_an_isomorphism(self, algebra):
        """Test that every p-Boolean algebra is F_p^{characters}."""
        assert p_boolean_iso_check(algebra).passed


class TestStoneDuality:
    """Test cases for pullbacks and double duals of set maps."""

    def setup_method(self):
        """Set up test fixtures."""
        self.source = ["a", "b"]
        self.target = ["u", "v", "w"]
        self.f = {"u": "a", "v": "a", "w": "b"}

    def test_pullback_is_a_homomorphism(self):
        """Test that g -> g o f is an algebra map F_2^S -> F_2^T."""
        algebra_map = pullback_map(self.f, self.source, self.target, 2)
        assert algebra_map.is_homomorphism()
        assert algebra_map.is_injective()

    def test_dual_map_has_one_entry_per_point(self):
        """Test that Spec of the pullback is defined on every point of T."""
        algebra_map = pullback_map(self.f, self.source, self.target, 2)
        assert len(dual_map(algebra_map)) == 3

    @pytest.mark.parametrize("p", [2, 3])
    def test_double_dual_recovers_map(self, p):
        """Test that dualizing twice recovers the original set map."""
        assert double_dual_check(self.f, self.source, self.target, p).passed


class TestFrobeniusConstructions:
    """Test cases for Frobenius invariants, coinvariants and perfections."""

    def test_invariants_of_f4(self):
        """Test that the Frobenius-fixed part of F_4 is F_2."""
        assert frobenius_invariants(f4()).source.dim == 1

    def test_coinvariants_of_f4_vanish(self):
        """Test that F_4 has no F_2-points, so its coinvariants are zero."""
        assert frobenius_coinvariants(f4()).target.is_zero_algebra()

    def test_perfection_of_dual_numbers(self):
        """Test that the Frobenius image of F_2[x]/x^2 stabilizes at F_2."""
        result = perfections(dual_numbers(2))
        assert result.image.dim == 1
        assert result.steps == 1
        assert result.unit.is_homomorphism()

    def test_diagnostics_find_nilpotent(self):
        """Test that x is reported as the nilpotent witness."""
        diagnostics = char_p_diagnostics(dual_numbers(2))
        assert not diagnostics.reduced
        assert diagnostics.nilpotent_witness == (0, 1)
        assert diagnostics.consistent
        assert diagnostics.to_json() == {
            "reduced": False,
            "frob_injective": False,
            "semiperfect": False,
        }


class TestAdjunctions:
    """Test cases for the Frobenius adjunction bijections."""

    def test_invariants(self):
        """Test Hom(F_2, F_4^Frob) = Hom(F_2, F_4)."""
        outcome = invariants_adjunction_check(prime_field(2), f4())
        assert outcome.passed
        assert outcome.witness == {"maps": 1}

    def test_coinvariants(self):
        """Test maps out of the coinvariants of F_2[x]/x^2 into F_2^2."""
        assert coinvariants_adjunction_check(
            dual_numbers(2), function_algebra([0, 1], 2)
        ).passed

    def test_coperfection(self):
        """Test that maps into F_4 factor through the coperfection."""
        assert coperfection_adjunction_check(dual_numbers(2), f4()).passed

    def test_perfection(self):
        """Test that the two automorphisms of F_4 factor through its perfection."""
        outcome = perfection_adjunction_check(f4(), f4())
        assert outcome.passed
        assert outcome.witness == {"maps": 2}
