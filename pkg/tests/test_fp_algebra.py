"""
Tests for fp_algebra module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest  # noqa: E402
from exact_algebra import AlgebraError  # noqa: E402
from fp_algebra import (  # noqa: E402
    AlgebraMap,
    FiniteFpAlgebra,
    Subspace,
    algebra_maps,
    dual_numbers,
    f4,
    function_algebra,
    idempotent_pair_algebra,
    matrix_rank,
    prime_field,
    product_algebra,
)


class TestFiniteFpAlgebra:
    """Test cases for algebras given by structure constants."""

    def test_f4_multiplication(self):
        """Test that w^2 = w + 1 in F_4."""
        algebra = f4()
        w = (0, 1)
        assert algebra.mul(w, w) == (1, 1)
        assert algebra.size() == 4

    def test_frobenius_perfectness(self):
        """Test which standard algebras have bijective Frobenius."""
        assert f4().is_perfect()
        assert function_algebra(["a", "b", "c"], 2).is_perfect()
        assert idempotent_pair_algebra(3).is_perfect()
        assert not dual_numbers(2).is_perfect()
        assert dual_numbers(2).frobenius_rank == 1

    def test_zero_dimension_rejected(self):
        """Test that from_structure refuses the zero algebra."""
        with pytest.raises(AlgebraError, match="dimension 0"):
            FiniteFpAlgebra.from_structure(2, [], [])

    def test_non_commutative_constants_rejected(self):
        """Test that validation reports non-commutative constants."""
        structure = [[[1, 0], [0, 1]], [[0, 0], [0, 1]]]
        with pytest.raises(AlgebraError, match="not commutative"):
            FiniteFpAlgebra.from_structure(2, structure, [1, 0])

    def test_bad_unit_rejected(self):
        """Test that a unit which is not an identity is refused."""
        with pytest.raises(AlgebraError, match="does not act as identity"):
            FiniteFpAlgebra.from_structure(2, [[[1]]], [0])

    def test_from_json_missing_key(self):
        """Test the error message for incomplete algebra JSON."""
        with pytest.raises(AlgebraError, match="missing key"):
            FiniteFpAlgebra.from_json({"p": 2, "dim": 1, "unit": [1]})

    def test_json_round_trip(self):
        """Test that to_json output loads back to an equal algebra."""
        algebra = dual_numbers(3)
        loaded = FiniteFpAlgebra.from_json(algebra.to_json())
        assert loaded == algebra
        assert loaded.labels == ("1", "x")

    def test_quotients(self):
        """Test F_p[x]/(x^2) modulo x is F_p and modulo 1 is zero."""
        algebra = dual_numbers(2)
        projection = algebra.quotient([(0, 1)])
        assert projection.target.dim == 1
        assert projection.is_surjective()
        assert algebra.quotient([algebra.one()]).target.is_zero_algebra()

    def test_subalgebra_of_unit(self):
        """Test that the span of 1 is the prime subfield."""
        algebra = f4()
        inclusion = algebra.subalgebra([])
        assert inclusion.source.dim == 1
        assert inclusion.is_injective()

    def test_describe(self):
        """Test the human-readable algebra description."""
        assert f4().describe() == "F_2-algebra of dimension 2 (1, w)"


class TestAlgebraMaps:
    """Test cases for map enumeration and composition."""

    def test_characters_of_function_algebra_are_points(self):
        """Test that F_2^S has one F_2-point per element of S."""
        assert len(algebra_maps(function_algebra(["a", "b"], 2), prime_field(2))) == 2

    def test_no_map_from_f4_to_f2(self):
        """Test that F_4 has no F_2-points while F_2 maps uniquely into F_4."""
        assert algebra_maps(f4(), prime_field(2)) == []
        assert len(algebra_maps(prime_field(2), f4())) == 1

    def test_mixed_primes_rejected(self):
        """Test that maps between different characteristics are refused."""
        with pytest.raises(AlgebraError, match="No algebra maps"):
            algebra_maps(prime_field(2), prime_field(3))
        with pytest.raises(AlgebraError):
            product_algebra(prime_field(2), prime_field(3))

    def test_enumeration_bound(self):
        """Test that oversized enumerations are refused."""
        source = function_algebra(range(5), 2)
        with pytest.raises(AlgebraError, match="Refusing to enumerate"):
            algebra_maps(source, source)

    def test_identity_composition(self):
        """Test that the identity map is an isomorphism and composes trivially."""
        algebra = product_algebra(prime_field(2), f4())
        identity = AlgebraMap.identity(algebra)
        assert identity.is_homomorphism()
        assert identity.is_isomorphism()
        assert identity.then(identity) == identity

    def test_shape_mismatch(self):
        """Test that a matrix of the wrong shape is refused."""
        with pytest.raises(AlgebraError, match="wrong shape"):
            AlgebraMap(f4(), prime_field(2), ((1,),))


class TestLinearAlgebra:
    """Test cases for F_p row reduction helpers."""

    def test_matrix_rank(self):
        """Test rank over F_2 and F_3."""
        assert matrix_rank([[1, 1], [1, 1]], 2) == 1
        assert matrix_rank([[1, 2], [2, 1]], 3) == 1
        assert matrix_rank([[1, 0], [0, 1]], 5) == 2

    def test_subspace_reduce_and_coordinates(self):
        """Test membership and coordinates in a spanned subspace."""
        space = Subspace.span([(1, 1, 0)], 2, 3)
        assert space.contains((1, 1, 0))
        assert not space.contains((1, 0, 0))
        assert space.coordinates((1, 1, 0)) == (1,)
        with pytest.raises(AlgebraError, match="not in the subspace"):
            space.coordinates((0, 0, 1))
