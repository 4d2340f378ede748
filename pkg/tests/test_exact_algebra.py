"""
Tests for exact_algebra module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import itertools  # noqa: E402

import pytest  # noqa: E402
from hypothesis import given, strategies as st  # noqa: E402
from exact_algebra import (  # noqa: E402
    AlgebraError,
    CheckOutcome,
    DivisibilityError,
    FunctionRing,
    IntPolynomial,
    ModulusMismatchError,
    ResidueInt,
    ResidueRing,
    canonical_key,
    check_ring_axioms,
    exact_div_p,
    first_failure,
    ideal_closure,
    jsonable,
    ring_homomorphisms,
    validate_prime,
)


class TestResidueInt:
    """Test cases for residues modulo p^m."""

    def test_arithmetic_reduces_modulo_p_to_the_m(self):
        """Test that sums and products are reduced to canonical representatives."""
        a = ResidueInt.of(7, 2, 3)
        b = ResidueInt.of(3, 2, 3)
        assert (a + b).value == 2
        assert (a * b).value == 5
        assert (-a).value == 1
        assert (a**2).value == 1

    def test_of_reduces_negative_values(self):
        """Test that ResidueInt.of accepts any integer."""
        assert ResidueInt.of(-1, 3, 2).value == 8

    def test_non_canonical_value_rejected(self):
        """Test that the constructor refuses non-canonical values."""
        with pytest.raises(AlgebraError, match="not canonical"):
            ResidueInt(8, 2, 3)

    def test_zero_precision_rejected(self):
        """Test that the zero ring m=0 is excluded."""
        with pytest.raises(AlgebraError, match="precision"):
            ResidueInt(0, 2, 0)

    def test_non_prime_rejected(self):
        """Test that residues need a prime p."""
        with pytest.raises(AlgebraError, match="Invalid prime"):
            ResidueInt(0, 4, 1)

    def test_modulus_mismatch(self):
        """Test that mixing precisions raises instead of truncating silently."""
        with pytest.raises(ModulusMismatchError, match="truncate"):
            ResidueInt.of(1, 2, 3) + ResidueInt.of(1, 2, 2)

    def test_truncate(self):
        """Test explicit precision lowering."""
        assert ResidueInt.of(7, 2, 3).truncate(2) == ResidueInt.of(3, 2, 2)
        with pytest.raises(AlgebraError):
            ResidueInt.of(7, 2, 3).truncate(4)

    def test_json_round_trip_and_error(self):
        """Test ResidueInt JSON form and the error for a missing key."""
        a = ResidueInt.of(5, 3, 2)
        assert ResidueInt.from_json(a.to_json()) == a
        with pytest.raises(AlgebraError, match="missing key"):
            ResidueInt.from_json({"p": 3, "m": 2})

    @given(st.integers(), st.integers(), st.integers())
    def test_ring_laws_hold_for_any_integers(self, x, y, z):
        """Test distributivity and commutativity on arbitrary integer inputs."""
        a, b, c = (ResidueInt.of(v, 3, 3) for v in (x, y, z))
        assert a + b == b + a
        assert a * (b + c) == a * b + a * c

    @given(st.integers(), st.integers())
    def test_truncation_is_a_ring_map(self, x, y):
        """Test that truncate commutes with sums and products."""
        a, b = ResidueInt.of(x, 2, 4), ResidueInt.of(y, 2, 4)
        assert (a + b).truncate(2) == a.truncate(2) + b.truncate(2)
        assert (a * b).truncate(2) == a.truncate(2) * b.truncate(2)


class TestExactDivision:
    """Test cases for exact division by p."""

    def test_residue_division_lowers_precision(self):
        """Test that 6 mod 8 divided by 2 is 3 mod 4."""
        assert exact_div_p(ResidueInt.of(6, 2, 3), 2) == ResidueInt(3, 2, 2)

    def test_residue_not_divisible(self):
        """Test that division never rounds."""
        with pytest.raises(DivisibilityError, match="never rounds"):
            exact_div_p(ResidueInt.of(5, 2, 3), 2)

    def test_residue_precision_one(self):
        """Test that dividing at precision 1 is refused."""
        with pytest.raises(DivisibilityError, match="precision 0"):
            exact_div_p(ResidueInt.of(0, 2, 1), 2)

    def test_polynomial_division(self):
        """Test ((x + y)^2 - x^2 - y^2) / 2 = xy exactly."""
        x, y = IntPolynomial.variables_of(["x", "y"])
        assert ((x + y) ** 2 - x**2 - y**2).exact_div_p(2) == x * y

    def test_polynomial_not_divisible(self):
        """Test that a non-divisible polynomial raises DivisibilityError."""
        (x,) = IntPolynomial.variables_of(["x"])
        with pytest.raises(DivisibilityError, match="internal fault"):
            (x + 1).exact_div_p(2)

    @given(st.integers(min_value=-50, max_value=50), st.integers(0, 5))
    def test_polynomial_multiple_of_p_divides(self, c, e):
        """Test that p * f / p recovers f."""
        (x,) = IntPolynomial.variables_of(["x"])
        f = x**e + c
        assert (3 * f).exact_div_p(3) == f

    def test_unsupported_type(self):
        """Test that exact_div_p names the offending type."""
        with pytest.raises(TypeError, match="str"):
            exact_div_p("4", 2)


class TestFiniteRings:
    """Test cases for the finite ring carriers."""

    def test_residue_ring_axioms(self):
        """Test that Z/4 satisfies the ring axioms exhaustively."""
        ring = ResidueRing(2, 2)
        elements = ring.sorted_elements()
        outcome = check_ring_axioms(
            ring,
            itertools.product(elements, repeat=2),
            itertools.product(elements, repeat=3),
        )
        assert outcome.passed
        assert outcome.witness == {"triples": 64}

    def test_function_ring_divide_by_p(self):
        """Test pointwise division in Cont(S, Z/4)."""
        ring = FunctionRing((0, 1), 2, 2)
        assert ring.divide_by_p(ring.function([2, 0])) == (
            ResidueInt(1, 2, 1),
            ResidueInt(0, 2, 1),
        )
        with pytest.raises(DivisibilityError):
            ring.divide_by_p(ring.function([1, 0]))

    def test_function_ring_rejects_repeated_points(self):
        """Test that the domain must not repeat points."""
        with pytest.raises(AlgebraError, match="repeated"):
            FunctionRing((0, 0), 2, 1)

    def test_lowered_at_precision_one(self):
        """Test that F_p has no lower precision."""
        with pytest.raises(AlgebraError, match="no lower precision"):
            ResidueRing(3, 1).lowered()

    def test_ring_homomorphisms(self):
        """Test Hom(Z/4, Z/2) has one map and Hom(Z/2, Z/4) has none."""
        assert len(ring_homomorphisms(ResidueRing(2, 2), ResidueRing(2, 1))) == 1
        assert ring_homomorphisms(ResidueRing(2, 1), ResidueRing(2, 2)) == []

    def test_ideal_closure(self):
        """Test that the ideal generated by 2 in Z/8 is {0, 2, 4, 6}."""
        ring = ResidueRing(2, 3)
        ideal = ideal_closure(ring, [ring.element(2)])
        assert {a.value for a in ideal} == {0, 2, 4, 6}


class TestHelpers:
    """Test cases for primes, ordering and outcomes."""

    def test_validate_prime(self):
        """Test prime validation, including bools."""
        assert validate_prime(7) == 7
        for bad in (1, 4, True, -3):
            with pytest.raises(AlgebraError):
                validate_prime(bad)

    def test_canonical_key_orders_kinds(self):
        """Test that ints sort before strings, which sort before tuples."""
        assert sorted(["a", (1,), 2], key=canonical_key) == [2, "a", (1,)]

    def test_jsonable(self):
        """Test conversion of residues and sets into JSON data."""
        value = {"x": frozenset({2, 1}), "r": ResidueInt.of(3, 2, 2)}
        assert jsonable(value) == {"x": [1, 2], "r": 3}

    def test_outcomes(self):
        """Test truthiness of outcomes and first_failure."""
        assert CheckOutcome.ok()
        assert not CheckOutcome.fail(law="x")
        combined = first_failure(
            iter([CheckOutcome.ok(), CheckOutcome.fail(i=1), CheckOutcome.fail(i=2)])
        )
        assert combined.witness == {"i": 1}
