"""
Tests for profinite module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import random  # noqa: E402

import pytest  # noqa: E402
from hypothesis import given, settings, strategies as st  # noqa: E402
from profinite import (  # noqa: E402
    INFINITY,
    EquivRelPresentation,
    PresentationError,
    Tower,
    TowerError,
    canonical_cantor,
    canonical_ntilde,
    cantor_surjection,
    check_sequential_surjectivity,
    constant_tower,
    cont_functions,
    dyadic_identified_pairs,
    dyadic_interval_presentation,
    fiber_product_universal_check,
    inflation,
    level_map_to_constant,
    presentation_from_map,
    promap_compose,
    promap_identity,
    promaps_equal,
    quotient_presentation,
    quotient_tower,
    random_tower,
    sequential_lifts,
    shift_map,
    tower_fiber_product,
    tower_limit_elements,
    tower_product,
    tower_truncate,
    truncation_map,
    union_find_quotient,
)


def non_surjective_tower():
    return Tower(((0, 1), (0,)), ((0,),), "gap")


class TestTower:
    """Test cases for tower construction and validation."""

    def test_ntilde_levels(self):
        """Test that level n of N-tilde is {1..n, ∞} and large points fall to ∞."""
        tower = canonical_ntilde(2)
        assert tower.level(0) == (INFINITY,)
        assert tower.level(2) == (1, 2, INFINITY)
        assert tower.transition(1, 1) == 1
        assert tower.transition(1, 2) == INFINITY

    def test_cantor_levels(self):
        """Test that level n of Cantor space is {0,1}^n and transitions drop a bit."""
        tower = canonical_cantor(3)
        assert [len(level) for level in tower.levels] == [1, 2, 4, 8]
        assert tower.level(0) == ((),)
        assert tower.project(3, 1, (1, 0, 1)) == (1,)
        assert tower.project(2, 0, (1, 0)) == ()
        assert tower.fiber(0, ()) == ((0,), (1,))
        assert tower.fiber(1, (0,)) == ((0, 0), (0, 1))

    def test_cantor_empty_word_survives_json(self):
        """Test that the one-point level 0 of Cantor space reloads from JSON."""
        tower = canonical_cantor(2)
        assert tower.to_json()["levels"][0] == [[]]
        assert Tower.from_json(tower.to_json()) == tower

    @pytest.mark.parametrize(
        "levels,transitions,message",
        [
            (((0,), (0, 1)), (), "expected one fewer"),
            (((), (0,)), ((),), "mixes empty"),
            (((0, 0),), (), "repeats a label"),
            (((0,), (0, 1)), ((0, 5),), "not a total"),
        ],
    )
    def test_invalid_towers(self, levels, transitions, message):
        """Test that malformed towers raise TowerError with a clear message."""
        with pytest.raises(TowerError, match=message):
            Tower(levels, transitions, "bad")

    def test_empty_tower_allowed(self):
        """Test that the tower with every level empty is valid."""
        tower = Tower(((), ()), ((),))
        assert tower.is_empty()

    def test_level_out_of_range(self):
        """Test level lookups beyond the depth."""
        with pytest.raises(TowerError, match="outside tower"):
            canonical_cantor(1).level(2)

    def test_json_round_trip_and_depth_check(self):
        """Test tower JSON loading, including a declared depth that disagrees."""
        tower = canonical_ntilde(3)
        assert Tower.from_json(tower.to_json()) == tower
        data = tower.to_json()
        data["depth"] = 5
        with pytest.raises(TowerError, match="declares depth"):
            Tower.from_json(data)

    def test_truncation_ignores_name_in_equality(self):
        """Test that truncating Cantor(3) to depth 2 gives Cantor(2)."""
        truncated = tower_truncate(canonical_cantor(3), 2)
        assert truncated == canonical_cantor(2)
        assert truncated.name == "cantor|2"

    def test_constant_tower_name(self):
        """Test the default name of a discrete tower."""
        assert constant_tower(["b", "a"], 2).name == "discrete2"
        assert constant_tower(["b", "a"], 2).level(1) == ("a", "b")


class TestSurjectivity:
    """Test cases for sequential lifting along surjective transitions."""

    def test_cantor_lifts_every_point(self):
        """Test that each of the 7 points of Cantor(2) lifts."""
        outcome = check_sequential_surjectivity(canonical_cantor(2))
        assert outcome.passed
        assert outcome.witness == {"tower": "cantor", "lifted_points": 7}

    def test_missing_point_reported(self):
        """Test that the first point outside the image is the witness."""
        outcome = check_sequential_surjectivity(non_surjective_tower())
        assert not outcome.passed
        assert outcome.witness == {"tower": "gap", "level": 0, "missing": 1}

    def test_lifts_raise_on_empty_fiber(self):
        """Test that lifting through an empty fiber fails loudly."""
        with pytest.raises(TowerError, match="empty fiber"):
            sequential_lifts(non_surjective_tower())

    def test_limit_elements_shrink(self):
        """Test that only points hit from the top level survive."""
        assert tower_limit_elements(non_surjective_tower(), 0) == (0,)
        assert tower_limit_elements(canonical_ntilde(3), 1) == (1, INFINITY)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 3))
    def test_random_surjective_towers_lift(self, seed, depth):
        """Test sequential surjectivity of seeded random surjective towers."""
        tower = random_tower(random.Random(seed), depth, 3)
        assert tower.has_surjective_transitions()
        assert check_sequential_surjectivity(tower).passed


class TestProMaps:
    """Test cases for pro-maps, composition and limits."""

    def test_shift_equals_truncation(self):
        """Test that the shift map and the truncation agree as pro-maps."""
        tower = canonical_ntilde(3)
        assert shift_map(tower).commutes().passed
        assert promaps_equal(shift_map(tower), truncation_map(tower, 2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 3))
    def test_identity_is_neutral(self, seed, depth):
        """Test identity laws for composition on random towers."""
        tower = random_tower(random.Random(seed), depth, 3)
        shift = shift_map(tower)
        assert promaps_equal(promap_compose(promap_identity(tower), shift), shift)
        target = shift.target
        assert promaps_equal(promap_compose(shift, promap_identity(target)), shift)

    def test_compose_mismatch(self):
        """Test that composition needs matching ends."""
        with pytest.raises(TowerError, match="Cannot compose"):
            promap_compose(
                promap_identity(canonical_cantor(1)),
                promap_identity(canonical_ntilde(1)),
            )

    def test_tower_product(self):
        """Test levelwise products and their naming."""
        product = tower_product(canonical_cantor(1), canonical_ntilde(1))
        assert product.name == "(cantorxntilde)"
        assert len(product.level(0)) == 1
        assert len(product.level(1)) == 4

    def test_cantor_square_level_two(self):
        """Test the 16-point level 2 of Cantor x Cantor and its transitions."""
        product = tower_product(canonical_cantor(2), canonical_cantor(2))
        assert len(product.level(2)) == 16
        assert product.has_surjective_transitions()
        assert product.transition(1, ((0, 1), (1, 1))) == ((0,), (1,))
        assert product.project(2, 0, ((1, 0), (0, 0))) == ((), ())

    def test_fiber_product_universal_property(self):
        """Test unique factorization of cones through a fiber product."""
        tower = canonical_cantor(2)
        f = level_map_to_constant(tower, [0, 1], lambda w: w[0], level=1)
        g = level_map_to_constant(tower, [0, 1], lambda w: w[0], level=1)
        product = tower_fiber_product(f, g)
        assert len(product.tower.level(0)) == 2
        assert fiber_product_universal_check(product).passed

    def test_first_bit_fiber_product_matches_brute_force(self):
        """Test Cantor x_{0,1} Cantor over the first bit against all word pairs."""
        tower = canonical_cantor(3)
        first_bit = level_map_to_constant(tower, [0, 1], lambda w: w[0], level=1)
        product = tower_fiber_product(first_bit, first_bit)
        for n in range(product.tower.depth + 1):
            words = tower.level(n + 1)
            expected = {(a, b) for a in words for b in words if a[0] == b[0]}
            assert set(product.tower.level(n)) == expected
        assert [len(level) for level in product.tower.levels] == [2, 8, 32]
        assert product.tower.has_surjective_transitions()
        assert product.left.is_level_surjective()

    def test_cantor_surjection(self):
        """Test that Cantor space surjects onto N-tilde levelwise."""
        surjection = cantor_surjection(canonical_ntilde(2))
        assert surjection.is_level_surjective()
        assert surjection.commutes().passed

    def test_cantor_surjection_needs_surjective_tower(self):
        """Test that towers with gaps are refused."""
        with pytest.raises(TowerError, match="surjective"):
            cantor_surjection(non_surjective_tower())


class TestPresentations:
    """Test cases for quotient presentations."""

    def test_quotient_tower(self):
        """Test that identifying 0 and 1 in a constant tower leaves two classes."""
        tower = constant_tower([0, 1, 2], 1)
        presentation = EquivRelPresentation.from_generating_pairs(
            tower, [[(0, 1)], [(0, 1)]], "r"
        )
        quotient = quotient_tower(presentation)
        assert quotient.levels == ((0, 2), (0, 2))
        assert quotient.name == "discrete3/r"

    def test_pair_outside_level(self):
        """Test that identified pairs must lie in the level."""
        with pytest.raises(PresentationError, match="not in level"):
            EquivRelPresentation.from_generating_pairs(
                constant_tower([0, 1], 0), [[(0, 7)]]
            )

    @pytest.mark.parametrize("n,size", [(0, 1), (1, 2), (2, 3), (3, 5)])
    def test_dyadic_quotient_sizes(self, n, size):
        """Test the dyadic interval levels against the union-find oracle."""
        presentation = dyadic_interval_presentation(3)
        quotient = quotient_presentation(presentation, n)
        oracle = union_find_quotient(
            presentation.tower.level(n), dyadic_identified_pairs(n)
        )
        assert len(quotient) == size == len(oracle)
        if n:
            assert size == 2**n - (2 ** (n - 1) - 1)

    def test_dyadic_pairs_at_level_three(self):
        """Test the identified endpoints among binary words of length 3."""
        assert sorted(dyadic_identified_pairs(3)) == [
            ((0, 0, 1), (0, 1, 0)),
            ((0, 1, 1), (1, 0, 0)),
            ((1, 0, 1), (1, 1, 0)),
        ]

    def test_dyadic_relation_is_not_transition_compatible(self):
        """Test that dyadic endpoint identifications do not descend one level."""
        with pytest.raises(PresentationError, match="not transition-compatible"):
            quotient_tower(dyadic_interval_presentation(2))

    def test_non_symmetric_relation(self):
        """Test that equivalence checking reports asymmetry."""
        presentation = EquivRelPresentation(
            constant_tower([0, 1], 0), (frozenset({(0, 0), (1, 1), (0, 1)}),)
        )
        outcome = presentation.check_equivalence(0)
        assert outcome.witness == {"level": 0, "property": "symmetric", "pair": [0, 1]}

    def test_union_find(self):
        """Test the union-find oracle."""
        assert union_find_quotient([0, 1, 2, 3], [(0, 1), (2, 3)]) == (
            (0, 1),
            (2, 3),
        )

    def test_presentation_from_map(self):
        """Test that the kernel pair of a parity map has two classes."""
        tower = constant_tower([0, 1, 2, 3], 1)
        f = level_map_to_constant(tower, [0, 1], lambda x: x % 2)
        quotient = quotient_tower(presentation_from_map(f))
        assert [len(level) for level in quotient.levels] == [2, 2]


class TestLocallyConstantFunctions:
    """Test cases for functions on tower levels."""

    def test_inflation(self):
        """Test that inflating an indicator pulls it back along the transition."""
        tower = canonical_cantor(1)
        ring = cont_functions(tower, 0, 2, 1)
        inflated = inflation(tower, 0, 2, 1)(ring.indicator(()))
        assert [x.value for x in inflated] == [1, 1]

    def test_inflation_from_level_one(self):
        """Test inflating the indicator of the word 0 to words of length 2."""
        tower = canonical_cantor(2)
        ring = cont_functions(tower, 1, 2, 1)
        inflated = inflation(tower, 1, 2, 1)(ring.indicator((0,)))
        assert [x.value for x in inflated] == [1, 1, 0, 0]
