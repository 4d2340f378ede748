"""
Tests for delta_duality module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import random  # noqa: E402

import pytest  # noqa: E402
from boolean_stone import pullback_map  # noqa: E402
from delta_duality import (  # noqa: E402
    DualityError,
    FunctionRingMap,
    LevelCover,
    StoneDeltaRingApprox,
    contravariance_check,
    cover_translation_check,
    delta_coinvariants,
    delta_invariants_adjunction_check,
    delta_perfection_adjunction_check,
    dualize_ring_map,
    duality_roundtrip_check,
    enumerate_covers,
    ff_check,
    flatness_correspondence_check,
    gelfand_check,
    invariants_reduction_check,
    p_complete_ff_check,
    phi_functor,
    psi_functor,
    stone_characterization_check,
    stone_model_check,
    witt_of_cont_iso,
)
from exact_algebra import FunctionRing, ResidueRing  # noqa: E402
from fp_algebra import AlgebraMap, f4, function_algebra  # noqa: E402
from profinite import (  # noqa: E402
    EquivRelPresentation,
    Tower,
    canonical_cantor,
    canonical_ntilde,
    constant_tower,
)
from witt import WittRing, identity_delta, witt_delta  # noqa: E402


class TestStoneDeltaRings:
    """Test cases for the functors between towers and Stone δ-rings."""

    def test_validate_checks_every_delta(self):
        """Test that δ is defined on all 256 functions on four points into Z/4."""
        outcome = phi_functor(canonical_cantor(2), 2, 2).validate()
        assert outcome.passed
        assert outcome.witness == {"delta_checked": 256}

    def test_validate_skips_large_carriers(self):
        """Test that carriers beyond the exhaustive limit are not enumerated."""
        outcome = phi_functor(canonical_cantor(2), 2, 2).validate(exhaustive_limit=16)
        assert outcome.witness == {"delta_checked": 0}

    def test_empty_tower_rejected(self):
        """Test that the empty tower has no Stone δ-ring."""
        with pytest.raises(DualityError, match="empty"):
            StoneDeltaRingApprox(Tower(((),), ()), 0, 2, 1)

    def test_psi_labels_points(self):
        """Test that characters are labelled by the points they evaluate at."""
        characters = psi_functor(phi_functor(canonical_ntilde(1), 1, 1))
        assert characters == {1: (1, 0), "∞": (0, 1)}

    @pytest.mark.parametrize("level", [0, 1, 2, 3])
    def test_roundtrip(self, level):
        """Test that psi(phi(S_n)) recovers every level of N-tilde."""
        outcome = duality_roundtrip_check(canonical_ntilde(3), level, 2)
        assert outcome.passed
        assert outcome.witness == {"points": level + 1}

    def test_witt_of_functions(self):
        """Test W_2(F_2^S) = Cont(S, Z/4) exhaustively on two points."""
        outcome = witt_of_cont_iso(canonical_cantor(1), 1, 2)
        assert outcome.passed
        assert outcome.witness == {"pairs": 256, "exhaustive": True}


class TestFunctionRingMaps:
    """Test cases for maps of function rings and their duals."""

    def setup_method(self):
        """Set up test fixtures."""
        self.source = ["a", "b"]
        self.target = ["u", "v"]
        self.collapse = {"u": "a", "v": "a"}
        self.swap = {"u": "b", "v": "a"}

    def test_dualize_recovers_set_map(self):
        """Test that evaluating indicators recovers the set map."""
        ring_map = FunctionRingMap.from_set_map(
            self.swap, self.source, self.target, 2, 3
        )
        assert dualize_ring_map(ring_map) == self.swap
        assert ring_map.set_map() == self.swap

    @pytest.mark.parametrize("p,m", [(2, 1), (2, 2), (3, 2)])
    def test_contravariance(self, p, m):
        """Test the set map round trip through ring maps at several precisions."""
        assert contravariance_check(self.collapse, self.source, self.target, p, m)

    def test_precision_mismatch(self):
        """Test that maps between different precisions are refused."""
        with pytest.raises(DualityError, match="Precision mismatch"):
            FunctionRingMap(
                FunctionRing(("a",), 2, 1), FunctionRing(("u",), 2, 2), (0,)
            )


class TestFlatness:
    """Test cases for faithful flatness of function algebra maps."""

    def test_missing_point_witness(self):
        """Test that a non-surjective map reports the missed point."""
        witness = ff_check(
            pullback_map({"u": "a", "v": "a"}, ["a", "b"], ["u", "v"], 2), ["a", "b"]
        )
        assert not witness.faithfully_flat
        assert not witness.injective
        assert witness.consistent
        assert witness.missing_point == "b"
        assert witness.kernel_element == (0, 1)

    def test_non_homomorphism_rejected(self):
        """Test that ff_check refuses linear maps that are not ring maps."""
        algebra = function_algebra(["a", "b"], 2)
        zero_map = AlgebraMap(algebra, algebra, ((0, 0), (0, 0)))
        with pytest.raises(DualityError, match="not one"):
            ff_check(zero_map)

    def test_p_complete_ff_of_surjection(self):
        """Test that a surjective set map lifts to a p-completely ff map."""
        ring_map = FunctionRingMap.from_set_map(
            {"u": "a", "v": "b", "w": "b"}, ["a", "b"], ["u", "v", "w"], 2, 3
        )
        witness = p_complete_ff_check(ring_map)
        assert witness.faithfully_flat
        assert witness.p_torsion_free_structurally

    def test_flatness_correspondence(self):
        """Test every map F_2^{a,b} -> F_2^{u,v} against its Witt lift."""
        outcome = flatness_correspondence_check(["a", "b"], ["u", "v"], 2, 2)
        assert outcome.passed
        assert outcome.witness == {"maps": 4}


class TestCovers:
    """Test cases for translating covers through the duality."""

    def test_non_surjective_cover(self):
        """Test that a cover missing a point translates to a non-ff product map."""
        cover = LevelCover.of([0, 1], [((0,), {0: 0})])
        assert not cover.is_jointly_surjective()
        assert cover.uncovered() == [1]
        outcome = cover_translation_check(cover, 2, 2)
        assert outcome.passed
        assert outcome.witness == {"jointly_surjective": False}

    def test_surjective_cover(self):
        """Test that a jointly surjective cover translates to an ff product map."""
        cover = LevelCover.of([0, 1], [((0,), {0: 0}), ((0,), {0: 1})])
        assert cover_translation_check(cover, 2, 1).witness == {
            "jointly_surjective": True
        }

    def test_enumerate_covers(self):
        """Test the number of single-member covers from one-point domains."""
        assert len(list(enumerate_covers([0, 1], 1, 1))) == 2
        assert len(list(enumerate_covers([0, 1], 1, 2))) == 3


class TestStoneCharacterization:
    """Test cases for recognising Stone δ-rings."""

    def test_function_ring_is_stone(self):
        """Test that Cont(S, Z/4) with the identity lift is recognised."""
        structure = identity_delta(FunctionRing((0, 1), 2, 2))
        outcome = stone_characterization_check(structure)
        assert outcome.passed
        assert outcome.witness["stone"] is True
        assert stone_model_check(structure).witness == {"points": 2, "stone": True}

    def test_witt_vectors_of_f4_are_not_stone(self):
        """Test that W_2(F_4) is not Stone and its coinvariants vanish."""
        structure = witt_delta(WittRing(f4(), 2))
        outcome = stone_characterization_check(structure)
        assert outcome.passed
        assert outcome.witness["stone"] is False
        assert delta_coinvariants(structure).quotient.size() == 1

    def test_gelfand(self):
        """Test the function ring of a quotient-presented level."""
        presentation = EquivRelPresentation.from_generating_pairs(
            constant_tower([0, 1, 2], 1), [[(0, 1)], [(0, 1)]], "r"
        )
        outcome = gelfand_check(presentation, 1, 2)
        assert outcome.passed
        assert outcome.witness == {"points": 2, "pairs": 256, "exhaustive": True}

    def test_gelfand_samples_large_rings(self):
        """Test that δ on 64 functions into Z/4 is checked on seeded pairs."""
        presentation = EquivRelPresentation.from_generating_pairs(
            constant_tower([0, 1, 2], 0), [[]], "trivial"
        )
        outcome = gelfand_check(
            presentation, 0, 2, rng=random.Random(7), samples=40, exhaustive_limit=100
        )
        assert outcome.passed
        assert outcome.witness == {"points": 3, "pairs": 40, "exhaustive": False}


class TestDeltaAdjunctions:
    """Test cases for δ-invariants and δ-perfection."""

    def test_invariants_reduce_to_frobenius_invariants(self):
        """Test that δ-invariants of W_2(F_4) reduce to F_2."""
        outcome = invariants_reduction_check(WittRing(f4(), 2))
        assert outcome.passed
        assert outcome.witness == {"size": 2}

    def test_invariants_reduction_needs_perfect_base(self):
        """Test that non-algebra bases are refused."""
        with pytest.raises(DualityError, match="perfect"):
            invariants_reduction_check(WittRing(ResidueRing(2, 1), 2))

    def test_invariants_adjunction(self):
        """Test maps from Z/4 into W_2(F_4) land in the δ-invariants."""
        stone = identity_delta(ResidueRing(2, 2))
        target = witt_delta(WittRing(f4(), 2))
        outcome = delta_invariants_adjunction_check(stone, target)
        assert outcome.passed
        assert outcome.witness == {"maps": 1}

    def test_perfection_adjunction(self):
        """Test maps from Z/4 factor through the δ-perfection of Z/4."""
        structure = identity_delta(ResidueRing(2, 2))
        assert delta_perfection_adjunction_check(structure, structure).passed
