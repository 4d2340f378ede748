"""
Tests for fixtures module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import json  # noqa: E402
from pathlib import Path  # noqa: E402

import pytest  # noqa: E402
from delta_duality import p_complete_ff_check  # noqa: E402
from fixtures import (  # noqa: E402
    DATA_DIR,
    FixtureError,
    load_algebra,
    load_corpus,
    load_presentation,
    load_set_map,
    load_tower,
    read_json,
    standard_algebras,
)
from fp_algebra import f4  # noqa: E402
from profinite import (  # noqa: E402
    canonical_cantor,
    check_sequential_surjectivity,
    dyadic_interval_presentation,
)

DATA = Path(__file__).parent / "data"


class TestReadJson:
    """Test cases for JSON sources."""

    def test_sources(self):
        """Test dicts, inline JSON text and file paths."""
        assert read_json({"a": 1}) == {"a": 1}
        assert read_json(' {"a": 1}') == {"a": 1}
        assert read_json(DATA / "gap_tower.json")["name"] == "gap"

    def test_invalid_inline(self):
        """Test the error for inline text that is not JSON."""
        with pytest.raises(FixtureError, match="Inline JSON could not be parsed"):
            read_json("{oops")

    def test_missing_file(self, tmp_path):
        """Test the error for a path that does not exist."""
        with pytest.raises(FixtureError, match="Missing fixture file"):
            read_json(tmp_path / "nowhere.json")

    def test_invalid_file(self, tmp_path):
        """Test the error for a file holding invalid JSON."""
        path = tmp_path / "bad.json"
        path.write_text("not json")
        with pytest.raises(FixtureError, match="Invalid JSON in fixture file"):
            read_json(path)


class TestLoaders:
    """Test cases for the individual fixture loaders."""

    def test_load_tower(self):
        """Test that the gap tower loads and fails surjectivity."""
        tower = load_tower(DATA / "gap_tower.json")
        assert tower.name == "gap"
        assert check_sequential_surjectivity(tower).witness["missing"] == 1

    def test_load_tower_needs_object(self):
        """Test that a JSON list is not a tower."""
        with pytest.raises(FixtureError, match="must be an object"):
            load_tower("[1, 2]")

    def test_load_set_map(self):
        """Test the ring map dual to a surjection of finite sets."""
        ring_map = load_set_map(DATA / "surjective_map.json")
        assert ring_map.set_map() == {"u": "a", "v": "b", "w": "b"}
        assert p_complete_ff_check(ring_map).faithfully_flat

    def test_load_set_map_missing_point(self):
        """Test that a set map missing a point is not faithfully flat."""
        ring_map = load_set_map(DATA / "missing_point_map.json")
        assert not p_complete_ff_check(ring_map).faithfully_flat

    @pytest.mark.parametrize(
        "data,message",
        [
            ({"source": ["a"], "target": ["u", "v"], "map": [["u", "a"]]}, "not total"),
            (
                {"source": ["a"], "target": ["u"], "map": [["u", "z"]]},
                "outside its codomain",
            ),
            ({"source": ["a"], "target": ["u"]}, "Invalid set map JSON"),
        ],
    )
    def test_load_set_map_errors(self, data, message):
        """Test that malformed set maps are refused."""
        with pytest.raises(FixtureError, match=message):
            load_set_map(json.dumps(data))

    def test_load_presentation_by_tower_name(self):
        """Test a presentation referring to a shipped tower."""
        presentation = load_presentation(
            {"name": "r", "tower": "ntilde_depth3", "pairs": [[], [[1, "∞"]]]}
        )
        assert presentation.name == "r"
        assert presentation.tower.name == "ntilde"

    def test_load_presentation_invalid(self):
        """Test the error for a presentation without pairs."""
        with pytest.raises(FixtureError, match="Invalid presentation JSON"):
            load_presentation({"tower": "ntilde_depth3"})

    def test_load_algebra_round_trip(self):
        """Test that algebra JSON loads back to the same structure."""
        algebra = load_algebra(f4().to_json())
        assert algebra.structure == f4().structure


class TestCorpus:
    """Test cases for the shipped verification corpus."""

    def test_towers(self):
        """Test the tower names of the corpus at depth 2."""
        corpus = load_corpus(2)
        names = [tower.name for tower in corpus.towers]
        assert names == ["cantor", "ntilde", "ntilde×2", "ntilde/one-at-infinity"]
        assert corpus.tower("cantor").depth == 2

    def test_presentations(self):
        """Test that both shipped presentations load, truncated to the depth."""
        corpus = load_corpus(2)
        assert [p.name for p in corpus.presentations] == ["dyadic", "one-at-infinity"]
        assert corpus.presentation("dyadic").tower.depth == 2

    def test_shipped_cantor_matches_construction(self):
        """Test that the shipped Cantor tower and dyadic pairs match their builders."""
        tower = load_tower(DATA_DIR / "towers" / "cantor_depth3.json")
        assert tower == canonical_cantor(3)
        shipped = load_presentation(
            DATA_DIR / "presentations" / "dyadic_interval.json"
        )
        assert shipped.relation == dyadic_interval_presentation(3).relation

    def test_unknown_names(self):
        """Test lookups of names outside the corpus."""
        corpus = load_corpus(1)
        with pytest.raises(FixtureError, match="No corpus tower"):
            corpus.tower("hawaiian")
        with pytest.raises(FixtureError, match="No corpus presentation"):
            corpus.presentation("hawaiian")

    def test_algebras_match_prime(self):
        """Test that algebras of other characteristics are filtered out."""
        assert all(a.p == 3 for a in load_corpus(1, p=3).algebras)
        assert len(load_corpus(1, p=3).algebras) == 6
        assert all(a.p == 2 for a in load_corpus(1).algebras)

    @pytest.mark.parametrize("p,count", [(2, 7), (3, 6), (5, 6)])
    def test_standard_algebras(self, p, count):
        """Test the number of built-in algebras, with F_4 only for p = 2."""
        assert len(standard_algebras(p)) == count

    def test_site(self):
        """Test the shipped site objects."""
        site = load_corpus(2).site
        assert [obj.name for obj in site.objects] == ["point", "ntilde@1", "ntilde@2"]

    def test_missing_directory(self, tmp_path):
        """Test the error when the corpus directory is absent."""
        with pytest.raises(FixtureError, match="Missing fixture directory"):
            load_corpus(1, directory=tmp_path)
