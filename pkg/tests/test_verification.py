"""
Tests for verification module.
"""

import sys
import os

# Add src to path for imports - must be before other imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import json  # noqa: E402
from unittest.mock import patch  # noqa: E402

import pytest  # noqa: E402
from config import SUITES, ConfigError, RunConfig  # noqa: E402
from fixtures import load_corpus  # noqa: E402
from verification import (  # noqa: E402
    CHECKS,
    TOOL_NAME,
    VERSION,
    CheckContext,
    CheckRecord,
    Report,
    UnknownCheckError,
    explain,
    run_suite,
    selected_checks,
)


def small_config(**fields):
    defaults = {"depth": 2, "max_level_size": 2, "lift_depth": 3, "samples": 50}
    defaults.update(fields)
    return RunConfig(**defaults)


class TestRegistry:
    """Test cases for the check registry and explain."""

    def test_every_suite_has_checks(self):
        """Test that each suite contributes checks and ids carry their suite."""
        assert len(CHECKS) == 25
        suites = {definition.suite for definition in CHECKS.values()}
        assert suites == set(SUITES)
        for check_id, definition in CHECKS.items():
            assert check_id.startswith(definition.suite + ".")

    def test_selected_checks_sorted(self):
        """Test that selection filters by suite and sorts by id."""
        ids = [d.check_id for d in selected_checks(RunConfig(suites=["stone"]))]
        assert ids == ["stone.double-dual", "stone.p-bool-iso", "stone.roundtrip"]

    def test_explain(self):
        """Test the explanation of a known check."""
        text = explain("duality.roundtrip")
        assert text.startswith("duality.roundtrip (suite: duality)")
        assert "Anchor:" in text
        assert "Instances:" in text

    def test_explain_unknown_suggests(self):
        """Test that a misspelt id is answered with close matches."""
        with pytest.raises(UnknownCheckError, match="Did you mean: stone.roundtrip"):
            explain("stone.rondtrip")

    def test_rng_is_seeded_per_check(self):
        """Test that sampling streams depend on the check id and the seed."""
        config = RunConfig(seed=7)
        corpus = load_corpus(1)
        first = CheckContext(config, corpus, "witt.ring-axioms").rng("x")
        again = CheckContext(config, corpus, "witt.ring-axioms").rng("x")
        other = CheckContext(config, corpus, "delta.axioms").rng("x")
        draws = [first.random() for _ in range(3)]
        assert draws == [again.random() for _ in range(3)]
        assert draws != [other.random() for _ in range(3)]


class TestRunSuite:
    """Test cases for running suites over the corpus."""

    def setup_method(self):
        """Set up test fixtures."""
        self.corpus = load_corpus(2)

    def test_stone_suite_passes(self):
        """Test that the finite Stone duality checks all pass."""
        report = run_suite(small_config(suites=["stone"]), self.corpus)
        assert report.passed
        ids = {r.check_id for r in report.records}
        assert ids == {"stone.double-dual", "stone.p-bool-iso", "stone.roundtrip"}
        keys = [(r.check_id, r.instance_key) for r in report.records]
        assert keys == sorted(keys)

    def test_profinite_suite_passes(self):
        """Test that repleteness and fiber products hold on the corpus."""
        report = run_suite(small_config(suites=["profinite"]), self.corpus)
        assert report.passed
        assert report.to_dict()["summary"]["checks"] == 2

    def test_mutation_is_reported(self):
        """Test that a non-surjective transition shows up as a failure."""
        config = small_config(
            suites=["profinite"], mutations=["non-surjective-transition"]
        )
        report = run_suite(config, self.corpus)
        assert not report.passed
        [failure] = report.failures()
        assert failure.check_id == "profinite.replete"
        assert failure.instance_key == "source=mutation,tower=non-surjective,depth=1"
        assert failure.witness == {"tower": "non-surjective", "level": 0, "missing": 1}

    @pytest.mark.parametrize(
        "suite,mutation,check_id,key_part",
        [
            ("delta", "delta-shift", "delta.axioms", "mutation=delta-shift"),
            (
                "sites",
                "non-surjective-cover",
                "sites.cover-translation",
                "family=covers",
            ),
            (
                "condensed",
                "broken-restriction",
                "condensed.sheaf",
                "presheaf=Hom(-,2)+broken-restriction",
            ),
        ],
    )
    def test_mutations_fail_their_checks(self, suite, mutation, check_id, key_part):
        """Test that each corrupted fixture fails only where it was injected."""
        report = run_suite(
            small_config(suites=[suite], mutations=[mutation]), self.corpus
        )
        assert not report.passed
        failures = report.failures()
        assert failures
        assert {failure.check_id for failure in failures} == {check_id}
        assert all(key_part in failure.instance_key for failure in failures)

    def test_delta_shift_fails_every_structure(self):
        """Test that δ + 1 is rejected on every structure it corrupts."""
        report = run_suite(
            small_config(suites=["delta"], mutations=["delta-shift"]), self.corpus
        )
        shifted = [
            r for r in report.records if r.instance_key.endswith("mutation=delta-shift")
        ]
        assert shifted
        assert not any(r.passed for r in shifted)
        assert len(report.failures()) == len(shifted)

    def test_report_is_deterministic(self):
        """Test that repeated runs with more workers give identical JSON."""
        first = run_suite(small_config(suites=["stone", "profinite"]), self.corpus)
        second = run_suite(
            small_config(suites=["stone", "profinite"], workers=3), self.corpus
        )
        assert json.loads(first.to_json())["config"]["workers"] == 1
        assert [r.to_json(False) for r in first.records] == [
            r.to_json(False) for r in second.records
        ]

    def test_corpus_loaded_from_config(self):
        """Test that the corpus is loaded at the configured depth and prime."""
        with patch("verification.load_corpus", return_value=self.corpus) as loader:
            run_suite(small_config(suites=["stone"]))
        loader.assert_called_once_with(2, 2)

    def test_output_written(self, tmp_path):
        """Test that run_suite writes the report when an output path is set."""
        path = tmp_path / "report.json"
        run_suite(small_config(suites=["stone"], output=path), self.corpus)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["tool"] == TOOL_NAME
        assert data["passed"] is True
        assert "output" not in data["config"]


class TestReport:
    """Test cases for report rendering."""

    def setup_method(self):
        """Set up test fixtures."""
        self.report = Report(
            {"p": 2},
            (
                CheckRecord("a.x", "k1", True, None, 0.5),
                CheckRecord("a.x", "k2", False, {"w": 1}, 0.25),
                CheckRecord("b.y", "k", True, {"points": 3}),
            ),
        )

    def test_to_dict(self):
        """Test the top-level report layout."""
        data = self.report.to_dict()
        assert data["tool"] == TOOL_NAME
        assert data["version"] == VERSION
        assert data["passed"] is False
        assert data["summary"] == {"checks": 2, "instances": 3, "failures": 1}
        assert data["records"][0] == {
            "check_id": "a.x",
            "instance_key": "k1",
            "passed": True,
        }

    def test_timings_only_on_request(self):
        """Test that durations appear only when timings are included."""
        assert "duration" not in self.report.to_dict()["records"][1]
        timed = Report(self.report.config, self.report.records, include_timings=True)
        assert timed.to_dict()["records"][1]["duration"] == 0.25

    def test_to_json_is_canonical(self):
        """Test sorted keys and the trailing newline."""
        text = self.report.to_json()
        assert text.endswith("\n")
        canonical = json.dumps(
            json.loads(text), sort_keys=True, indent=2, ensure_ascii=False
        )
        assert text == canonical + "\n"

    def test_summary_frame(self):
        """Test instances and failures per check."""
        summary = self.report.summary()
        assert list(summary["check_id"]) == ["a.x", "b.y"]
        assert list(summary["instances"]) == [2, 1]
        assert list(summary["failures"]) == [1, 0]
        assert len(self.report.to_frame()) == 3

    def test_empty_summary(self):
        """Test the summary of a report with no records."""
        assert Report({}, ()).summary().empty
        assert Report({}, ()).passed

    def test_to_text(self):
        """Test the text rendering lists failures with their witnesses."""
        text = self.report.render("text")
        assert text.startswith(f"{TOOL_NAME} {VERSION}: FAIL")
        assert 'a.x [k2] {"w": 1}' in text

    def test_write_error(self, tmp_path):
        """Test that unwritable paths raise ConfigError."""
        with pytest.raises(ConfigError, match="Cannot write the report"):
            self.report.write(tmp_path / "missing" / "report.json")
