"""
JSON loaders for towers, presentations, sites, algebras and set maps, and
the shipped fixture corpus the verification battery runs over.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from condensed import FiniteSite, SiteError
from delta_duality import FunctionRingMap
from exact_algebra import AlgebraError
from fp_algebra import (
    FiniteFpAlgebra,
    dual_numbers,
    f4,
    function_algebra,
    idempotent_pair_algebra,
    prime_field,
    product_algebra,
)
from profinite import (
    EquivRelPresentation,
    PresentationError,
    Tower,
    canonical_cantor,
    canonical_ntilde,
    constant_tower,
    label_from_json,
    quotient_tower,
    tower_product,
    tower_truncate,
)

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "fixtures"

JsonSource = Union[str, Path, Dict[str, Any]]


class FixtureError(ValueError):
    """A fixture file is missing, unreadable or malformed."""


def read_json(source: JsonSource) -> Any:
    """
    Load JSON from a file path, an inline JSON string or an already-parsed dict.

    Args:
        source: Path to a .json file, a string holding JSON text, or a dict

    Returns:
        The parsed JSON value

    Raises:
        FixtureError: If the file does not exist or does not hold valid JSON
    """
    if isinstance(source, dict):
        return source
    text = str(source)
    if text.lstrip().startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise FixtureError(f"Inline JSON could not be parsed: {e}") from e
    path = Path(text)
    if not path.exists():
        raise FixtureError(
            f"Missing fixture file: {path}\n"
            f"Pass a path to an existing JSON file or inline JSON text."
        )
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FixtureError(
            f"Invalid JSON in fixture file {path}.\n"
            f"Parser error: {e}\n"
            f"Please ensure the file is valid JSON."
        ) from e


def load_tower(source: JsonSource) -> Tower:
    """Tower from {"depth", "levels", "transitions", "name"?}."""
    data = read_json(source)
    if not isinstance(data, dict):
        raise FixtureError(f"Tower JSON must be an object, got {type(data).__name__}")
    return Tower.from_json(data)


def _resolve_tower(reference: Any, directory: Path) -> Tower:
    if isinstance(reference, str):
        return load_tower(directory / "towers" / f"{reference}.json")
    return load_tower(reference)


def load_presentation(
    source: JsonSource, directory: Optional[Path] = None
) -> EquivRelPresentation:
    """
    Presentation from {"name", "tower", "pairs"}.

    ``tower`` is an inline tower or the name of a shipped tower fixture;
    ``pairs`` lists the identified pairs of each level.
    """
    data = read_json(source)
    directory = directory or DATA_DIR
    try:
        reference = data["tower"]
        pairs = [
            [(label_from_json(a), label_from_json(b)) for a, b in level]
            for level in data["pairs"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise FixtureError(
            f"Invalid presentation JSON: {e}.\n"
            f'Expected {{"name": ..., "tower": ..., "pairs": [[[a, b], ...], ...]}}.'
        ) from e
    tower = _resolve_tower(reference, directory)
    if len(pairs) > tower.depth + 1:
        raise PresentationError(
            f"Presentation lists pairs for {len(pairs)} levels but its tower "
            f"{tower.name!r} has only {tower.depth + 1}"
        )
    return EquivRelPresentation.from_generating_pairs(
        tower, pairs, data.get("name", "")
    )


def load_site(source: JsonSource) -> FiniteSite:
    data = read_json(source)
    if not isinstance(data, dict):
        raise SiteError("Site JSON must be an object")
    return FiniteSite.from_json(data)


def load_algebra(source: JsonSource) -> FiniteFpAlgebra:
    data = read_json(source)
    if not isinstance(data, dict):
        raise AlgebraError("Algebra JSON must be an object")
    return FiniteFpAlgebra.from_json(data)


def load_set_map(source: JsonSource) -> FunctionRingMap:
    """
    Ring map Cont(S) -> Cont(T) from a set map f: T -> S.

    The JSON form is {"source": S, "target": T, "map": [[t, f(t)], ...],
    "p": 2, "m": 2}.
    """
    data = read_json(source)
    try:
        source_points = [label_from_json(x) for x in data["source"]]
        target_points = [label_from_json(x) for x in data["target"]]
        f = {label_from_json(t): label_from_json(s) for t, s in data["map"]}
        p, m = int(data.get("p", 2)), int(data.get("m", 1))
    except (KeyError, TypeError, ValueError) as e:
        raise FixtureError(
            f"Invalid set map JSON: {e}.\n"
            f'Expected {{"source": [...], "target": [...], "map": [[t, s], ...], '
            f'"p": 2, "m": 1}}.'
        ) from e
    missing = [t for t in target_points if t not in f]
    if missing:
        raise FixtureError(f"Set map is not total: no image for {missing}")
    stray = sorted({repr(s) for s in f.values() if s not in source_points})
    if stray:
        raise FixtureError(f"Set map sends points outside its codomain: {stray}")
    return FunctionRingMap.from_set_map(f, source_points, target_points, p, m)


# ---------------------------------------------------------------------------
# The corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Corpus:
    """Every fixture the verification battery enumerates."""

    towers: Tuple[Tower, ...]
    presentations: Tuple[EquivRelPresentation, ...]
    site: FiniteSite
    algebras: Tuple[FiniteFpAlgebra, ...]

    def tower(self, name: str) -> Tower:
        for tower in self.towers:
            if tower.name == name:
                return tower
        raise FixtureError(f"No corpus tower named {name!r}")

    def presentation(self, name: str) -> EquivRelPresentation:
        for presentation in self.presentations:
            if presentation.name == name:
                return presentation
        raise FixtureError(f"No corpus presentation named {name!r}")


def _sorted_files(directory: Path) -> List[Path]:
    if not directory.is_dir():
        raise FixtureError(
            f"Missing fixture directory: {directory}\n"
            f"The verification corpus ships under data/fixtures."
        )
    return sorted(directory.glob("*.json"))


def standard_algebras(p: int) -> Tuple[FiniteFpAlgebra, ...]:
    """Small algebras of dimension <= 3 for p, built in code."""
    algebras = [
        prime_field(p),
        function_algebra([0, 1], p),
        function_algebra([0, 1, 2], p),
        idempotent_pair_algebra(p),
        dual_numbers(p),
        product_algebra(prime_field(p), dual_numbers(p)),
    ]
    if p == 2:
        algebras.append(f4())
    return tuple(algebras)


def load_corpus(depth: int, p: int = 2, directory: Optional[Path] = None) -> Corpus:
    """
    Shipped towers truncated to ``depth``, their product and the quotient
    towers of the transition-compatible presentations.
    """
    directory = directory or DATA_DIR
    towers = []
    for path in _sorted_files(directory / "towers"):
        tower = load_tower(path)
        if tower.depth < depth:
            logger.warning(
                "Fixture %s has depth %d < %d; using it as shipped",
                path.name,
                tower.depth,
                depth,
            )
        truncated = tower_truncate(tower, min(depth, tower.depth))
        towers.append(Tower(truncated.levels, truncated.transitions, tower.name))
    by_name = {t.name: t for t in towers}
    ntilde = by_name.get("ntilde") or canonical_ntilde(max(depth, 1))
    if "cantor" not in by_name:
        towers.append(canonical_cantor(max(depth, 1)))
    product = tower_product(ntilde, constant_tower([0, 1], ntilde.depth))
    towers.append(Tower(product.levels, product.transitions, "ntilde×2"))

    presentations = []
    for path in _sorted_files(directory / "presentations"):
        presentation = load_presentation(path, directory)
        tower = presentation.tower
        if tower.depth > depth:
            truncated = tower_truncate(tower, depth)
            presentation = EquivRelPresentation(
                Tower(truncated.levels, truncated.transitions, tower.name),
                presentation.relation[: depth + 1],
                presentation.name,
            )
        presentations.append(presentation)
        try:
            towers.append(quotient_tower(presentation))
        except PresentationError as e:
            logger.debug("No quotient tower for %s: %s", presentation.name, e)

    algebras = [load_algebra(path) for path in _sorted_files(directory / "algebras")]
    keys = {(a.p, a.structure, a.unit) for a in algebras}
    for algebra in standard_algebras(p):
        if (algebra.p, algebra.structure, algebra.unit) not in keys:
            algebras.append(algebra)
    algebras = [a for a in algebras if a.p == p]

    site = load_site(directory / "site.json")
    logger.info(
        "Loaded corpus: %d towers, %d presentations, %d algebras, %d site objects",
        len(towers),
        len(presentations),
        len(algebras),
        len(site.objects),
    )
    return Corpus(tuple(towers), tuple(presentations), site, tuple(algebras))
