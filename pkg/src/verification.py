"""
The verification battery: a registry of named checks, the runner that
executes them over the fixture corpus, and the report they produce.

Every check yields (instance key, outcome) pairs. Failures are report
content; exceptions raised inside a check are internal faults and abort the
run.
"""

import difflib
import hashlib
import itertools
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import pandas as pd

from boolean_stone import (
    StoneError,
    algebra_characters,
    char_p_diagnostics,
    coinvariants_adjunction_check,
    coperfection_adjunction_check,
    double_dual_check,
    invariants_adjunction_check,
    is_p_boolean,
    p_boolean_iso_check,
    perfection_adjunction_check,
    spec_chars,
    stone_dual_of_set,
)
from condensed import (
    BrokenRestrictionPresheaf,
    FiniteSite,
    QuotientCondensedSet,
    RepresentablePresheaf,
    betti_delta_check,
    betti_naturality_check,
    coequalizer_check,
    condensify,
    condensify_composites,
    continuity_check,
    functoriality_check,
    pushforward_functoriality_check,
    qc_check,
    qs_check_presented,
    site_sheaf_check,
)
from config import ConfigError, RunConfig
from delta_duality import (
    FunctionRingMap,
    LevelCover,
    all_set_maps,
    contravariance_check,
    cover_translation_check,
    delta_coinvariants_adjunction_check,
    delta_coperfection_adjunction_check,
    delta_invariants_adjunction_check,
    delta_perfection_adjunction_check,
    duality_roundtrip_check,
    enumerate_covers,
    flatness_correspondence_check,
    gelfand_check,
    invariants_reduction_check,
    p_complete_ff_check,
    phi_functor,
    site_translate,
    stone_characterization_check,
    stone_model_check,
    witt_of_cont_iso,
)
from exact_algebra import (
    CheckOutcome,
    FunctionRing,
    ResidueRing,
    check_ring_axioms,
)
from fixtures import Corpus, load_corpus
from fp_algebra import dual_numbers, f4, function_algebra, prime_field
from profinite import (
    EquivRelPresentation,
    PresentationError,
    Tower,
    canonical_cantor,
    canonical_ntilde,
    cantor_surjection,
    check_sequential_surjectivity,
    constant_tower,
    fiber_product_universal_check,
    level_map_to_constant,
    point_tower,
    promap_compose,
    promap_identity,
    promaps_equal,
    quotient_presentation,
    quotient_tower,
    random_tower,
    shift_map,
    tower_fiber_product,
    tower_limit_elements,
    tower_truncate,
    truncation_map,
    union_find_quotient,
)
from witt import (
    DeltaStructure,
    WittRing,
    check_delta_axioms,
    check_ghost_homomorphism,
    identity_delta,
    is_perfect_delta,
    mod_p_equivalence_check,
    residue_witt_isomorphism,
    strict_p_check,
    witt_delta,
    witt_lift_diagnostics,
    witt_polys,
)

logger = logging.getLogger(__name__)

TOOL_NAME = "delta-stone"
VERSION = "0.1.0"

EXHAUSTIVE_PAIRS = 6561
EXHAUSTIVE_TRIPLES = 4096
ROUNDTRIP_MAX_POINTS = 16
WITT_CONT_MAX_ELEMENTS = 4096
DELTA_ADJUNCTION_MAX_ELEMENTS = 16

Instance = Tuple[str, CheckOutcome]


class UnknownCheckError(ValueError):
    """A check id that is not in the registry."""


@dataclass(frozen=True)
class CheckContext:
    """What a check may read: the configuration and the corpus."""

    config: RunConfig
    corpus: Corpus
    check_id: str

    def rng(self, *salt: Any) -> random.Random:
        """MT19937 seeded with the run seed mixed with SHA-256 of the check id."""
        label = "/".join([self.check_id, *map(str, salt)])
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        return random.Random(self.config.seed ^ int.from_bytes(digest[:8], "big"))

    def mutated(self, name: str) -> bool:
        return name in self.config.mutations


@dataclass(frozen=True)
class CheckDefinition:
    check_id: str
    suite: str
    anchor: str
    strategy: str
    run: Callable[[CheckContext], Iterator[Instance]]


CHECKS: Dict[str, CheckDefinition] = {}


def register(check_id: str, anchor: str, strategy: str):
    """Add a check to the registry under ``check_id`` (suite = id prefix)."""

    def decorate(fn: Callable[[CheckContext], Iterator[Instance]]):
        CHECKS[check_id] = CheckDefinition(
            check_id, check_id.split(".")[0], anchor, strategy, fn
        )
        return fn

    return decorate


def explain(check_id: str) -> str:
    """The statement a check verifies and how its instances are generated."""
    definition = CHECKS.get(check_id)
    if definition is None:
        close = difflib.get_close_matches(check_id, sorted(CHECKS), n=3)
        hint = f"Did you mean: {', '.join(close)}?\n" if close else ""
        raise UnknownCheckError(
            f"Unknown check id: {check_id!r}.\n"
            f"{hint}"
            f"Known checks: {', '.join(sorted(CHECKS))}"
        )
    return (
        f"{definition.check_id} (suite: {definition.suite})\n"
        f"Anchor: {definition.anchor}\n"
        f"Instances: {definition.strategy}\n"
    )


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _key(**parts: Any) -> str:
    return ",".join(f"{name}={value}" for name, value in parts.items())


def _all(outcomes: Iterable[CheckOutcome], **evidence: Any) -> CheckOutcome:
    """First failure, or success with the number of outcomes checked."""
    checked = 0
    for outcome in outcomes:
        if not outcome:
            return outcome
        checked += 1
    return CheckOutcome.ok(checked=checked, **evidence)


def _pairs(ctx: CheckContext, elements: List[Any], salt: str) -> Iterable[Tuple]:
    if len(elements) ** 2 <= EXHAUSTIVE_PAIRS:
        return itertools.product(elements, repeat=2)
    rng = ctx.rng(salt, "pairs")
    return [
        (rng.choice(elements), rng.choice(elements))
        for _ in range(ctx.config.samples)
    ]


def _triples(ctx: CheckContext, elements: List[Any], salt: str) -> Iterable[Tuple]:
    if len(elements) ** 3 <= EXHAUSTIVE_TRIPLES:
        return itertools.product(elements, repeat=3)
    rng = ctx.rng(salt, "triples")
    return [
        tuple(rng.choice(elements) for _ in range(3))
        for _ in range(ctx.config.samples)
    ]


def _small_levels(ctx: CheckContext) -> List[Tuple[Tower, int]]:
    """One corpus level per size up to max_level_size, first occurrence wins."""
    chosen: Dict[int, Tuple[Tower, int]] = {}
    for tower in ctx.corpus.towers:
        for n, level in enumerate(tower.levels):
            size = len(level)
            if 1 <= size <= ctx.config.max_level_size and size not in chosen:
                chosen[size] = (tower, n)
    return [chosen[size] for size in sorted(chosen)]


def _describe_level(tower: Tower, n: int) -> str:
    return f"{tower.name}@{n}"


def _transition_map(tower: Tower, n: int) -> Dict[Any, Any]:
    return {x: tower.transition(n, x) for x in tower.levels[n + 1]}


# ---------------------------------------------------------------------------
# Witt vectors
# ---------------------------------------------------------------------------


def _witt_bases(p_values=(2, 3)):
    return [ResidueRing(p, 1) for p in p_values] + [f4()]


@register(
    "witt.ring-axioms",
    "W_n(A), with addition and multiplication given by the universal Witt "
    "polynomials, is a commutative ring.",
    "W_n(F_2) for n <= 3, W_n(F_3) for n <= 2 and W_2(F_4); all pairs, and all "
    "triples when there are at most 4096 of them, otherwise seeded triples.",
)
def _witt_ring_axioms(ctx: CheckContext) -> Iterator[Instance]:
    for base in _witt_bases():
        longest = 3 if base.size() == 2 else 2
        for n in range(1, min(longest, ctx.config.witt_max_len) + 1):
            ring = WittRing(base, n)
            elements = ring.sorted_elements()
            name = ring.describe()
            yield _key(ring=name), check_ring_axioms(
                ring, _pairs(ctx, elements, name), _triples(ctx, elements, name)
            )


@register(
    "witt.ghost-hom",
    "The ghost map W_n(A) -> A^n, x -> (w_0, ..., w_{n-1}), is a ring "
    "homomorphism for every ring A.",
    "W_n over F_2, Z/4, F_3, Z/9 and F_4 for n <= 3 with at most 729 elements; "
    "all pairs up to 6561, seeded pairs beyond.",
)
def _witt_ghost_hom(ctx: CheckContext) -> Iterator[Instance]:
    bases = [ResidueRing(2, 1), ResidueRing(2, 2), ResidueRing(3, 1)]
    bases += [ResidueRing(3, 2), f4()]
    for base in bases:
        for n in range(1, min(3, ctx.config.witt_max_len) + 1):
            ring = WittRing(base, n)
            if ring.size() > 729:
                continue
            name = ring.describe()
            elements = ring.sorted_elements()
            yield _key(ring=name), check_ghost_homomorphism(
                ring, _pairs(ctx, elements, name)
            )


@register(
    "witt.polys-ghost",
    "The sum and product polynomials S_i, P_i are the unique integral "
    "polynomials whose ghost components add and multiply.",
    "Exact identities in Z[X, Y] for (p, n) in (2, 4), (3, 4), (5, 3), with n "
    "capped at witt_max_len.",
)
def _witt_polys_ghost(ctx: CheckContext) -> Iterator[Instance]:
    for p, n in ((2, 4), (3, 4), (5, 3)):
        length = min(n, ctx.config.witt_max_len)
        yield _key(p=p, n=length), witt_polys(p, length).check_ghost_identities()


@register(
    "witt.mod-p-iso",
    "W_n(F_p) is Z/p^n; over a perfect F_p-algebra, W_n(A)/p = A, the p-torsion "
    "is p^(n-1) W_n(A), and δ-maps W_n(A) -> W_n(B) are the algebra maps A -> B.",
    "The integer-coordinate map Z/p^n -> W_n(F_p) for p in {2, 3} and "
    "n <= witt_max_len; strictness and the mod p equivalence over F_2, F_4 and "
    "F_2^2; lift diagnostics over every corpus algebra with W_2 of at most 4096 "
    "elements.",
)
def _witt_mod_p_iso(ctx: CheckContext) -> Iterator[Instance]:
    for p in (2, 3):
        for n in range(1, ctx.config.witt_max_len + 1):
            yield _key(p=p, n=n, test="integers"), residue_witt_isomorphism(
                p, n, ctx.rng(p, n), ctx.config.samples
            )
    for base in (prime_field(2), f4()):
        yield _key(base=base.describe(), test="strict"), strict_p_check(base, 2)
    pairs = [
        (prime_field(2), f4()),
        (f4(), f4()),
        (function_algebra([0, 1], 2), prime_field(2)),
    ]
    for source, target in pairs:
        key = _key(
            source=source.describe(), target=target.describe(), test="mod-p"
        )
        yield key, mod_p_equivalence_check(source, target, 2)
    for algebra in ctx.corpus.algebras:
        if algebra.size() ** 2 > 4096:
            continue
        diagnostics = witt_lift_diagnostics(algebra, 2)
        outcome = (
            CheckOutcome.ok(
                reduced=diagnostics.reduced, semiperfect=diagnostics.semiperfect
            )
            if diagnostics.consistent
            else CheckOutcome.fail(
                algebra=algebra.describe(),
                lift_injective=diagnostics.lift_injective,
                reduced=diagnostics.reduced,
                lift_surjective=diagnostics.lift_surjective,
                semiperfect=diagnostics.semiperfect,
            )
        )
        yield _key(base=algebra.describe(), test="lift"), outcome


# ---------------------------------------------------------------------------
# δ-rings
# ---------------------------------------------------------------------------


def _delta_corpus(ctx: CheckContext) -> List[DeltaStructure]:
    structures = [
        identity_delta(ResidueRing(p, m)) for p in (2, 3) for m in range(2, 5)
    ]
    structures += [
        witt_delta(WittRing(ResidueRing(p, 1), n)) for p in (2, 3) for n in (2, 3)
    ]
    structures.append(witt_delta(WittRing(f4(), 3)))
    for tower, n in _small_levels(ctx):
        for m in range(2, ctx.config.precision + 1):
            carrier = FunctionRing(tower.levels[n], ctx.config.p, m)
            structures.append(identity_delta(carrier))
    return structures


def _delta_key(structure: DeltaStructure, **extra: Any) -> str:
    return _key(carrier=structure.carrier.describe(), lift=structure.name, **extra)


@register(
    "delta.axioms",
    "δ(x) = (φ(x) - x^p)/p satisfies δ(xy) = x^p δ(y) + y^p δ(x) + p δ(x)δ(y), "
    "δ(x + y) = δ(x) + δ(y) - Σ binom(p, i)/p x^i y^(p-i), and δ(1) = 0.",
    "φ = id on Z/p^m (p in {2, 3}, 2 <= m <= 4), the Witt Frobenius on "
    "W_n(F_p) (n <= 3) and W_3(F_4), and φ = id on function rings of the corpus "
    "levels; all pairs up to 6561, seeded pairs beyond. With the delta-shift "
    "mutation the corrupted δ + 1 is checked as well and must fail.",
)
def _delta_axioms(ctx: CheckContext) -> Iterator[Instance]:
    for structure in _delta_corpus(ctx):
        elements = structure.carrier.sorted_elements()
        pairs = list(_pairs(ctx, elements, _delta_key(structure)))
        yield _delta_key(structure), check_delta_axioms(structure, iter(pairs))
        if ctx.mutated("delta-shift"):
            yield _delta_key(structure, mutation="delta-shift"), check_delta_axioms(
                structure.shifted(), iter(pairs)
            )


@register(
    "delta.mutation",
    "The axiom checker is sound: a corrupted δ is rejected with a witness.",
    "δ + 1 on Z/4, Z/9 and W_3(F_4); the check passes when the corruption is "
    "caught.",
)
def _delta_mutation(ctx: CheckContext) -> Iterator[Instance]:
    structures = [
        identity_delta(ResidueRing(2, 2)),
        identity_delta(ResidueRing(3, 2)),
        witt_delta(WittRing(f4(), 3)),
    ]
    for structure in structures:
        elements = structure.carrier.sorted_elements()
        outcome = check_delta_axioms(
            structure.shifted(), _pairs(ctx, elements, _delta_key(structure))
        )
        if outcome:
            yield _delta_key(structure), CheckOutcome.fail(
                property="corrupted δ accepted", lift=structure.name
            )
        else:
            yield _delta_key(structure), CheckOutcome.ok(caught=outcome.witness)


# ---------------------------------------------------------------------------
# Finite Stone duality
# ---------------------------------------------------------------------------


@register(
    "stone.roundtrip",
    "The characters of F_p^S are the evaluations at the points of S.",
    "Finite sets of size 0 to 5; the empty set must be rejected.",
)
def _stone_roundtrip(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    for size in range(6):
        points = tuple(range(size))
        if size == 0:
            try:
                stone_dual_of_set(points, p)
            except StoneError:
                yield _key(size=0), CheckOutcome.ok(rejected=True)
            else:
                yield _key(size=0), CheckOutcome.fail(property="empty set accepted")
            continue
        dual = spec_chars(stone_dual_of_set(points, p).algebra)
        expected = {tuple(int(i == j) for i in range(size)) for j in range(size)}
        if len(dual.points) == size and set(dual.points) == expected:
            yield _key(size=size), CheckOutcome.ok(points=size)
        else:
            yield _key(size=size), CheckOutcome.fail(
                expected=size, characters=list(dual.points)
            )


@register(
    "stone.double-dual",
    "Spec(F_p^f) recovers every map f: T -> S of finite sets.",
    "All maps between sets of size <= max_level_size.",
)
def _stone_double_dual(ctx: CheckContext) -> Iterator[Instance]:
    bound = ctx.config.max_level_size
    for a, b in itertools.product(range(1, bound + 1), repeat=2):
        source, target = tuple(range(a)), tuple(range(b))
        yield _key(source=a, target=b), _all(
            double_dual_check(f, source, target, ctx.config.p)
            for f in all_set_maps(target, source)
        )


@register(
    "stone.p-bool-iso",
    "A finite F_p-algebra is p-Boolean exactly when evaluation identifies it "
    "with the functions on its characters.",
    "Every corpus algebra and F_p^k for k <= 5; non-p-Boolean algebras must "
    "have fewer characters than their dimension.",
)
def _stone_p_bool_iso(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    algebras = {a.describe(): a for a in ctx.corpus.algebras}
    for k in range(1, 6):
        algebra = function_algebra(range(k), p)
        algebras.setdefault(algebra.describe(), algebra)
    for name in sorted(algebras):
        algebra = algebras[name]
        if is_p_boolean(algebra):
            yield _key(algebra=name), p_boolean_iso_check(algebra)
            continue
        characters = len(algebra_characters(algebra).points)
        if characters < algebra.dim:
            yield _key(algebra=name), CheckOutcome.ok(
                p_boolean=False, characters=characters
            )
        else:
            yield _key(algebra=name), CheckOutcome.fail(
                property="not p-Boolean but has a full character set",
                characters=characters,
            )


# ---------------------------------------------------------------------------
# δ-Stone duality
# ---------------------------------------------------------------------------


@register(
    "duality.roundtrip",
    "Light profinite sets are anti-equivalent to Stone δ-rings through "
    "S -> Cont(S, Z_p) and A -> the characters of A/p.",
    "Every level of every corpus tower with at most 16 points, at each "
    "precision m <= precision; the δ-ring is validated exhaustively when small.",
)
def _duality_roundtrip(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    for tower in ctx.corpus.towers:
        for n, level in enumerate(tower.levels):
            if len(level) > ROUNDTRIP_MAX_POINTS:
                continue
            for m in range(1, ctx.config.precision + 1):
                outcome = duality_roundtrip_check(tower, n, m, p)
                if outcome:
                    outcome = phi_functor(tower, n, m, p).validate()
                yield _key(tower=tower.name, level=n, m=m), outcome


@register(
    "duality.contravariance",
    "Set maps T -> S and ring maps Cont(S) -> Cont(T) correspond "
    "contravariantly through the duality.",
    "All maps between sets of size <= max_level_size at m = min(precision, 2), "
    "and every transition map of the corpus towers at m = 1.",
)
def _duality_contravariance(ctx: CheckContext) -> Iterator[Instance]:
    p, bound = ctx.config.p, ctx.config.max_level_size
    m = min(ctx.config.precision, 2)
    for a, b in itertools.product(range(1, bound + 1), repeat=2):
        source, target = tuple(range(a)), tuple(range(b))
        yield _key(source=a, target=b, m=m), _all(
            contravariance_check(f, source, target, p, m)
            for f in all_set_maps(target, source)
        )
    for tower in ctx.corpus.towers:
        for n in range(tower.depth):
            if len(tower.levels[n + 1]) > ROUNDTRIP_MAX_POINTS:
                continue
            f = _transition_map(tower, n)
            yield _key(tower=tower.name, transition=n + 1), contravariance_check(
                f, tower.levels[n], tower.levels[n + 1], p, 1
            )


@register(
    "duality.witt-cont",
    "W(Cont(S, F_p)) = Cont(S, Z_p): Witt vectors of locally constant F_p-valued "
    "functions are the locally constant Z_p-valued functions.",
    "Corpus levels of size <= max_level_size at every m <= precision with at "
    "most 4096 Witt vectors; all pairs up to 256, otherwise `samples` seeded "
    "pairs.",
)
def _duality_witt_cont(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    for tower, n in _small_levels(ctx):
        size = len(tower.levels[n])
        for m in range(1, ctx.config.precision + 1):
            if (p**size) ** m > WITT_CONT_MAX_ELEMENTS:
                continue
            yield _key(points=size, m=m), witt_of_cont_iso(
                tower, n, m, p, ctx.rng(size, m), ctx.config.samples
            )


def _characterization_corpus(ctx: CheckContext) -> List[DeltaStructure]:
    p = ctx.config.p
    structures = [identity_delta(ResidueRing(p, m)) for m in (1, 2)]
    for tower, n in _small_levels(ctx):
        if len(tower.levels[n]) <= 2:
            for m in range(1, min(ctx.config.precision, 2) + 1):
                structures.append(
                    identity_delta(FunctionRing(tower.levels[n], p, m))
                )
    structures.append(witt_delta(WittRing(prime_field(p), 2)))
    structures.append(witt_delta(WittRing(dual_numbers(p), 2)))
    if p == 2:
        structures.append(witt_delta(WittRing(f4(), 2)))
    return [s for s in structures if s.carrier.size() <= 256]


@register(
    "duality.stone-characterization",
    "A δ-ring is Stone (φ = id) exactly when A -> A_(φ=1) is p-completely "
    "faithfully flat, and exactly when evaluation at its δ-points is bijective; "
    "the functions on a quotient-presented level form a perfect δ-ring with "
    "p-Boolean reduction.",
    "Z/p and Z/p^2, function rings on corpus levels of size <= 2, W_2 of F_p, "
    "of the dual numbers and of F_4 (the non-Stone instance); every corpus "
    "presentation at levels <= 2 and m <= 2, with δ checked on all pairs up to "
    "6561 and seeded pairs beyond.",
)
def _duality_stone_characterization(ctx: CheckContext) -> Iterator[Instance]:
    for structure in _characterization_corpus(ctx):
        yield _delta_key(structure, test="coinvariants"), stone_characterization_check(
            structure
        )
        yield _delta_key(structure, test="model"), stone_model_check(structure)
    for presentation in ctx.corpus.presentations:
        for n in range(min(presentation.tower.depth, 2) + 1):
            for m in range(1, min(ctx.config.precision, 2) + 1):
                key = _key(presentation=presentation.name, level=n, m=m)
                yield key, gelfand_check(
                    presentation,
                    n,
                    m,
                    ctx.config.p,
                    rng=ctx.rng(key),
                    samples=ctx.config.samples,
                    exhaustive_limit=EXHAUSTIVE_PAIRS,
                )


# ---------------------------------------------------------------------------
# Flatness
# ---------------------------------------------------------------------------


@register(
    "flatness.ff-criteria",
    "A map F_p^S -> F_p^T is faithfully flat iff the dual map T -> S is "
    "surjective iff it is injective; the Witt lift is p-completely faithfully "
    "flat exactly when the reduction is.",
    "Every ring map with |S|, |T| <= max_level_size, enumerated both as algebra "
    "maps and as pullbacks of set maps.",
)
def _flatness_ff_criteria(ctx: CheckContext) -> Iterator[Instance]:
    bound = ctx.config.max_level_size
    for a, b in itertools.product(range(1, bound + 1), repeat=2):
        yield _key(source=a, target=b), flatness_correspondence_check(
            tuple(range(a)), tuple(range(b)), ctx.config.p, ctx.config.precision
        )


def _ff_matches(ring_map: FunctionRingMap, surjective: bool) -> CheckOutcome:
    witness = p_complete_ff_check(ring_map)
    if (
        witness.faithfully_flat != surjective
        or not witness.consistent
        or not witness.p_torsion_free_structurally
    ):
        return CheckOutcome.fail(surjective=surjective, **witness.to_json())
    return CheckOutcome.ok(**witness.to_json())


@register(
    "flatness.p-complete",
    "Cont(S_n) -> Cont(S_{n+1}) is p-completely faithfully flat exactly when "
    "the transition S_{n+1} -> S_n is surjective.",
    "Every transition of every corpus tower with at most 16 points on top, and "
    "the inclusion of a point into each small level, at m = precision.",
)
def _flatness_p_complete(ctx: CheckContext) -> Iterator[Instance]:
    p, m = ctx.config.p, ctx.config.precision
    for tower in ctx.corpus.towers:
        for n in range(tower.depth):
            if len(tower.levels[n + 1]) > ROUNDTRIP_MAX_POINTS:
                continue
            ring_map = FunctionRingMap.from_set_map(
                _transition_map(tower, n), tower.levels[n], tower.levels[n + 1], p, m
            )
            yield _key(tower=tower.name, transition=n + 1), _ff_matches(
                ring_map, tower.is_surjective_transition(n)
            )
    for tower, n in _small_levels(ctx):
        level = tower.levels[n]
        ring_map = FunctionRingMap.from_set_map({"*": level[0]}, level, ("*",), p, m)
        yield _key(level=_describe_level(tower, n), test="point"), _ff_matches(
            ring_map, len(level) == 1
        )


# ---------------------------------------------------------------------------
# Sites
# ---------------------------------------------------------------------------


def _bounded_site(ctx: CheckContext, max_points: int, max_members: int) -> FiniteSite:
    site = ctx.corpus.site
    objects = tuple(o for o in site.objects if len(o.points) <= max_points)
    return FiniteSite(objects, site.level, max_members)


def _cover_outcome(cover: LevelCover, p: int, m: int) -> CheckOutcome:
    outcome = cover_translation_check(cover, p, m)
    if not outcome:
        return outcome
    witness = p_complete_ff_check(site_translate(cover, p, m).product_map)
    if not witness.faithfully_flat:
        return CheckOutcome.fail(
            property="cover goes to a p-completely faithfully flat family",
            target=cover.target,
            **witness.to_json(),
        )
    return outcome


@register(
    "sites.cover-translation",
    "Covers of light profinite sets and p-completely faithfully flat families "
    "of Stone δ-rings correspond through the duality: a family is jointly "
    "surjective iff its product map is p-completely faithfully flat.",
    "Every cover with at most max_cover_members members of each site object "
    "with <= max_level_size points, and the non-jointly-surjective families of "
    "up to two members on at most two points; the cover axioms on sampled "
    "covers; continuity of the dual-points functor on objects of <= 2 points. "
    "The non-surjective-cover mutation adds a family that misses a point.",
)
def _sites_cover_translation(ctx: CheckContext) -> Iterator[Instance]:
    p, m = ctx.config.p, min(ctx.config.precision, 2)
    site = _bounded_site(
        ctx, ctx.config.max_level_size, ctx.config.max_cover_members
    )
    yield _key(test="axioms"), site.check_cover_axioms()
    for target in site.objects:
        covers = list(site.covers(target))
        if ctx.mutated("non-surjective-cover") and len(target.points) >= 2:
            first = target.points[0]
            covers.append(LevelCover.of(target.points, [((first,), {first: first})]))
        yield _key(object=target.name, family="covers"), _all(
            _cover_outcome(cover, p, m) for cover in covers
        )
        non_covers = [
            cover
            for cover in enumerate_covers(target.points, 2, 2)
            if not cover.is_jointly_surjective()
        ]
        yield _key(object=target.name, family="non-covers"), _all(
            cover_translation_check(cover, p, m) for cover in non_covers
        )
    small = _bounded_site(ctx, 2, min(ctx.config.max_cover_members, 2))
    yield _key(test="continuity"), continuity_check(small, p, 1)


# ---------------------------------------------------------------------------
# Adjunctions
# ---------------------------------------------------------------------------


def _small_algebras(ctx: CheckContext):
    return [a for a in ctx.corpus.algebras if a.dim <= 2]


@register(
    "adjunction.frobenius-invariants",
    "Frobenius invariants are right adjoint, and Frobenius coinvariants left "
    "adjoint, to the inclusion of p-Boolean algebras.",
    "Hom-set bijections by exhaustive enumeration of algebra maps, for corpus "
    "algebras of dimension <= 2 against F_p and F_p^2.",
)
def _adjunction_invariants(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    tests = [prime_field(p), function_algebra([0, 1], p)]
    for algebra in _small_algebras(ctx):
        for test in tests:
            key = dict(algebra=algebra.describe(), test=test.describe())
            yield _key(**key, side="invariants"), invariants_adjunction_check(
                test, algebra
            )
            yield _key(**key, side="coinvariants"), coinvariants_adjunction_check(
                algebra, test
            )


@register(
    "adjunction.perfection",
    "The colimit perfection is left adjoint, and the limit perfection right "
    "adjoint, to the inclusion of perfect F_p-algebras; reduced, injective "
    "Frobenius and semiperfect agree with their definitions.",
    "Hom-set bijections for corpus algebras of dimension <= 2 against F_p, "
    "F_p^2 and F_4; char p diagnostics on every corpus algebra.",
)
def _adjunction_perfection(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    tests = [prime_field(p), function_algebra([0, 1], p)]
    if p == 2:
        tests.append(f4())
    for algebra in _small_algebras(ctx):
        for test in tests:
            key = dict(algebra=algebra.describe(), test=test.describe())
            yield _key(**key, side="coperfection"), coperfection_adjunction_check(
                algebra, test
            )
            yield _key(**key, side="perfection"), perfection_adjunction_check(
                test, algebra
            )
    for algebra in ctx.corpus.algebras:
        diagnostics = char_p_diagnostics(algebra)
        outcome = (
            CheckOutcome.ok(**diagnostics.to_json())
            if diagnostics.consistent
            else CheckOutcome.fail(**diagnostics.to_json())
        )
        yield _key(algebra=algebra.describe(), side="diagnostics"), outcome


def _delta_adjunction_corpus(ctx: CheckContext) -> List[DeltaStructure]:
    p = ctx.config.p
    structures = [
        identity_delta(ResidueRing(p, 2)),
        witt_delta(WittRing(prime_field(p), 2)),
        witt_delta(WittRing(dual_numbers(p), 2)),
        identity_delta(FunctionRing(("*",), p, 2)),
        identity_delta(FunctionRing((0, 1), p, 2)),
    ]
    if p == 2:
        structures.append(witt_delta(WittRing(f4(), 2)))
    return [
        s for s in structures if s.carrier.size() <= DELTA_ADJUNCTION_MAX_ELEMENTS
    ]


@register(
    "adjunction.delta-invariants",
    "δ-invariants A^(φ=1) are right adjoint and δ-coinvariants A_(φ=1) left "
    "adjoint to the inclusion of Stone δ-rings; the δ-perfections are adjoint "
    "to the inclusion of perfect δ-rings; the invariants of W_n(A) reduce to "
    "the Frobenius invariants of A.",
    "Hom-set bijections by exhaustive enumeration of δ-maps between carriers "
    "with at most 16 elements.",
)
def _adjunction_delta(ctx: CheckContext) -> Iterator[Instance]:
    structures = _delta_adjunction_corpus(ctx)
    stone = [s for s in structures if isinstance(s.carrier, FunctionRing)]
    perfect = [s for s in structures if is_perfect_delta(s.lift, s.carrier)]
    for structure in structures:
        for other in stone:
            key = dict(
                carrier=structure.carrier.describe(), test=other.carrier.describe()
            )
            yield _key(**key, side="invariants"), delta_invariants_adjunction_check(
                other, structure
            )
            yield _key(
                **key, side="coinvariants"
            ), delta_coinvariants_adjunction_check(structure, other)
        for other in perfect:
            key = dict(
                carrier=structure.carrier.describe(), test=other.carrier.describe()
            )
            yield _key(
                **key, side="coperfection"
            ), delta_coperfection_adjunction_check(structure, other)
            yield _key(**key, side="perfection"), delta_perfection_adjunction_check(
                other, structure
            )
    bases = [prime_field(ctx.config.p)] + ([f4()] if ctx.config.p == 2 else [])
    for base in bases:
        ring = WittRing(base, 2)
        yield _key(ring=ring.describe(), side="reduction"), invariants_reduction_check(
            ring
        )


# ---------------------------------------------------------------------------
# Profinite sets
# ---------------------------------------------------------------------------


def _replete_outcome(tower: Tower) -> CheckOutcome:
    outcome = check_sequential_surjectivity(tower)
    if not outcome:
        return outcome
    for n, level in enumerate(tower.levels):
        if set(tower_limit_elements(tower, n)) != set(level):
            return CheckOutcome.fail(tower=tower.name, level=n, property="limit")
    return outcome


@register(
    "profinite.replete",
    "Sequential limits of surjections are replete: every point of every level "
    "lifts to a compatible family through all later levels.",
    "N ∪ {∞} and the Cantor tower at depth lift_depth, every corpus tower, and "
    "three seeded random surjective towers; Cantor covers of the corpus towers. "
    "The non-surjective-transition mutation adds a tower that misses a point.",
)
def _profinite_replete(ctx: CheckContext) -> Iterator[Instance]:
    depth = max(ctx.config.lift_depth, 1)
    towers = [("canonical", canonical_ntilde(depth))]
    towers.append(("canonical", canonical_cantor(depth)))
    towers += [("corpus", tower) for tower in ctx.corpus.towers]
    for i in range(3):
        tower = random_tower(ctx.rng("random", i), 3, ctx.config.max_level_size)
        towers.append(("random", Tower(tower.levels, tower.transitions, f"random{i}")))
    if ctx.mutated("non-surjective-transition"):
        towers.append(("mutation", Tower(((0, 1), (0,)), ((0,),), "non-surjective")))
    for source, tower in towers:
        key = _key(source=source, tower=tower.name, depth=tower.depth)
        yield key, _replete_outcome(tower)
    for tower in ctx.corpus.towers:
        if not tower.has_surjective_transitions():
            continue
        cover = cantor_surjection(tower)
        outcome = cover.commutes()
        if outcome and not cover.is_level_surjective():
            outcome = CheckOutcome.fail(tower=tower.name, property="level surjective")
        yield _key(tower=tower.name, test="cantor-cover"), outcome


def _fiber_product_cases(ctx: CheckContext):
    ntilde = canonical_ntilde(2)
    discrete = constant_tower([0, 1], 2, "two")
    collapse = level_map_to_constant(ntilde, ["*"], lambda x: "*")
    yield "ntilde x two over point", collapse, level_map_to_constant(
        discrete, ["*"], lambda x: "*"
    )
    yield "ntilde x ntilde over ntilde", promap_identity(ntilde), promap_identity(
        ntilde
    )
    split = level_map_to_constant(ntilde, [0, 1], lambda x: int(x == 1), level=1)
    yield "ntilde x two over two", split, level_map_to_constant(
        discrete, [0, 1], lambda x: x, level=1
    )
    random = random_tower(ctx.rng("fiber"), 2, ctx.config.max_level_size)
    yield "random x point over point", level_map_to_constant(
        random, ["*"], lambda x: "*"
    ), level_map_to_constant(point_tower(2), ["*"], lambda x: x)


@register(
    "profinite.fiber-universal",
    "Levelwise fiber products of towers are fiber products of pro-objects; "
    "pro-maps compose associatively with identities, and the shift of a tower "
    "equals its truncation.",
    "Fiber products over a point, over N ∪ {∞} and over a two-point set, and a "
    "seeded random case; cones from test sets of size 1 and 2 at each level.",
)
def _profinite_fiber_universal(ctx: CheckContext) -> Iterator[Instance]:
    for name, f, g in _fiber_product_cases(ctx):
        product = tower_fiber_product(f, g)
        outcome = fiber_product_universal_check(product)
        if outcome:
            outcome = _all([product.left.commutes(), product.right.commutes()])
        yield _key(case=name), outcome
    ntilde = canonical_ntilde(3)
    identity = promap_identity(ntilde)
    shift = shift_map(ntilde)
    laws = [
        promaps_equal(promap_compose(identity, shift), shift),
        promaps_equal(promap_compose(shift, promap_identity(shift.target)), shift),
        promaps_equal(shift, truncation_map(ntilde, ntilde.depth - 1)),
    ]
    truncated = tower_truncate(ntilde, 2)
    nested = shift_map(truncated)
    laws.append(
        promaps_equal(
            promap_compose(promap_compose(identity, shift), nested),
            promap_compose(identity, promap_compose(shift, nested)),
        )
    )
    outcome = (
        CheckOutcome.ok(laws=len(laws))
        if all(laws)
        else CheckOutcome.fail(failed=[i for i, law in enumerate(laws) if not law])
    )
    yield _key(case="pro-map laws"), outcome


# ---------------------------------------------------------------------------
# Condensed sets
# ---------------------------------------------------------------------------


def _presheaf_corpus(ctx: CheckContext):
    presheaves = [RepresentablePresheaf(range(k)) for k in (1, 2, 3)]
    for presentation in ctx.corpus.presentations:
        for n in range(min(presentation.tower.depth, 2) + 1):
            presheaves.append(condensify(QuotientCondensedSet(presentation, n)))
    if ctx.mutated("broken-restriction"):
        presheaves.append(BrokenRestrictionPresheaf(RepresentablePresheaf(range(2))))
    return presheaves


def _qs_consistency(presentation: EquivRelPresentation) -> CheckOutcome:
    identity = promap_identity(presentation.tower)
    outcome = qs_check_presented(presentation, identity, identity)
    try:
        quotient_tower(presentation)
        compatible = True
    except PresentationError:
        compatible = False
    if bool(outcome) != compatible:
        return CheckOutcome.fail(
            presentation=presentation.name,
            quotient_tower=compatible,
            fiber_products_closed=bool(outcome),
        )
    return CheckOutcome.ok(compatible=compatible, detail=outcome.witness)


@register(
    "condensed.sheaf",
    "Representables and condensifications of quotient-presented sets are "
    "sheaves for finite jointly surjective covers; representables are "
    "quasicompact, and fiber products over a quotient stay presented exactly "
    "when the relation respects transitions.",
    "Every cover of the standard site; Hom(-, K) for |K| <= 3 and the "
    "condensification of each corpus presentation at levels <= 2. The "
    "broken-restriction mutation adds a presheaf whose restrictions collapse.",
)
def _condensed_sheaf(ctx: CheckContext) -> Iterator[Instance]:
    site = ctx.corpus.site
    for presheaf in _presheaf_corpus(ctx):
        yield _key(presheaf=presheaf.name), site_sheaf_check(presheaf, site)
    two = RepresentablePresheaf(range(2))
    yield _key(presheaf=two.name, test="functoriality"), functoriality_check(
        two, site
    )
    yield _key(presheaf=two.name, test="qc"), qc_check(two, site)
    for presentation in ctx.corpus.presentations:
        yield _key(presentation=presentation.name, test="qs"), _qs_consistency(
            presentation
        )


@register(
    "condensed.betti",
    "For a light profinite K and a Stone δ-ring A, maps from the dual points of "
    "A to K are the δ-maps Cont(K, Z_p) -> A, naturally in A; pushforward "
    "along the duality is a functor.",
    "K and A range over corpus levels of size <= max_level_size at "
    "m <= min(precision, 2); naturality over all maps between sets of size "
    "<= 2.",
)
def _condensed_betti(ctx: CheckContext) -> Iterator[Instance]:
    p = ctx.config.p
    levels = _small_levels(ctx)
    for (k_tower, k), (a_tower, a) in itertools.product(levels, repeat=2):
        for m in range(1, min(ctx.config.precision, 2) + 1):
            ring = phi_functor(a_tower, a, m, p)
            key = _key(
                k=_describe_level(k_tower, k), a=_describe_level(a_tower, a), m=m
            )
            yield key, betti_delta_check(k_tower, k, ring)
    small = [(tower, n) for tower, n in levels if len(tower.levels[n]) <= 2]
    maps = [
        FunctionRingMap.from_set_map(f, source, target, p, 1)
        for (s_tower, s), (t_tower, t) in itertools.product(small, repeat=2)
        for source, target in [(s_tower.levels[s], t_tower.levels[t])]
        for f in all_set_maps(target, source)
    ]
    for k_tower, k in levels:
        yield _key(k=_describe_level(k_tower, k), test="naturality"), _all(
            betti_naturality_check(k_tower, k, f) for f in maps
        )
    presheaf = RepresentablePresheaf(range(2))
    composable = [(f, g) for f in maps for g in maps if f.target == g.source]
    yield _key(test="pushforward"), _all(
        pushforward_functoriality_check(presheaf, f, g) for f, g in composable
    )


def _partition_outcome(
    presentation: EquivRelPresentation, n: int
) -> CheckOutcome:
    level = presentation.tower.levels[n]
    pairs = sorted(presentation.relation[n], key=str)
    oracle = {frozenset(c) for c in union_find_quotient(level, pairs)}
    quotient = quotient_presentation(presentation, n)
    classes = {
        frozenset(s for s in level if quotient.projection[s] == c)
        for c in quotient.classes
    }
    if oracle != classes:
        return CheckOutcome.fail(level=n, union_find=len(oracle), quotient=len(classes))
    return CheckOutcome.ok(classes=len(classes))


@register(
    "condensed.coequalizer",
    "A quotient-presented light profinite set is the coequalizer of its "
    "relation pair, also after condensification.",
    "Every corpus presentation at levels <= min(depth, 3) with test sets of "
    "size 1 and 2; the quotient classes are cross-checked against union-find.",
)
def _condensed_coequalizer(ctx: CheckContext) -> Iterator[Instance]:
    for presentation in ctx.corpus.presentations:
        for n in range(min(presentation.tower.depth, 3) + 1):
            quotient = QuotientCondensedSet(presentation, n)
            yield _key(
                presentation=presentation.name, level=n, test="classes"
            ), _partition_outcome(presentation, n)
            for size in (1, 2):
                points = tuple(range(size))
                outcome = coequalizer_check(quotient, points)
                if outcome:
                    composites = condensify_composites(quotient, points)
                    values = set(condensify(quotient).values(points))
                    if composites != values:
                        outcome = CheckOutcome.fail(
                            property="every map lifts through the level",
                            composites=len(composites),
                            values=len(values),
                        )
                key = _key(presentation=presentation.name, level=n, test_set=size)
                yield key, outcome


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------


@register(
    "report.determinism",
    "A fixed configuration and seed determine every sampled instance, so the "
    "report is reproducible byte for byte.",
    "The sampled checks duality.witt-cont and profinite.replete run twice; "
    "their serialized outcomes must agree.",
)
def _report_determinism(ctx: CheckContext) -> Iterator[Instance]:
    for check_id in ("duality.witt-cont", "profinite.replete"):
        definition = CHECKS[check_id]
        runs = []
        for _ in range(2):
            records = _execute(definition, ctx.config, ctx.corpus)
            runs.append(json.dumps([r.to_json(False) for r in records], sort_keys=True))
        outcome = (
            CheckOutcome.ok(instances=len(json.loads(runs[0])))
            if runs[0] == runs[1]
            else CheckOutcome.fail(check=check_id)
        )
        yield _key(check=check_id), outcome


# ---------------------------------------------------------------------------
# Running and reporting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    instance_key: str
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    duration: float = 0.0

    def to_json(self, include_timings: bool) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "check_id": self.check_id,
            "instance_key": self.instance_key,
            "passed": self.passed,
        }
        if self.witness is not None:
            data["witness"] = self.witness
        if include_timings:
            data["duration"] = round(self.duration, 6)
        return data


def _execute(
    definition: CheckDefinition, config: RunConfig, corpus: Corpus
) -> List[CheckRecord]:
    ctx = CheckContext(config, corpus, definition.check_id)
    records = []
    seen = set()
    started = time.perf_counter()
    for instance_key, outcome in definition.run(ctx):
        finished = time.perf_counter()
        if instance_key in seen:
            raise RuntimeError(
                f"Check {definition.check_id} produced the instance key "
                f"{instance_key!r} twice"
            )
        seen.add(instance_key)
        records.append(
            CheckRecord(
                definition.check_id,
                instance_key,
                outcome.passed,
                outcome.witness,
                finished - started,
            )
        )
        if not outcome.passed:
            logger.info(
                "%s failed on %s: %s",
                definition.check_id,
                instance_key,
                outcome.witness,
            )
        started = time.perf_counter()
    return records


@dataclass(frozen=True)
class Report:
    """Per-instance results of a run, in canonical order."""

    config: Dict[str, Any]
    records: Tuple[CheckRecord, ...]
    include_timings: bool = False
    version: str = VERSION

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": TOOL_NAME,
            "version": self.version,
            "config": self.config,
            "passed": self.passed,
            "summary": {
                "checks": len({r.check_id for r in self.records}),
                "instances": len(self.records),
                "failures": len(self.failures()),
            },
            "records": [r.to_json(self.include_timings) for r in self.records],
        }

    def to_json(self) -> str:
        """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
        return (
            json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)
            + "\n"
        )

    def to_frame(self) -> pd.DataFrame:
        columns = ["check_id", "instance_key", "passed", "duration"]
        return pd.DataFrame(
            [
                (r.check_id, r.instance_key, r.passed, r.duration)
                for r in self.records
            ],
            columns=columns,
        )

    def summary(self) -> pd.DataFrame:
        """Instances and failures per check."""
        frame = self.to_frame()
        if frame.empty:
            return pd.DataFrame(columns=["check_id", "instances", "failures"])
        frame["failed"] = ~frame["passed"].astype(bool)
        summary = (
            frame.groupby("check_id", sort=True)
            .agg(instances=("passed", "size"), failures=("failed", "sum"))
            .reset_index()
        )
        summary["failures"] = summary["failures"].astype(int)
        return summary

    def to_text(self) -> str:
        lines = [
            f"{TOOL_NAME} {self.version}: "
            f"{'PASS' if self.passed else 'FAIL'} "
            f"({len(self.records)} instances, {len(self.failures())} failures)",
            "",
            self.summary().to_string(index=False),
        ]
        if self.failures():
            lines += ["", "Failures:"]
            for record in self.failures():
                witness = json.dumps(record.witness, sort_keys=True, ensure_ascii=False)
                lines.append(f"  {record.check_id} [{record.instance_key}] {witness}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_text()

    def write(self, path: Path, fmt: str = "json") -> None:
        try:
            Path(path).write_text(self.render(fmt), encoding="utf-8")
        except OSError as e:
            raise ConfigError(
                f"Cannot write the report to {path}.\n"
                f"Error: {e}\n"
                f"Check that the directory exists and is writable."
            ) from e
        logger.info("Report written to %s", path)


def selected_checks(config: RunConfig) -> List[CheckDefinition]:
    return [CHECKS[c] for c in sorted(CHECKS) if CHECKS[c].suite in config.suites]


def run_suite(config: RunConfig, corpus: Optional[Corpus] = None) -> Report:
    """
    Run every selected check and merge the records in (check id, instance
    key) order, whatever order the workers finish in.
    """
    corpus = corpus or load_corpus(config.depth, config.p)
    checks = selected_checks(config)
    logger.info(
        "Running %d checks from suites %s with %d worker(s)",
        len(checks),
        ", ".join(config.suites),
        config.workers,
    )
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(lambda d: _execute(d, config, corpus), checks))
    records = sorted(
        itertools.chain.from_iterable(results),
        key=lambda r: (r.check_id, r.instance_key),
    )
    report = Report(config.echo(), tuple(records), config.include_timings)
    logger.info(
        "Finished: %d instances, %d failures", len(records), len(report.failures())
    )
    if config.output is not None:
        report.write(config.output, config.format)
    return report
