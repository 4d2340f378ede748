"""
Stone δ-rings at finite precision and the duality with light profinite sets.

``phi_functor`` sends a tower level S_n to Cont(S_n, Z/p^m) with the identity
Frobenius lift, and ``psi_functor`` recovers the level as the characters of
the reduction mod p. The module also covers the Witt-of-Cont isomorphism,
δ-(co)invariants and δ-(co)perfection, and the flatness and site
comparisons. The p-completions that appear in the theory are modeled by
re-truncation at the working precision.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

from boolean_stone import (
    dual_map,
    frobenius_invariants,
    is_p_boolean,
    pullback_map,
    spec_chars,
)
from exact_algebra import (
    CheckOutcome,
    DivisibilityError,
    FiniteRing,
    FunctionRing,
    QuotientRing,
    ResidueRing,
    SubRing,
    ideal_closure,
)
from fp_algebra import (
    AlgebraMap,
    FiniteFpAlgebra,
    Vector,
    algebra_maps,
    function_algebra,
)
from profinite import EquivRelPresentation, Tower, quotient_presentation
from witt import (
    DeltaStructure,
    WittRing,
    check_delta_axioms,
    delta_maps,
    identity_delta,
    is_perfect_delta,
    witt_delta,
)

logger = logging.getLogger(__name__)

Element = Any
DeltaMap = Dict[Element, Element]
CoverGraph = Tuple[Tuple[Hashable, Hashable], ...]


class DualityError(ValueError):
    """Input outside the domain of a duality functor or comparison."""


# ---------------------------------------------------------------------------
# Stone δ-rings at truncation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StoneDeltaRingApprox:
    """Cont(S_n, Z/p^m) with φ = id for a level of a tower."""

    tower: Tower
    level: int
    p: int
    m: int

    def __post_init__(self):
        self.tower.level(self.level)
        if self.tower.is_empty():
            raise DualityError(
                f"Tower {self.tower.name!r} is empty; its function ring is the zero "
                f"ring, which is not a Stone δ-ring here."
            )

    @property
    def points(self) -> Tuple[Hashable, ...]:
        return self.tower.levels[self.level]

    @property
    def carrier(self) -> FunctionRing:
        return FunctionRing(self.points, self.p, self.m)

    @property
    def structure(self) -> DeltaStructure:
        return identity_delta(self.carrier)

    def reduction(self) -> FiniteFpAlgebra:
        """Cont(S_n, F_p) in the indicator basis."""
        return function_algebra(self.points, self.p)

    def validate(self, exhaustive_limit: int = 4096) -> CheckOutcome:
        """
        φ = id, the reduction is p-Boolean, and δ(f) = (f - f^p)/p is defined
        for every f (exhaustively below ``exhaustive_limit`` elements).
        """
        if not is_p_boolean(self.reduction()):
            return CheckOutcome.fail(property="reduction p-Boolean")
        carrier = self.carrier
        if self.m < 2 or carrier.size() > exhaustive_limit:
            return CheckOutcome.ok(delta_checked=0)
        structure = self.structure
        for f in carrier.elements():
            try:
                structure.delta(f)
            except DivisibilityError:
                return CheckOutcome.fail(property="δ defined", element=f)
        return CheckOutcome.ok(delta_checked=carrier.size())

    def describe(self) -> str:
        return f"{self.carrier.describe()} (level {self.level} of {self.tower.name})"


def phi_functor(tower: Tower, n: int, m: int, p: int = 2) -> StoneDeltaRingApprox:
    """S -> Cont(S, Z_p), read at level n and precision m."""
    return StoneDeltaRingApprox(tower, n, p, m)


def psi_functor(ring: StoneDeltaRingApprox) -> Dict[Hashable, Vector]:
    """
    The characters of A/p, labelled through the evaluation bijection.

    Keys are the level points; values are the characters found by splitting
    idempotents of the reduction.
    """
    dual = spec_chars(ring.reduction())
    labelled = {}
    for chi in dual.points:
        support = [i for i, c in enumerate(chi) if c]
        if len(support) != 1:
            raise DualityError(
                f"Character {chi} of {ring.describe()} is not evaluation at a point"
            )
        labelled[ring.points[support[0]]] = chi
    return labelled


def duality_roundtrip_check(tower: Tower, n: int, m: int, p: int = 2) -> CheckOutcome:
    """psi(phi(S_n)) is S_n, point for point."""
    ring = phi_functor(tower, n, m, p)
    points = psi_functor(ring)
    if set(points) != set(ring.points) or len(points) != len(ring.points):
        return CheckOutcome.fail(
            tower=tower.name, level=n, expected=len(ring.points), got=len(points)
        )
    for index, s in enumerate(ring.points):
        expected = tuple(int(i == index) for i in range(len(ring.points)))
        if points[s] != expected:
            return CheckOutcome.fail(tower=tower.name, level=n, point=s)
    return CheckOutcome.ok(points=len(points))


# ---------------------------------------------------------------------------
# Maps of function rings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionRingMap:
    """
    The ring map Cont(S, Z/p^m) -> Cont(T, Z/p^m), g -> g o f, of a set map
    f: T -> S. ``point_map[j]`` is the index in S of f(T[j]).
    """

    source: FunctionRing
    target: FunctionRing
    point_map: Tuple[int, ...]

    def __post_init__(self):
        if (self.source.p, self.source.m) != (self.target.p, self.target.m):
            raise DualityError(
                f"Precision mismatch: {self.source.describe()} -> "
                f"{self.target.describe()}.\n"
                f"Maps of Stone δ-rings are compared at one working precision."
            )
        if len(self.point_map) != len(self.target.domain) or any(
            not 0 <= i < len(self.source.domain) for i in self.point_map
        ):
            raise DualityError("Point map is not a total map T -> S")

    @classmethod
    def from_set_map(
        cls,
        f: Dict[Hashable, Hashable],
        source_points: Sequence[Hashable],
        target_points: Sequence[Hashable],
        p: int,
        m: int,
    ) -> "FunctionRingMap":
        source = FunctionRing(tuple(source_points), p, m)
        target = FunctionRing(tuple(target_points), p, m)
        return cls(
            source, target, tuple(source.domain.index(f[t]) for t in target.domain)
        )

    def __call__(self, g):
        return tuple(g[i] for i in self.point_map)

    def set_map(self) -> Dict[Hashable, Hashable]:
        return {
            t: self.source.domain[i] for t, i in zip(self.target.domain, self.point_map)
        }

    def reduction(self) -> AlgebraMap:
        """The induced map of F_p-algebras."""
        return pullback_map(
            self.set_map(), self.source.domain, self.target.domain, self.source.p
        )


def dualize_ring_map(f: FunctionRingMap) -> Dict[Hashable, Hashable]:
    """
    Recover the set map T -> S from a ring map by evaluating indicators:
    t goes to the unique s whose indicator does not vanish at t.
    """
    source, target = f.source, f.target
    recovered = {}
    for j, t in enumerate(target.domain):
        hits = [
            s
            for s in source.domain
            if f(source.indicator(s))[j] == target.codomain.one()
        ]
        if len(hits) != 1:
            raise DualityError(
                f"Ring map does not come from a set map: {len(hits)} indicators are "
                f"1 at {t!r}"
            )
        recovered[t] = hits[0]
    return recovered


def contravariance_check(
    f: Dict[Hashable, Hashable],
    source_points: Sequence[Hashable],
    target_points: Sequence[Hashable],
    p: int,
    m: int,
) -> CheckOutcome:
    """Dualizing f: T -> S to a ring map and back recovers f."""
    ring_map = FunctionRingMap.from_set_map(f, source_points, target_points, p, m)
    recovered = dualize_ring_map(ring_map)
    for t in target_points:
        if recovered[t] != f[t]:
            return CheckOutcome.fail(point=t, expected=f[t], got=recovered[t])
    chars = dual_map(ring_map.reduction())
    for j, t in enumerate(target_points):
        point = tuple(int(i == j) for i in range(len(target_points)))
        image = chars[point]
        if image[list(source_points).index(f[t])] != 1 or sum(image) != 1:
            return CheckOutcome.fail(point=t, property="mod p dual", got=image)
    return CheckOutcome.ok()


def all_set_maps(
    domain: Sequence[Hashable], codomain: Sequence[Hashable]
) -> Iterator[Dict[Hashable, Hashable]]:
    for images in itertools.product(codomain, repeat=len(domain)):
        yield dict(zip(domain, images))


# ---------------------------------------------------------------------------
# W(Cont(S, F_p)) = Cont(S, Z_p)
# ---------------------------------------------------------------------------


def witt_to_functions(
    ring: WittRing, target: FunctionRing
) -> Callable[[Any], Tuple[Any, ...]]:
    """
    (f_0, ..., f_{m-1}) -> (s -> sum_i [f_i(s)] p^i) with Teichmüller lifts
    computed in Z/p^m.
    """
    residues = target.codomain
    p = residues.p

    def convert(a):
        values = []
        for index in range(len(target.domain)):
            total = residues.zero()
            for i, digit in enumerate(a.components):
                lift = residues.teichmuller(digit[index])
                total = total + lift * residues.element(p**i)
            values.append(total)
        return tuple(values)

    return convert


def witt_of_cont_iso(
    tower: Tower,
    n: int,
    m: int,
    p: int = 2,
    rng: Optional[random.Random] = None,
    samples: int = 1000,
    exhaustive_limit: int = 256,
) -> CheckOutcome:
    """
    W_m(Cont(S_n, F_p)) -> Cont(S_n, Z/p^m) is a bijective ring homomorphism.

    Bijectivity is checked on all elements. Sums and products are compared
    on every pair when there are at most ``exhaustive_limit`` pairs, otherwise
    on ``samples`` pairs drawn from ``rng``.
    """
    points = tower.level(n)
    ring = WittRing(function_algebra(points, p), m)
    target = FunctionRing(points, p, m)
    convert = witt_to_functions(ring, target)
    elements = list(ring.elements())
    image = {a: convert(a) for a in elements}
    if len(set(image.values())) != target.size():
        return CheckOutcome.fail(
            tower=tower.name,
            level=n,
            property="bijective",
            images=len(set(image.values())),
        )
    if image[ring.one()] != target.one():
        return CheckOutcome.fail(tower=tower.name, level=n, property="unital")
    exhaustive = len(elements) ** 2 <= exhaustive_limit
    if exhaustive:
        pairs: Iterator = itertools.product(elements, repeat=2)
    else:
        rng = rng or random.Random(0)
        pairs = ((rng.choice(elements), rng.choice(elements)) for _ in range(samples))
    checked = 0
    for a, b in pairs:
        if image[ring.add(a, b)] != target.add(image[a], image[b]):
            return CheckOutcome.fail(
                tower=tower.name, level=n, property="additive", a=a, b=b
            )
        if image[ring.mul(a, b)] != target.mul(image[a], image[b]):
            return CheckOutcome.fail(
                tower=tower.name, level=n, property="multiplicative", a=a, b=b
            )
        checked += 1
    logger.debug(
        "Witt-of-Cont checked on %d pairs (exhaustive=%s)", checked, exhaustive
    )
    return CheckOutcome.ok(pairs=checked, exhaustive=exhaustive)


# ---------------------------------------------------------------------------
# δ-(co)invariants and δ-(co)perfection
# ---------------------------------------------------------------------------


def frobenius_fixed(structure: DeltaStructure) -> bool:
    return all(structure.phi(x) == x for x in structure.carrier.elements())


def delta_invariants(structure: DeltaStructure) -> DeltaStructure:
    """ker(φ - 1) as a subring with the identity lift."""
    carrier = structure.carrier
    members = frozenset(x for x in carrier.elements() if structure.phi(x) == x)
    subring = SubRing(carrier, members)
    return DeltaStructure(subring, lambda x: x, f"{structure.name}^(φ=1)")


@dataclass(frozen=True)
class Coinvariants:
    """A -> A/(φ(a) - a), the quotient carrying the identity lift."""

    source: DeltaStructure
    target: DeltaStructure

    @property
    def quotient(self) -> QuotientRing:
        return self.target.carrier

    def project(self, x: Element) -> Element:
        return self.quotient.project(x)


def delta_coinvariants(structure: DeltaStructure) -> Coinvariants:
    """
    coker(φ - 1) as a ring: the quotient by the ideal the differences
    φ(a) - a generate. Re-truncation at the carrier's precision is automatic
    because the carrier is already p^m-torsion. The result may be the zero ring.
    """
    carrier = structure.carrier
    differences = [carrier.sub(structure.phi(x), x) for x in carrier.elements()]
    ideal = ideal_closure(carrier, differences)
    quotient = QuotientRing(carrier, ideal)
    logger.debug(
        "δ-coinvariants of %s: ideal of size %d, quotient of size %d",
        carrier.describe(),
        len(ideal),
        quotient.size(),
    )
    return Coinvariants(
        structure, DeltaStructure(quotient, lambda x: x, f"{structure.name}_(φ=1)")
    )


@dataclass(frozen=True)
class DeltaPerfections:
    """
    The eventual image E = φ^k(A) of the lift, which is both the
    δ-coperfection (with ``unit``: A -> E) and the δ-perfection (with
    ``counit``: E -> A, the inclusion).
    """

    source: DeltaStructure
    image: DeltaStructure
    unit: DeltaMap = field(compare=False)
    counit: DeltaMap = field(compare=False)
    steps: int = 0


def delta_perfections(structure: DeltaStructure) -> DeltaPerfections:
    carrier = structure.carrier
    current = frozenset(carrier.elements())
    steps = 0
    while True:
        following = frozenset(structure.phi(x) for x in current)
        if len(following) == len(current):
            break
        current, steps = following, steps + 1
    image = SubRing(carrier, current)
    inverse = {structure.phi(x): x for x in current}
    unit = {}
    for x in carrier.elements():
        y = x
        for _ in range(steps):
            y = structure.phi(y)
        for _ in range(steps):
            y = inverse[y]
        unit[x] = y
    lifted = DeltaStructure(image, structure.lift, f"{structure.name}|perf")
    logger.debug(
        "Lift on %s stabilizes after %d steps on %d elements",
        carrier.describe(),
        steps,
        len(current),
    )
    return DeltaPerfections(structure, lifted, unit, {x: x for x in current}, steps)


def delta_coperfection(structure: DeltaStructure) -> DeltaPerfections:
    """Colimit along φ; the structure map is ``unit``."""
    return delta_perfections(structure)


def delta_perfection(structure: DeltaStructure) -> DeltaPerfections:
    """Limit along φ; the structure map is ``counit``."""
    return delta_perfections(structure)


def _map_key(table: DeltaMap, source: FiniteRing) -> Tuple:
    return tuple(table[x] for x in source.sorted_elements())


def delta_hom_bijection(
    left: Sequence[DeltaMap],
    right: Sequence[DeltaMap],
    transport: Callable[[DeltaMap], DeltaMap],
    right_source: FiniteRing,
) -> CheckOutcome:
    """``transport`` sends ``left`` bijectively onto ``right``."""
    images = [_map_key(transport(f), right_source) for f in left]
    expected = {_map_key(f, right_source) for f in right}
    if len(set(images)) != len(images):
        return CheckOutcome.fail(
            property="injective", left=len(left), right=len(right)
        )
    if set(images) != expected:
        return CheckOutcome.fail(
            property="surjective", left=len(left), right=len(right)
        )
    return CheckOutcome.ok(maps=len(left))


def delta_invariants_adjunction_check(
    stone: DeltaStructure, structure: DeltaStructure
) -> CheckOutcome:
    """Hom_δ(B, A^(φ=1)) = Hom_δ(B, A) for Stone B, by composing with inclusion."""
    invariants = delta_invariants(structure)
    return delta_hom_bijection(
        delta_maps(stone, invariants),
        delta_maps(stone, structure),
        lambda g: g,
        stone.carrier,
    )


def delta_coinvariants_adjunction_check(
    structure: DeltaStructure, stone: DeltaStructure
) -> CheckOutcome:
    """Hom_δ(A_(φ=1), B) = Hom_δ(A, B) for Stone B, by precomposing the projection."""
    coinvariants = delta_coinvariants(structure)
    return delta_hom_bijection(
        delta_maps(coinvariants.target, stone),
        delta_maps(structure, stone),
        lambda g: {x: g[coinvariants.project(x)] for x in structure.carrier.elements()},
        structure.carrier,
    )


def delta_coperfection_adjunction_check(
    structure: DeltaStructure, perfect: DeltaStructure
) -> CheckOutcome:
    """Hom_δ(A_perf, B) = Hom_δ(A, B) for B with bijective lift."""
    perfections = delta_coperfection(structure)
    return delta_hom_bijection(
        delta_maps(perfections.image, perfect),
        delta_maps(structure, perfect),
        lambda g: {x: g[perfections.unit[x]] for x in structure.carrier.elements()},
        structure.carrier,
    )


def delta_perfection_adjunction_check(
    perfect: DeltaStructure, structure: DeltaStructure
) -> CheckOutcome:
    """Hom_δ(B, A^perf) = Hom_δ(B, A) for B with bijective lift."""
    perfections = delta_perfection(structure)
    return delta_hom_bijection(
        delta_maps(perfect, perfections.image),
        delta_maps(perfect, structure),
        lambda g: {x: perfections.counit[g[x]] for x in perfect.carrier.elements()},
        perfect.carrier,
    )


def invariants_reduction_check(ring: WittRing) -> CheckOutcome:
    """
    For W_n(A) over a perfect A with the digitwise lift, the first components
    of the δ-invariants are exactly the Frobenius invariants of A.
    """
    base = ring.base
    if not isinstance(base, FiniteFpAlgebra) or not base.is_perfect():
        raise DualityError(
            f"invariants_reduction_check needs W_n of a perfect F_p-algebra, got "
            f"{ring.describe()}"
        )
    invariants = delta_invariants(witt_delta(ring))
    reduced = {a.components[0] for a in invariants.carrier.elements()}
    inclusion = frobenius_invariants(base)
    expected = {inclusion(v) for v in inclusion.source.elements()}
    if reduced != expected:
        return CheckOutcome.fail(
            reduced=len(reduced), frobenius_invariants=len(expected)
        )
    return CheckOutcome.ok(size=len(expected))


# ---------------------------------------------------------------------------
# Flatness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FFWitness:
    """
    Faithful flatness of a map of function algebras, judged by surjectivity
    of the dual map and cross-checked against injectivity of the ring map.
    """

    faithfully_flat: bool
    injective: bool
    p_torsion_free_structurally: bool = False
    missing_point: Optional[Hashable] = None
    kernel_element: Optional[Vector] = None

    @property
    def consistent(self) -> bool:
        return self.faithfully_flat == self.injective

    def to_json(self) -> Dict[str, Any]:
        data = {
            "faithfully_flat": self.faithfully_flat,
            "injective": self.injective,
            "p_torsion_free_structurally": self.p_torsion_free_structurally,
        }
        if self.missing_point is not None:
            data["missing_point"] = self.missing_point
            data["kernel_element"] = list(self.kernel_element)
        return data


def ff_check(
    f: AlgebraMap, source_points: Optional[Sequence[Hashable]] = None
) -> FFWitness:
    """
    Faithful flatness of F_p^S -> F_p^T as surjectivity of Spec(F_p^T) ->
    Spec(F_p^S). A missing point s comes with the indicator of s, which the
    map sends to zero.
    """
    if not f.is_homomorphism():
        raise DualityError(
            f"ff_check needs a ring homomorphism; the map {f.matrix} from "
            f"{f.source.describe()} to {f.target.describe()} is not one."
        )
    for algebra in (f.source, f.target):
        if not is_p_boolean(algebra):
            raise DualityError(
                f"ff_check compares maps of function algebras; {algebra.describe()} "
                f"is not p-Boolean."
            )
    source_points = list(source_points or f.source.labels)
    source_chars = spec_chars(f.source).points
    hit = set(dual_map(f).values())
    missing = [chi for chi in source_chars if chi not in hit]
    injective = f.is_injective()
    if not missing:
        return FFWitness(True, injective)
    chi = missing[0]
    kernel_element = _idempotent_of(f.source, chi)
    if any(f(kernel_element)):
        raise DualityError(
            f"Idempotent {kernel_element} of a missing point is not killed by the map"
        )
    index = next(i for i, c in enumerate(chi) if c) if any(chi) else 0
    return FFWitness(
        False,
        injective,
        missing_point=source_points[index],
        kernel_element=kernel_element,
    )


def _idempotent_of(algebra: FiniteFpAlgebra, chi: Vector) -> Vector:
    """The primitive idempotent on which the character chi is 1."""
    p = algebra.p
    for e in algebra.sorted_elements():
        if (
            any(e)
            and algebra.mul(e, e) == e
            and sum(c * x for c, x in zip(chi, e)) % p == 1
            and all(
                algebra.mul(e, algebra.basis_vector(i))
                == algebra.scalar(chi[i], e)
                for i in range(algebra.dim)
            )
        ):
            return e
    raise DualityError(f"No primitive idempotent for character {chi}")


def p_torsion_free_at_truncation(ring: FunctionRing) -> bool:
    """The p-torsion of Cont(S, Z/p^m) is exactly p^(m-1) Cont(S, Z/p^m)."""
    codomain = ring.codomain
    p, m = ring.p, ring.m
    zero = codomain.zero()
    torsion = {x for x in codomain.elements() if codomain.scale(p, x) == zero}
    top = {codomain.scale(p ** (m - 1), x) for x in codomain.elements()}
    return torsion == top


def p_complete_ff_check(f: FunctionRingMap) -> FFWitness:
    """
    p-complete faithful flatness of a map of Stone δ-rings: the derived mod p
    fiber sits in degree 0 because the function rings are p-torsion free at
    truncation, and the verdict is ff_check of the reduction.
    """
    if f.source.m != f.target.m:
        raise DualityError(
            f"p_complete_ff_check needs equal precision, got {f.source.m} and "
            f"{f.target.m}"
        )
    structural = all(
        p_torsion_free_at_truncation(ring) for ring in (f.source, f.target)
    )
    reduced = ff_check(f.reduction(), f.source.domain)
    return FFWitness(
        reduced.faithfully_flat,
        reduced.injective,
        structural,
        reduced.missing_point,
        reduced.kernel_element,
    )


def flatness_correspondence_check(
    source_points: Sequence[Hashable],
    target_points: Sequence[Hashable],
    p: int,
    m: int,
) -> CheckOutcome:
    """
    Over every ring map F_p^S -> F_p^T (all of which are pullbacks of set
    maps T -> S): ff ⟺ dual surjective ⟺ injective, and the Witt lift is
    p-completely ff exactly when the reduction is ff.
    """
    source = function_algebra(source_points, p)
    target = function_algebra(target_points, p)
    enumerated = {g.key() for g in algebra_maps(source, target)}
    from_sets = set()
    checked = 0
    for f in all_set_maps(target_points, source_points):
        lifted = FunctionRingMap.from_set_map(f, source_points, target_points, p, m)
        reduction = lifted.reduction()
        from_sets.add(reduction.key())
        witness = ff_check(reduction, source_points)
        surjective = set(f.values()) == set(source_points)
        if not witness.consistent or witness.faithfully_flat != surjective:
            return CheckOutcome.fail(map=f, **witness.to_json())
        lifted_witness = p_complete_ff_check(lifted)
        if (
            lifted_witness.faithfully_flat != witness.faithfully_flat
            or not lifted_witness.p_torsion_free_structurally
        ):
            return CheckOutcome.fail(
                map=f, property="Witt lift", **lifted_witness.to_json()
            )
        checked += 1
    if from_sets != enumerated:
        return CheckOutcome.fail(
            property="every ring map is a pullback",
            ring_maps=len(enumerated),
            set_maps=len(from_sets),
        )
    return CheckOutcome.ok(maps=checked)


# ---------------------------------------------------------------------------
# Covers and sites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelCover:
    """A finite family of maps T_i -> S between level sets."""

    target: Tuple[Hashable, ...]
    # (domain points, graph of the map) per member
    members: Tuple[Tuple[Tuple[Hashable, ...], CoverGraph], ...]

    @classmethod
    def of(
        cls,
        target: Sequence[Hashable],
        members: Sequence[Tuple[Sequence[Hashable], Dict[Hashable, Hashable]]],
    ) -> "LevelCover":
        return cls(
            tuple(target),
            tuple(
                (tuple(domain), tuple((x, f[x]) for x in domain))
                for domain, f in members
            ),
        )

    def maps(self) -> List[Tuple[Tuple[Hashable, ...], Dict[Hashable, Hashable]]]:
        return [(domain, dict(graph)) for domain, graph in self.members]

    def is_jointly_surjective(self) -> bool:
        hit = {s for _, f in self.maps() for s in f.values()}
        return hit == set(self.target)

    def uncovered(self) -> List[Hashable]:
        hit = {s for _, f in self.maps() for s in f.values()}
        return [s for s in self.target if s not in hit]


@dataclass(frozen=True)
class TranslatedCover:
    """The duality image of a cover, with the product map into Π Cont(T_i)."""

    cover: LevelCover
    ring_maps: Tuple[FunctionRingMap, ...]
    product_map: FunctionRingMap


def site_translate(cover: LevelCover, p: int, m: int) -> TranslatedCover:
    """
    Send {T_i -> S} to {Cont(S) -> Cont(T_i)} and the product map
    Cont(S) -> Cont(⊔ T_i) = Π Cont(T_i).
    """
    ring_maps = tuple(
        FunctionRingMap.from_set_map(f, cover.target, domain, p, m)
        for domain, f in cover.maps()
    )
    disjoint_points = tuple(
        (i, x) for i, (domain, _) in enumerate(cover.maps()) for x in domain
    )
    disjoint_map = {(i, x): f[x] for i, (_, f) in enumerate(cover.maps()) for x in f}
    product_map = FunctionRingMap.from_set_map(
        disjoint_map, cover.target, disjoint_points, p, m
    )
    return TranslatedCover(cover, ring_maps, product_map)


def site_untranslate(translated: TranslatedCover) -> LevelCover:
    """Back from ring maps to set maps through the evaluation bijection."""
    members = [
        (f.target.domain, dualize_ring_map(f)) for f in translated.ring_maps
    ]
    return LevelCover.of(translated.cover.target, members)


def cover_translation_check(cover: LevelCover, p: int, m: int) -> CheckOutcome:
    """
    Round trip through the duality returns the cover, and the cover is
    jointly surjective exactly when the product map is p-completely ff.
    """
    translated = site_translate(cover, p, m)
    if site_untranslate(translated) != cover:
        return CheckOutcome.fail(property="round trip", target=cover.target)
    witness = p_complete_ff_check(translated.product_map)
    surjective = cover.is_jointly_surjective()
    if witness.faithfully_flat != surjective:
        return CheckOutcome.fail(
            property="jointly surjective ⟺ p-completely ff",
            target=cover.target,
            **witness.to_json(),
        )
    if not surjective and witness.missing_point not in cover.uncovered():
        return CheckOutcome.fail(property="witness point", got=witness.missing_point)
    return CheckOutcome.ok(jointly_surjective=surjective)


def enumerate_covers(
    target: Sequence[Hashable], max_domain: int, max_members: int
) -> Iterator[LevelCover]:
    """Families of distinct maps {0..k-1} -> S with k <= max_domain.

    Families have at most max_members members.
    """
    maps = [
        (tuple(range(k)), f)
        for k in range(1, max_domain + 1)
        for f in all_set_maps(range(k), target)
    ]
    for size in range(1, max_members + 1):
        for family in itertools.combinations(maps, size):
            yield LevelCover.of(target, family)


# ---------------------------------------------------------------------------
# Stone characterization and models
# ---------------------------------------------------------------------------


def _multiples_of_p(carrier: FiniteRing) -> FrozenSet[Element]:
    return frozenset(carrier.scale(carrier.p, x) for x in carrier.elements())


def mod_p_injective(carrier: FiniteRing, project: Callable, target: FiniteRing) -> bool:
    """A/p -> B/p is injective: x maps into pB only when x is in pA."""
    source_p = _multiples_of_p(carrier)
    target_p = _multiples_of_p(target)
    return all(
        x in source_p for x in carrier.elements() if project(x) in target_p
    )


def stone_characterization_check(structure: DeltaStructure) -> CheckOutcome:
    """
    φ = id exactly when A -> A_(φ=1) is p-completely faithfully flat, read as
    injectivity of the reduction mod p of the projection.
    """
    fixed = frobenius_fixed(structure)
    coinvariants = delta_coinvariants(structure)
    flat = mod_p_injective(
        structure.carrier, coinvariants.project, coinvariants.quotient
    )
    if fixed != flat:
        return CheckOutcome.fail(
            structure=structure.name,
            carrier=structure.carrier.describe(),
            frobenius_identity=fixed,
            coinvariant_ff=flat,
        )
    return CheckOutcome.ok(stone=fixed, coinvariant_size=coinvariants.quotient.size())


@dataclass(frozen=True)
class StoneModel:
    """δ-maps A -> Z/p^m as points, and the evaluation A -> Cont(points, Z/p^m)."""

    structure: DeltaStructure
    points: Tuple[DeltaMap, ...] = field(compare=False)
    evaluation: Dict[Element, Tuple[Element, ...]] = field(compare=False)

    @property
    def is_bijective(self) -> bool:
        images = set(self.evaluation.values())
        size = self.structure.carrier.size()
        return len(images) == size == self.codomain_size()

    def codomain_size(self) -> int:
        carrier = self.structure.carrier
        return (carrier.p ** carrier.precision) ** len(self.points)


def stone_model(structure: DeltaStructure) -> StoneModel:
    carrier = structure.carrier
    scalars = identity_delta(ResidueRing(carrier.p, carrier.precision))
    points = tuple(delta_maps(structure, scalars))
    evaluation = {
        x: tuple(chi[x] for chi in points) for x in carrier.sorted_elements()
    }
    return StoneModel(structure, points, evaluation)


def stone_model_check(structure: DeltaStructure) -> CheckOutcome:
    """The evaluation map is bijective iff φ = id."""
    model = stone_model(structure)
    fixed = frobenius_fixed(structure)
    if model.is_bijective != fixed:
        return CheckOutcome.fail(
            structure=structure.name, points=len(model.points), frobenius_identity=fixed
        )
    return CheckOutcome.ok(points=len(model.points), stone=fixed)


def gelfand_check(
    presentation: EquivRelPresentation,
    n: int,
    m: int,
    p: int = 2,
    rng: Optional[random.Random] = None,
    samples: int = 1000,
    exhaustive_limit: int = 6561,
) -> CheckOutcome:
    """
    Cont(K_n, Z/p^m) for a quotient-presented K is a perfect δ-ring with the
    identity lift whose reduction mod p is p-Boolean.

    The δ-axioms run on every pair of functions when there are at most
    ``exhaustive_limit`` pairs, otherwise on ``samples`` pairs drawn from ``rng``.
    """
    quotient = quotient_presentation(presentation, n)
    carrier = FunctionRing(quotient.classes, p, m)
    structure = identity_delta(carrier)
    if not is_perfect_delta(structure.lift, carrier):
        return CheckOutcome.fail(property="perfect", level=n)
    if not is_p_boolean(function_algebra(quotient.classes, p)):
        return CheckOutcome.fail(property="reduction p-Boolean", level=n)
    checked, exhaustive = 0, True
    if m >= 2:
        elements = carrier.sorted_elements()
        exhaustive = len(elements) ** 2 <= exhaustive_limit
        if exhaustive:
            pairs = list(itertools.product(elements, repeat=2))
        else:
            rng = rng or random.Random(0)
            pairs = [
                (rng.choice(elements), rng.choice(elements)) for _ in range(samples)
            ]
        outcome = check_delta_axioms(structure, iter(pairs))
        if not outcome:
            return outcome
        checked = len(pairs)
    if not p_torsion_free_at_truncation(carrier):
        return CheckOutcome.fail(property="p-torsion", level=n)
    return CheckOutcome.ok(
        points=len(quotient.classes), pairs=checked, exhaustive=exhaustive
    )
