"""
Set-valued presheaves on a finite site of profinite levels.

Site objects are the level sets of towers at a fixed working level; morphisms
are all set maps between them and covers are finite jointly surjective
families. Fiber products of members are formed with the tower fiber product
and adjoined on demand, so presheaves here are evaluated on any finite set.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Iterator, List, Sequence, Tuple

from boolean_stone import spec_chars
from delta_duality import (
    FunctionRingMap,
    LevelCover,
    StoneDeltaRingApprox,
    all_set_maps,
    dualize_ring_map,
    p_complete_ff_check,
    psi_functor,
    site_translate,
)
from exact_algebra import CheckOutcome, canonical_key
from fp_algebra import function_algebra
from profinite import (
    DisjointSet,
    EquivRelPresentation,
    ProMap,
    Tower,
    constant_tower,
    label_from_json,
    label_to_json,
    quotient_presentation,
    sort_labels,
    tower_fiber_product,
)

logger = logging.getLogger(__name__)

Points = Tuple[Hashable, ...]
SetMap = Dict[Hashable, Hashable]
Value = Any


class SiteError(ValueError):
    """Malformed site, cover or presheaf data."""


# ---------------------------------------------------------------------------
# Fiber products of level maps
# ---------------------------------------------------------------------------


def level_fiber_product(
    f: SetMap, f_domain: Points, g: SetMap, g_domain: Points, target: Points
) -> Tuple[Tuple[Hashable, Hashable], ...]:
    """U ×_W V for f: U -> W and g: V -> W, read off a depth-0 tower fiber product."""
    base = constant_tower(target, 0, "W")
    left = ProMap.from_functions(
        constant_tower(f_domain, 0, "U"), base, lambda n, x: f[x]
    )
    right = ProMap.from_functions(
        constant_tower(g_domain, 0, "V"), base, lambda n, x: g[x]
    )
    return tower_fiber_product(left, right).tower.levels[0]


# ---------------------------------------------------------------------------
# Sites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SiteObject:
    name: str
    points: Points

    def identity(self) -> SetMap:
        return {x: x for x in self.points}


def _canonical_members(domain: Points, target: Points) -> List[SetMap]:
    """Maps domain -> target up to automorphisms of the domain."""
    return [
        dict(zip(domain, images))
        for images in itertools.combinations_with_replacement(target, len(domain))
    ]


@dataclass(frozen=True)
class FiniteSite:
    """
    Finitely many level sets with all set maps between them.

    Covers of an object are jointly surjective families of at most
    ``max_members`` morphisms from site objects, each member taken up to
    automorphisms of its domain.
    """

    objects: Tuple[SiteObject, ...]
    level: int = 0
    max_members: int = 3

    def __post_init__(self):
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise SiteError(f"Site object names repeat: {names}")
        if self.max_members < 1:
            raise SiteError("Covers need at least one member")

    @classmethod
    def from_towers(
        cls, towers: Sequence[Tower], level: int, max_members: int = 3
    ) -> "FiniteSite":
        objects = []
        for tower in towers:
            if level > tower.depth:
                raise SiteError(
                    f"Tower {tower.name!r} of depth {tower.depth} has no level "
                    f"{level}.\n"
                    f"All site objects are read at one working level."
                )
            objects.append(SiteObject(tower.name, tower.levels[level]))
        return cls(tuple(objects), level, max_members)

    def object(self, name: str) -> SiteObject:
        for o in self.objects:
            if o.name == name:
                return o
        raise SiteError(f"No site object named {name!r}")

    def morphisms(self, source: SiteObject, target: SiteObject) -> List[SetMap]:
        return list(all_set_maps(source.points, target.points))

    def covers(self, target: SiteObject) -> Iterator[LevelCover]:
        members = [
            (source.points, f)
            for source in self.objects
            if source.points
            for f in _canonical_members(source.points, target.points)
        ]
        for size in range(1, self.max_members + 1):
            for family in itertools.combinations(members, size):
                cover = LevelCover.of(target.points, family)
                if cover.is_jointly_surjective():
                    yield cover

    def all_covers(self) -> Iterator[Tuple[SiteObject, LevelCover]]:
        for target in self.objects:
            for cover in self.covers(target):
                yield target, cover

    def check_cover_axioms(self, sample: int = 50) -> CheckOutcome:
        """
        Isomorphisms cover, covers pull back along morphisms, and refining the
        members of a cover by covers of their domains gives a cover. Pullback
        and composition are checked on the first ``sample`` covers per object.
        """
        for target in self.objects:
            for perm in itertools.permutations(target.points):
                iso = dict(zip(target.points, perm))
                cover = LevelCover.of(target.points, [(target.points, iso)])
                if not cover.is_jointly_surjective():
                    return CheckOutcome.fail(axiom="isomorphism", target=target.name)
            for cover in itertools.islice(self.covers(target), sample):
                for source in self.objects:
                    if not self._pullbacks_cover(cover, source):
                        return CheckOutcome.fail(
                            axiom="pullback", target=target.name, source=source.name
                        )
                if not self._refinement_covers(cover):
                    return CheckOutcome.fail(axiom="composition", target=target.name)
        return CheckOutcome.ok(objects=len(self.objects))

    def _pullbacks_cover(self, cover: LevelCover, source: SiteObject) -> bool:
        if not source.points:
            return True
        for g in all_set_maps(source.points, cover.target):
            pulled = []
            for domain, f in cover.maps():
                pairs = level_fiber_product(g, source.points, f, domain, cover.target)
                pulled.append((pairs, {pair: pair[0] for pair in pairs}))
            if not LevelCover.of(source.points, pulled).is_jointly_surjective():
                return False
        return True

    def _refinement_covers(self, cover: LevelCover) -> bool:
        refined = []
        for domain, f in cover.maps():
            inner = next(
                (c for o in self.objects if o.points == domain for c in self.covers(o)),
                None,
            )
            if inner is None:
                refined.append((domain, f))
                continue
            for inner_domain, h in inner.maps():
                refined.append((inner_domain, {x: f[h[x]] for x in inner_domain}))
        return LevelCover.of(cover.target, refined).is_jointly_surjective()

    def to_json(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "max_members": self.max_members,
            "objects": [
                {"name": o.name, "points": [label_to_json(x) for x in o.points]}
                for o in self.objects
            ],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FiniteSite":
        try:
            objects = tuple(
                SiteObject(
                    o["name"], sort_labels(label_from_json(x) for x in o["points"])
                )
                for o in data["objects"]
            )
        except (KeyError, TypeError) as e:
            raise SiteError(
                f"Invalid site JSON: {e}.\n"
                f'Expected {{"objects": [{{"name": ..., "points": [...]}}], '
                f'"level": N, "max_members": K}}.'
            ) from e
        return cls(objects, int(data.get("level", 0)), int(data.get("max_members", 3)))


# ---------------------------------------------------------------------------
# Presheaves
# ---------------------------------------------------------------------------


def _compose_restrict(x: Tuple, f: SetMap, source: Points, target: Points) -> Tuple:
    position = {t: i for i, t in enumerate(target)}
    return tuple(x[position[f[u]]] for u in source)


class PresheafApprox(ABC):
    """A contravariant functor from finite sets to finite sets of values."""

    name: str = "X"

    @abstractmethod
    def values(self, points: Points) -> Tuple[Value, ...]: ...

    @abstractmethod
    def restrict(self, f: SetMap, source: Points, target: Points, x: Value) -> Value:
        """X(f): X(target) -> X(source) for f: source -> target."""


class RepresentablePresheaf(PresheafApprox):
    """Hom(-, K) for a finite set K; values are tuples indexed like the domain."""

    def __init__(self, points: Sequence[Hashable], name: str = ""):
        self.points = tuple(points)
        self.name = name or f"Hom(-,{len(self.points)})"

    def values(self, points: Points) -> Tuple[Value, ...]:
        return tuple(itertools.product(self.points, repeat=len(points)))

    def restrict(self, f, source, target, x):
        return _compose_restrict(x, f, source, target)


class ConstantPresheaf(PresheafApprox):
    """The same value set on every object, identity restrictions."""

    def __init__(self, values: Sequence[Value], name: str = "constant"):
        self._values = tuple(values)
        self.name = name

    def values(self, points: Points) -> Tuple[Value, ...]:
        return self._values

    def restrict(self, f, source, target, x):
        return x


class FunctionalPresheaf(PresheafApprox):
    """A presheaf given by two callables."""

    def __init__(
        self,
        values: Callable[[Points], Tuple[Value, ...]],
        restrict: Callable[[SetMap, Points, Points, Value], Value],
        name: str = "X",
    ):
        self._values = values
        self._restrict = restrict
        self.name = name

    def values(self, points: Points) -> Tuple[Value, ...]:
        return self._values(points)

    def restrict(self, f, source, target, x):
        return self._restrict(f, source, target, x)


class BrokenRestrictionPresheaf(PresheafApprox):
    """
    A presheaf whose restrictions along non-identity maps collapse to the
    first value. Used to show the sheaf checker reports witnesses.
    """

    def __init__(self, base: PresheafApprox):
        self.base = base
        self.name = f"{base.name}+broken-restriction"

    def values(self, points: Points) -> Tuple[Value, ...]:
        return self.base.values(points)

    def restrict(self, f, source, target, x):
        if source == target and all(f[u] == u for u in source):
            return x
        return self.values(source)[0]


# ---------------------------------------------------------------------------
# The sheaf condition
# ---------------------------------------------------------------------------


def sheaf_check(presheaf: PresheafApprox, cover: LevelCover) -> CheckOutcome:
    """
    X(T) -> Π X(T_i) ⇉ Π X(T_i ×_T T_j) is an equalizer.

    Compatible families are built member by member with a hash join on the
    restrictions to the pairwise fiber products, so only partial families
    that are already compatible are kept.
    """
    target = cover.target
    members = cover.maps()
    k = len(members)
    restrictions: Dict[Tuple[int, int], Tuple[Dict, Dict]] = {}
    for i, j in itertools.product(range(k), repeat=2):
        if j < i:
            continue
        (u, f), (v, g) = members[i], members[j]
        pairs = level_fiber_product(f, u, g, v, target)
        left = {pair: pair[0] for pair in pairs}
        right = {pair: pair[1] for pair in pairs}
        restrictions[i, j] = (
            {x: presheaf.restrict(left, pairs, u, x) for x in presheaf.values(u)},
            {y: presheaf.restrict(right, pairs, v, y) for y in presheaf.values(v)},
        )
    families: List[Tuple[Value, ...]] = [()]
    for j in range(k):
        candidates: Dict[Tuple, List[Value]] = {}
        self_left, self_right = restrictions[j, j]
        for y in presheaf.values(members[j][0]):
            if self_left[y] != self_right[y]:
                continue
            key = tuple(restrictions[i, j][1][y] for i in range(j))
            candidates.setdefault(key, []).append(y)
        extended = []
        for family in families:
            key = tuple(restrictions[i, j][0][family[i]] for i in range(j))
            extended.extend(family + (y,) for y in candidates.get(key, ()))
        families = extended
    images: Dict[Tuple, Value] = {}
    for x in presheaf.values(target):
        image = tuple(presheaf.restrict(f, u, target, x) for u, f in members)
        if image in images:
            return CheckOutcome.fail(
                presheaf=presheaf.name,
                target=target,
                property="separated",
                values=[images[image], x],
            )
        images[image] = x
    glued = set(families)
    if set(images) != glued:
        missing = sorted(glued - set(images), key=canonical_key)
        return CheckOutcome.fail(
            presheaf=presheaf.name,
            target=target,
            property="gluing",
            family=missing[0] if missing else None,
        )
    return CheckOutcome.ok(sections=len(images))


def site_sheaf_check(presheaf: PresheafApprox, site: FiniteSite) -> CheckOutcome:
    """sheaf_check on every cover of every site object."""
    checked = 0
    for target, cover in site.all_covers():
        outcome = sheaf_check(presheaf, cover)
        if not outcome:
            return CheckOutcome.fail(object=target.name, **outcome.witness)
        checked += 1
    logger.debug(
        "%s satisfies the sheaf condition on %d covers", presheaf.name, checked
    )
    return CheckOutcome.ok(covers=checked)


def functoriality_check(presheaf: PresheafApprox, site: FiniteSite) -> CheckOutcome:
    """X(id) = id and X(g o f) = X(f) o X(g) on every composable pair."""
    for obj in site.objects:
        for x in presheaf.values(obj.points):
            if presheaf.restrict(obj.identity(), obj.points, obj.points, x) != x:
                return CheckOutcome.fail(
                    presheaf=presheaf.name, object=obj.name, law="identity"
                )
    for u, v, w in itertools.product(site.objects, repeat=3):
        for f in site.morphisms(u, v):
            for g in site.morphisms(v, w):
                gf = {x: g[f[x]] for x in u.points}
                for x in presheaf.values(w.points):
                    direct = presheaf.restrict(gf, u.points, w.points, x)
                    middle = presheaf.restrict(g, v.points, w.points, x)
                    stepwise = presheaf.restrict(f, u.points, v.points, middle)
                    if direct != stepwise:
                        return CheckOutcome.fail(
                            presheaf=presheaf.name,
                            law="composition",
                            objects=[u.name, v.name, w.name],
                            value=x,
                        )
    return CheckOutcome.ok()


# ---------------------------------------------------------------------------
# Condensification and quotient-presented objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientCondensedSet:
    """S/R for an equivalence relation presentation, read at one level."""

    presentation: EquivRelPresentation
    level: int

    def __post_init__(self):
        if not 0 <= self.level <= self.presentation.tower.depth:
            raise SiteError(
                f"Level {self.level} is misaligned with presentation "
                f"{self.presentation.name!r} of depth {self.presentation.tower.depth}"
            )

    @property
    def classes(self) -> Points:
        return quotient_presentation(self.presentation, self.level).classes

    def project(self, s: Hashable) -> Hashable:
        return quotient_presentation(self.presentation, self.level).projection[s]


def condensify(target: Any) -> PresheafApprox:
    """
    The presheaf T -> Cont(T, K): all maps into a finite discrete set, or
    all maps into S_n/R_n for a quotient-presented K.
    """
    if isinstance(target, QuotientCondensedSet):
        quotient = quotient_presentation(target.presentation, target.level)
        return RepresentablePresheaf(
            quotient.classes, f"{target.presentation.name}@{target.level}"
        )
    if isinstance(target, (list, tuple)):
        return RepresentablePresheaf(target, f"discrete{len(target)}")
    raise SiteError(
        f"condensify expects a finite set or a QuotientCondensedSet, got "
        f"{type(target).__name__}"
    )


def condensify_composites(quotient: QuotientCondensedSet, points: Points) -> set:
    """Composites T -> S_n -> S_n/R_n, by brute force over maps into S_n."""
    level = quotient.presentation.tower.levels[quotient.level]
    projection = quotient_presentation(quotient.presentation, quotient.level).projection
    return {
        tuple(projection[s] for s in images)
        for images in itertools.product(level, repeat=len(points))
    }


def coequalizer_check(quotient: QuotientCondensedSet, points: Points) -> CheckOutcome:
    """
    condensify(S/R)(T) is the coequalizer of condensify(R)(T) ⇉ condensify(S)(T):
    maps T -> S modulo the equivalence generated by pairs of maps through R.
    """
    level = quotient.presentation.tower.levels[quotient.level]
    relation = sorted(quotient.presentation.relation[quotient.level], key=canonical_key)
    maps_to_s = list(itertools.product(level, repeat=len(points)))
    classes = DisjointSet(maps_to_s)
    for h in itertools.product(relation, repeat=len(points)):
        classes.union(tuple(a for a, _ in h), tuple(b for _, b in h))
    coequalizer = classes.sets()
    projection = quotient_presentation(quotient.presentation, quotient.level).projection
    values = set(condensify(quotient).values(points))
    induced = {}
    for group in coequalizer:
        images = {tuple(projection[s] for s in g) for g in group}
        if len(images) != 1:
            return CheckOutcome.fail(property="well defined", size=len(images))
        induced[next(iter(images))] = group
    if len(induced) != len(coequalizer) or set(induced) != values:
        return CheckOutcome.fail(
            property="bijective",
            coequalizer=len(coequalizer),
            quotient_maps=len(values),
        )
    return CheckOutcome.ok(classes=len(coequalizer))


def qc_check(presheaf: PresheafApprox, site: FiniteSite) -> CheckOutcome:
    """
    Some site object T with a section x in X(T) whose Yoneda map
    Hom(-, T) -> X, g -> X(g)(x), is onto at every site object.
    """
    for t in site.objects:
        for x in presheaf.values(t.points):
            if all(
                {
                    presheaf.restrict(g, u.points, t.points, x)
                    for g in site.morphisms(u, t)
                }
                == set(presheaf.values(u.points))
                for u in site.objects
            ):
                return CheckOutcome.ok(object=t.name, section=x)
    largest = max(site.objects, key=lambda o: len(presheaf.values(o.points)))
    return CheckOutcome.fail(
        presheaf=presheaf.name,
        object=largest.name,
        values=len(presheaf.values(largest.points)),
        largest_hom=max(
            len(t.points) ** len(largest.points) for t in site.objects
        ),
    )


def qs_check_presented(
    presentation: EquivRelPresentation, f: ProMap, g: ProMap
) -> CheckOutcome:
    """
    The levelwise fiber product {(a, b) : f(a) ~ g(b)} over S/R is a
    sub-tower of T_1 x T_2 stable under transitions.
    """
    tower = presentation.tower
    for m in (f, g):
        if m.target != tower or m.reindex != tuple(range(tower.depth + 1)):
            raise SiteError(
                "qs_check_presented needs levelwise maps into the presentation's tower"
            )
    levels = [
        {
            (a, b)
            for a in f.source.levels[n]
            for b in g.source.levels[n]
            if (f.apply(n, a), g.apply(n, b)) in presentation.relation[n]
        }
        for n in range(tower.depth + 1)
    ]
    for n in range(tower.depth):
        for a, b in sorted(levels[n + 1], key=canonical_key):
            image = (f.source.transition(n, a), g.source.transition(n, b))
            if image not in levels[n]:
                return CheckOutcome.fail(
                    presentation=presentation.name,
                    level=n + 1,
                    pair=[a, b],
                    image=image,
                )
    return CheckOutcome.ok(sizes=[len(level) for level in levels])


# ---------------------------------------------------------------------------
# ψ_* and Betti δ-stacks
# ---------------------------------------------------------------------------


def dual_points(ring: StoneDeltaRingApprox) -> Points:
    """u(A): the characters of A/p, labelled by level points."""
    points = sort_labels(psi_functor(ring))
    if not points:
        raise SiteError(f"The dual of {ring.describe()} is empty and not a site object")
    return points


def psi_pushforward(
    presheaf: PresheafApprox, ring: StoneDeltaRingApprox
) -> Tuple[Value, ...]:
    """ψ_*X(A) = X(u(A))."""
    return presheaf.values(dual_points(ring))


def psi_pushforward_map(
    presheaf: PresheafApprox, f: FunctionRingMap
) -> Dict[Value, Value]:
    """ψ_*X(A) -> ψ_*X(B) for a ring map A -> B, through u(B) -> u(A)."""
    point_map = dualize_ring_map(f)
    source, target = tuple(f.target.domain), tuple(f.source.domain)
    return {
        x: presheaf.restrict(point_map, source, target, x)
        for x in presheaf.values(target)
    }


def pushforward_functoriality_check(
    presheaf: PresheafApprox, f: FunctionRingMap, g: FunctionRingMap
) -> CheckOutcome:
    """ψ_*X(g o f) = ψ_*X(g) o ψ_*X(f) for A -f-> B -g-> C."""
    if f.target != g.source:
        raise SiteError("Ring maps are not composable")
    composite = FunctionRingMap(
        f.source, g.target, tuple(f.point_map[j] for j in g.point_map)
    )
    direct = psi_pushforward_map(presheaf, composite)
    first, second = psi_pushforward_map(presheaf, f), psi_pushforward_map(presheaf, g)
    for x, y in direct.items():
        if second[first[x]] != y:
            return CheckOutcome.fail(presheaf=presheaf.name, value=x)
    return CheckOutcome.ok()


def orthogonal_idempotent_families(
    ring: StoneDeltaRingApprox, size: int
) -> List[Tuple[Any, ...]]:
    """Tuples (a_k) of idempotents with a_k a_l = 0 for k != l and Σ a_k = 1."""
    carrier = ring.carrier
    idempotents = [e for e in carrier.sorted_elements() if carrier.mul(e, e) == e]
    zero, one = carrier.zero(), carrier.one()
    families = []
    for family in itertools.product(idempotents, repeat=size):
        if any(
            carrier.mul(a, b) != zero for a, b in itertools.combinations(family, 2)
        ):
            continue
        total = zero
        for a in family:
            total = carrier.add(total, a)
        if total == one:
            families.append(family)
    return families


def betti_delta_check(tower: Tower, n: int, ring: StoneDeltaRingApprox) -> CheckOutcome:
    """
    Maps u(A) -> K_n correspond to δ-maps Cont(K_n, Z/p^m) -> A.

    A δ-map is fixed by the images of the indicators of K_n, which form an
    orthogonal family of idempotents summing to 1; both lifts are the
    identity so every ring map is a δ-map. g: u(A) -> K_n goes to the family
    of indicators of the fibers of g.
    """
    k_points = tower.level(n)
    points = dual_points(ring)
    carrier = ring.carrier
    lhs = psi_pushforward(RepresentablePresheaf(k_points), ring)
    rhs = set(orthogonal_idempotent_families(ring, len(k_points)))
    transported = set()
    for g in lhs:
        g_map = dict(zip(points, g))
        family = tuple(
            carrier.function([int(g_map[s] == k) for s in carrier.domain])
            for k in k_points
        )
        transported.add(family)
    if len(transported) != len(lhs) or transported != rhs:
        return CheckOutcome.fail(
            tower=tower.name, level=n, maps=len(lhs), delta_maps=len(rhs)
        )
    return CheckOutcome.ok(maps=len(lhs))


def betti_naturality_check(tower: Tower, n: int, f: FunctionRingMap) -> CheckOutcome:
    """
    For F: A -> B, composing δ-maps with F matches precomposing maps
    u(A) -> K_n with u(F): u(B) -> u(A).
    """
    k_points = tower.level(n)
    point_map = dualize_ring_map(f)
    a_points, b_points = f.source.domain, f.target.domain
    for g in itertools.product(k_points, repeat=len(a_points)):
        g_map = dict(zip(a_points, g))
        family = [
            f.source.function([int(g_map[s] == k) for s in a_points]) for k in k_points
        ]
        pushed = tuple(f(a) for a in family)
        pulled = tuple(
            f.target.function([int(g_map[point_map[t]] == k) for t in b_points])
            for k in k_points
        )
        if pushed != pulled:
            return CheckOutcome.fail(tower=tower.name, level=n, map=list(g))
    return CheckOutcome.ok()


def continuity_check(site: FiniteSite, p: int, m: int) -> CheckOutcome:
    """
    u preserves the terminal object, fiber products of function rings and
    covers.
    """
    point = StoneDeltaRingApprox(constant_tower(["*"], 0, "point"), 0, p, m)
    if len(dual_points(point)) != 1:
        return CheckOutcome.fail(property="terminal")
    objects = [o for o in site.objects if o.points]
    for s, t1, t2 in itertools.product(objects, repeat=3):
        for f1 in _canonical_members(t1.points, s.points):
            for f2 in _canonical_members(t2.points, s.points):
                pairs = level_fiber_product(f1, t1.points, f2, t2.points, s.points)
                product = function_algebra(
                    list(itertools.product(t1.points, t2.points)), p
                )
                relations = []
                for x in s.points:
                    relations.append(
                        tuple(
                            (int(f1[a] == x) - int(f2[b] == x)) % p
                            for a, b in itertools.product(t1.points, t2.points)
                        )
                    )
                tensor = product.quotient(relations).target
                if len(spec_chars(tensor).points) != len(pairs):
                    return CheckOutcome.fail(
                        property="fiber product", objects=[s.name, t1.name, t2.name]
                    )
    for target, cover in site.all_covers():
        translated = site_translate(cover, p, m)
        if not p_complete_ff_check(translated.product_map).faithfully_flat:
            return CheckOutcome.fail(property="cover", object=target.name)
    return CheckOutcome.ok()
