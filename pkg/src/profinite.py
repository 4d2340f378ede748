"""
Light profinite sets as towers of finite sets truncated at a finite depth.

A tower stores levels S_0..S_N and transition maps S_{n+1} -> S_n. Pro-maps,
products, fiber products, quotient presentations and the canonical examples
(the one-point compactification of N and the Cantor set) live here; every
statement is made "at depth N".
"""

import collections
import itertools
import logging
import math
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

from exact_algebra import CheckOutcome, FunctionRing, canonical_key

logger = logging.getLogger(__name__)

Label = Hashable
INFINITY = "∞"


class TowerError(ValueError):
    """Malformed tower or pro-map data."""


class PresentationError(TowerError):
    """A relation fails to be an equivalence, or fails to respect transitions."""


def sort_labels(labels) -> Tuple[Label, ...]:
    return tuple(sorted(labels, key=canonical_key))


def label_from_json(data: Any) -> Label:
    if isinstance(data, list):
        return tuple(label_from_json(x) for x in data)
    return data


def label_to_json(label: Label) -> Any:
    if isinstance(label, tuple):
        return [label_to_json(x) for x in label]
    return label


# ---------------------------------------------------------------------------
# Union-find
# ---------------------------------------------------------------------------


class DisjointSet:
    """Union-find with path compression and union by rank."""

    def __init__(self, elements: Sequence[Label] = ()):
        self.parent: Dict[Label, Label] = {}
        self.rank: Dict[Label, int] = {}
        for e in elements:
            self.make_set(e)

    def make_set(self, e: Label) -> None:
        if e in self.parent:
            return
        self.parent[e] = e
        self.rank[e] = 0

    def find(self, e: Label) -> Label:
        self.make_set(e)
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, x: Label, y: Label) -> None:
        x_root, y_root = self.find(x), self.find(y)
        if x_root == y_root:
            return
        if self.rank[x_root] < self.rank[y_root]:
            x_root, y_root = y_root, x_root
        self.parent[y_root] = x_root
        if self.rank[x_root] == self.rank[y_root]:
            self.rank[x_root] += 1

    def sets(self) -> FrozenSet[FrozenSet[Label]]:
        groups = collections.defaultdict(set)
        for e in self.parent:
            groups[self.find(e)].add(e)
        return frozenset(frozenset(s) for s in groups.values())

    def sorted(self) -> Tuple[Tuple[Label, ...], ...]:
        """Sorted tuple of sorted tuples edition of sets()."""
        return tuple(sorted((sort_labels(s) for s in self.sets()), key=canonical_key))


# ---------------------------------------------------------------------------
# Towers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tower:
    """
    Levels S_0..S_N with transitions t_n: S_{n+1} -> S_n.

    ``transitions[n][i]`` is the index in level n of the image of the i-th
    label of level n+1.
    """

    levels: Tuple[Tuple[Label, ...], ...]
    transitions: Tuple[Tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.levels:
            raise TowerError("A tower needs at least one level (depth >= 0)")
        if len(self.transitions) != len(self.levels) - 1:
            raise TowerError(
                f"Tower {self.name!r} has {len(self.levels)} levels but "
                f"{len(self.transitions)} transitions; expected one fewer."
            )
        empty = [len(level) == 0 for level in self.levels]
        if any(empty) and not all(empty):
            raise TowerError(
                f"Tower {self.name!r} mixes empty and nonempty levels.\n"
                f"Only the tower with every level empty may have empty levels."
            )
        for n, level in enumerate(self.levels):
            if len(set(level)) != len(level):
                raise TowerError(f"Level {n} of tower {self.name!r} repeats a label")
        for n, targets in enumerate(self.transitions):
            if len(targets) != len(self.levels[n + 1]) or any(
                not 0 <= t < len(self.levels[n]) for t in targets
            ):
                raise TowerError(
                    f"Transition {n + 1} -> {n} of tower {self.name!r} is not a total "
                    f"map from level {n + 1} ({len(self.levels[n + 1])} points) to "
                    f"level {n} ({len(self.levels[n])} points)."
                )

    @classmethod
    def from_maps(
        cls,
        levels: Sequence[Sequence[Label]],
        maps: Sequence[Callable[[Label], Label]],
        name: str = "",
    ) -> "Tower":
        """Build a tower from label lists and transition functions."""
        levels = [sort_labels(level) for level in levels]
        index = [{label: i for i, label in enumerate(level)} for level in levels]
        transitions = []
        for n, t in enumerate(maps):
            try:
                transitions.append(tuple(index[n][t(x)] for x in levels[n + 1]))
            except KeyError as e:
                raise TowerError(
                    f"Transition {n + 1} -> {n} of tower {name!r} sends a point "
                    f"outside level {n}: {e}"
                ) from e
        return cls(tuple(levels), tuple(transitions), name)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def is_empty(self) -> bool:
        return not self.levels[0]

    def level(self, n: int) -> Tuple[Label, ...]:
        self._check_level(n)
        return self.levels[n]

    def _check_level(self, n: int) -> None:
        if not 0 <= n <= self.depth:
            raise TowerError(
                f"Level {n} is outside tower {self.name!r} of depth {self.depth}"
            )

    def index_of(self, n: int, label: Label) -> int:
        return self._indexes[n][label]

    @property
    def _indexes(self) -> List[Dict[Label, int]]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = [{x: i for i, x in enumerate(level)} for level in self.levels]
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def transition(self, n: int, label: Label) -> Label:
        """Apply t_n: S_{n+1} -> S_n."""
        return self.levels[n][self.transitions[n][self.index_of(n + 1, label)]]

    def project(self, source_level: int, target_level: int, label: Label) -> Label:
        """Composite of transitions from ``source_level`` down to ``target_level``."""
        if target_level > source_level:
            raise TowerError(
                f"Cannot project upward from level {source_level} to {target_level}"
            )
        for n in range(source_level - 1, target_level - 1, -1):
            label = self.transition(n, label)
        return label

    def is_surjective_transition(self, n: int) -> bool:
        return len(set(self.transitions[n])) == len(self.levels[n])

    def has_surjective_transitions(self) -> bool:
        return all(self.is_surjective_transition(n) for n in range(self.depth))

    def fiber(self, n: int, label: Label) -> Tuple[Label, ...]:
        """Points of level n+1 over a point of level n."""
        return tuple(x for x in self.levels[n + 1] if self.transition(n, x) == label)

    def to_json(self) -> Dict[str, Any]:
        data = {
            "depth": self.depth,
            "levels": [[label_to_json(x) for x in level] for level in self.levels],
            "transitions": [list(t) for t in self.transitions],
        }
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Tower":
        try:
            levels = tuple(
                tuple(label_from_json(x) for x in level) for level in data["levels"]
            )
            transitions = tuple(tuple(int(t) for t in ts) for ts in data["transitions"])
        except (KeyError, TypeError) as e:
            raise TowerError(
                f"Invalid tower JSON: {e}.\n"
                f'Expected {{"depth": N, "levels": [[...]], "transitions": [[...]]}}.'
            ) from e
        tower = cls(levels, transitions, data.get("name", ""))
        if "depth" in data and int(data["depth"]) != tower.depth:
            raise TowerError(
                f"Tower JSON declares depth {data['depth']} but lists "
                f"{len(levels)} levels"
            )
        return tower


def tower_truncate(tower: Tower, depth: int) -> Tower:
    """The first depth+1 levels."""
    if not 0 <= depth <= tower.depth:
        raise TowerError(f"Cannot truncate a depth-{tower.depth} tower to {depth}")
    return Tower(
        tower.levels[: depth + 1], tower.transitions[:depth], f"{tower.name}|{depth}"
    )


def tower_limit_elements(tower: Tower, n: int) -> Tuple[Label, ...]:
    """Image in S_n of the compatible families available at depth N."""
    tower._check_level(n)
    return sort_labels(
        {tower.project(tower.depth, n, x) for x in tower.levels[tower.depth]}
    )


def sequential_lifts(tower: Tower) -> Dict[int, Dict[Label, Tuple[Label, ...]]]:
    """
    For each level point, a compatible family through it (levels 0..N).

    Lifting goes level by level through nonempty fibers, so this requires
    surjective transitions.
    """
    lifts: Dict[int, Dict[Label, Tuple[Label, ...]]] = {}
    for n, level in enumerate(tower.levels):
        lifts[n] = {}
        for x in level:
            family = [tower.project(n, k, x) for k in range(n + 1)]
            current = x
            for k in range(n, tower.depth):
                fiber = tower.fiber(k, current)
                if not fiber:
                    raise TowerError(
                        f"Point {current!r} at level {k} of {tower.name!r} has an "
                        f"empty fiber; transition {k + 1} -> {k} is not surjective."
                    )
                current = fiber[0]
                family.append(current)
            lifts[n][x] = tuple(family)
    return lifts


def check_sequential_surjectivity(tower: Tower) -> CheckOutcome:
    """
    All transitions surjective, with a lifting witness for every level point.

    On failure the witness names the first non-surjective level.
    """
    for n in range(tower.depth):
        if not tower.is_surjective_transition(n):
            hit = set(tower.transitions[n])
            missing = next(
                x for i, x in enumerate(tower.levels[n]) if i not in hit
            )
            return CheckOutcome.fail(
                tower=tower.name, level=n, missing=label_to_json(missing)
            )
    lifts = sequential_lifts(tower)
    for n, families in lifts.items():
        for x, family in families.items():
            if family[n] != x or any(
                tower.transition(k, family[k + 1]) != family[k]
                for k in range(tower.depth)
            ):
                return CheckOutcome.fail(tower=tower.name, level=n, point=x)
    return CheckOutcome.ok(
        tower=tower.name, lifted_points=sum(len(f) for f in lifts.values())
    )


# ---------------------------------------------------------------------------
# Canonical towers
# ---------------------------------------------------------------------------


def point_tower(depth: int) -> Tower:
    return constant_tower(["*"], depth, "point")


def constant_tower(labels: Sequence[Label], depth: int, name: str = "") -> Tower:
    """A finite discrete set as a tower with identity transitions."""
    labels = sort_labels(labels)
    identity = tuple(range(len(labels)))
    return Tower(
        (labels,) * (depth + 1),
        (identity,) * depth,
        name or f"discrete{len(labels)}",
    )


def canonical_ntilde(depth: int) -> Tower:
    """N ∪ {∞}: level n is {1..n, ∞}; i goes to i for i <= n, else to ∞."""
    if depth < 1:
        raise TowerError(f"canonical_ntilde needs depth >= 1, got {depth}")
    levels = [list(range(1, n + 1)) + [INFINITY] for n in range(depth + 1)]
    maps = [
        (lambda x, n=n: x if x != INFINITY and x <= n else INFINITY)
        for n in range(depth)
    ]
    return Tower.from_maps(levels, maps, "ntilde")


def canonical_cantor(depth: int) -> Tower:
    """{0,1}^N: level n holds the words of length n; transitions forget the last bit."""
    if depth < 1:
        raise TowerError(f"canonical_cantor needs depth >= 1, got {depth}")
    levels = [list(itertools.product((0, 1), repeat=n)) for n in range(depth + 1)]
    maps = [lambda w: w[:-1] for _ in range(depth)]
    return Tower.from_maps(levels, maps, "cantor")


def random_tower(
    rng: random.Random, depth: int, max_size: int, surjective: bool = True
) -> Tower:
    """A seeded random tower with level sizes in [1, max_size]."""
    sizes = [rng.randint(1, max_size)]
    for _ in range(depth):
        low = sizes[-1] if surjective else 1
        sizes.append(rng.randint(low, max(low, max_size)))
    levels = tuple(tuple(range(size)) for size in sizes)
    transitions = []
    for n in range(depth):
        below, above = sizes[n], sizes[n + 1]
        if surjective:
            targets = list(range(below)) + [
                rng.randrange(below) for _ in range(above - below)
            ]
            rng.shuffle(targets)
        else:
            targets = [rng.randrange(below) for _ in range(above)]
        transitions.append(tuple(targets))
    return Tower(levels, tuple(transitions), f"random{depth}")


# ---------------------------------------------------------------------------
# Pro-maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProMap:
    """
    A strict model of a map of pro-objects.

    ``reindex[n]`` is the source level that level n of the target is read
    from, strictly increasing; ``maps[n][i]`` is the target index of the
    image of the i-th point of source level reindex[n].
    """

    source: Tower
    target: Tower
    reindex: Tuple[int, ...]
    maps: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.reindex) != self.target.depth + 1 or len(self.maps) != len(
            self.reindex
        ):
            raise TowerError(
                f"Pro-map {self.source.name!r} -> {self.target.name!r} needs one "
                f"reindex entry and one level map per target level "
                f"({self.target.depth + 1})."
            )
        if any(b <= a for a, b in zip(self.reindex, self.reindex[1:])):
            raise TowerError(f"Reindexing {self.reindex} is not strictly increasing")
        if self.reindex and self.reindex[0] < 0:
            raise TowerError(f"Reindexing {self.reindex} leaves the source tower")
        if self.reindex and self.reindex[-1] > self.source.depth:
            raise TowerError(
                f"Reindexing {self.reindex} reads level {self.reindex[-1]} of a "
                f"depth-{self.source.depth} source"
            )
        for n, level_map in enumerate(self.maps):
            size = len(self.source.levels[self.reindex[n]])
            if len(level_map) != size or any(
                not 0 <= t < len(self.target.levels[n]) for t in level_map
            ):
                raise TowerError(f"Level map {n} of the pro-map is not total")

    @classmethod
    def from_functions(
        cls,
        source: Tower,
        target: Tower,
        fn: Callable[[int, Label], Label],
        reindex: Optional[Sequence[int]] = None,
    ) -> "ProMap":
        """``fn(n, x)`` maps a point x of source level reindex[n] to level n."""
        reindex = tuple(reindex) if reindex is not None else tuple(
            range(target.depth + 1)
        )
        try:
            maps = tuple(
                tuple(
                    target.index_of(n, fn(n, x)) for x in source.levels[reindex[n]]
                )
                for n in range(target.depth + 1)
            )
        except KeyError as e:
            raise TowerError(
                f"Pro-map {source.name!r} -> {target.name!r} sends a point outside "
                f"the target level: {e}"
            ) from e
        return cls(source, target, reindex, maps)

    def apply(self, n: int, label: Label) -> Label:
        """The level map into target level n."""
        i = self.source.index_of(self.reindex[n], label)
        return self.target.levels[n][self.maps[n][i]]

    def commutes(self) -> CheckOutcome:
        """t^B_n o f_{n+1} = f_n o (source transitions from g(n+1) to g(n))."""
        for n in range(self.target.depth):
            for x in self.source.levels[self.reindex[n + 1]]:
                upper = self.target.transition(n, self.apply(n + 1, x))
                below = self.source.project(self.reindex[n + 1], self.reindex[n], x)
                lower = self.apply(n, below)
                if upper != lower:
                    return CheckOutcome.fail(
                        level=n, point=x, via_top=upper, via_bottom=lower
                    )
        return CheckOutcome.ok()

    def is_level_surjective(self) -> bool:
        return all(
            len(set(level_map)) == len(self.target.levels[n])
            for n, level_map in enumerate(self.maps)
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "source": self.source.name,
            "target": self.target.name,
            "reindex": list(self.reindex),
            "maps": [list(m) for m in self.maps],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any], source: Tower, target: Tower) -> "ProMap":
        try:
            reindex = tuple(int(g) for g in data["reindex"])
            maps = tuple(tuple(int(t) for t in m) for m in data["maps"])
        except (KeyError, TypeError) as e:
            raise TowerError(f"Invalid pro-map JSON: {e}") from e
        promap = cls(source, target, reindex, maps)
        outcome = promap.commutes()
        if not outcome:
            raise TowerError(
                f"Pro-map JSON does not commute with transitions: {outcome.witness}"
            )
        return promap


def promap_identity(tower: Tower) -> ProMap:
    return ProMap.from_functions(tower, tower, lambda n, x: x)


def promap_compose(first: ProMap, second: ProMap) -> ProMap:
    """``second`` after ``first``: reindex g_first o g_second."""
    if first.target != second.source:
        raise TowerError(
            f"Cannot compose pro-maps: {first.target.name!r} is not "
            f"{second.source.name!r}"
        )
    reindex = tuple(first.reindex[k] for k in second.reindex)
    return ProMap.from_functions(
        first.source,
        second.target,
        lambda n, x: second.apply(n, first.apply(second.reindex[n], x)),
        reindex,
    )


def promaps_equal(f: ProMap, g: ProMap) -> bool:
    """Equality after reading both at the common cofinal level max(g_f, g_g)."""
    if f.source != g.source or f.target != g.target:
        return False
    for n in range(f.target.depth + 1):
        top = max(f.reindex[n], g.reindex[n])
        for x in f.source.levels[top]:
            left = f.apply(n, f.source.project(top, f.reindex[n], x))
            right = g.apply(n, g.source.project(top, g.reindex[n], x))
            if left != right:
                return False
    return True


def shift_map(tower: Tower) -> ProMap:
    """The pro-map T -> T|_{N-1} reading level n from level n+1; it equals
    the truncation in the pro-category."""
    target = tower_truncate(tower, tower.depth - 1)
    return ProMap.from_functions(
        tower,
        target,
        lambda n, x: tower.transition(n, x),
        tuple(range(1, tower.depth + 1)),
    )


def truncation_map(tower: Tower, depth: int) -> ProMap:
    target = tower_truncate(tower, depth)
    return ProMap.from_functions(tower, target, lambda n, x: x)


def level_map_to_constant(
    tower: Tower, labels: Sequence[Label], fn: Callable[[Label], Label], level: int = 0
) -> ProMap:
    """A pro-map into a discrete set K, factoring through level ``level``."""
    target = constant_tower(labels, tower.depth - level)
    return ProMap.from_functions(
        tower,
        target,
        lambda n, x: fn(tower.project(n + level, level, x)),
        tuple(range(level, tower.depth + 1)),
    )


# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------


def tower_product(left: Tower, right: Tower) -> Tower:
    """Levelwise product up to the common depth."""
    depth = min(left.depth, right.depth)
    levels = [
        list(itertools.product(left.levels[n], right.levels[n]))
        for n in range(depth + 1)
    ]
    maps = [
        (lambda pair, n=n: (left.transition(n, pair[0]), right.transition(n, pair[1])))
        for n in range(depth)
    ]
    return Tower.from_maps(levels, maps, f"({left.name}x{right.name})")


@dataclass(frozen=True)
class FiberProduct:
    """A levelwise fiber product with its two projections."""

    tower: Tower
    left: ProMap
    right: ProMap
    f: ProMap
    g: ProMap


def tower_fiber_product(f: ProMap, g: ProMap) -> FiberProduct:
    """
    A ×_C B for pro-maps f: A -> C and g: B -> C.

    Level n pairs points of A_{g_f(n)} and B_{g_g(n)} with equal images in C_n.
    Projections read level k of A (or B) from level k of the fiber product.
    """
    if f.target != g.target:
        raise TowerError(
            f"Fiber product needs a common target, got {f.target.name!r} and "
            f"{g.target.name!r}"
        )
    base = f.target
    depth = base.depth
    if depth > f.source.depth or depth > g.source.depth:
        raise TowerError(
            f"Fiber product over a depth-{depth} tower needs sources at least that "
            f"deep; got depths {f.source.depth} and {g.source.depth}"
        )
    levels = [
        [
            (a, b)
            for a in f.source.levels[f.reindex[n]]
            for b in g.source.levels[g.reindex[n]]
            if f.apply(n, a) == g.apply(n, b)
        ]
        for n in range(depth + 1)
    ]
    maps = [
        (
            lambda pair, n=n: (
                f.source.project(f.reindex[n + 1], f.reindex[n], pair[0]),
                g.source.project(g.reindex[n + 1], g.reindex[n], pair[1]),
            )
        )
        for n in range(depth)
    ]
    tower = Tower.from_maps(
        levels, maps, f"({f.source.name}x_{base.name}{g.source.name})"
    )
    left_target = tower_truncate(f.source, depth)
    right_target = tower_truncate(g.source, depth)
    left = ProMap.from_functions(
        tower, left_target, lambda n, pair: f.source.project(f.reindex[n], n, pair[0])
    )
    right = ProMap.from_functions(
        tower, right_target, lambda n, pair: g.source.project(g.reindex[n], n, pair[1])
    )
    return FiberProduct(tower, left, right, f, g)


def _all_maps(domain: Sequence[Label], codomain: Sequence[Label]) -> Iterator[Tuple]:
    return itertools.product(codomain, repeat=len(domain))


def fiber_product_universal_check(
    product: FiberProduct, cone_sizes: Sequence[int] = (1, 2)
) -> CheckOutcome:
    """
    At every level, each commuting cone from a test set of the given sizes
    factors through the fiber product exactly once.
    """
    f, g, tower = product.f, product.g, product.tower
    for n in range(tower.depth + 1):
        a_level = f.source.levels[f.reindex[n]]
        b_level = g.source.levels[g.reindex[n]]
        p_level = tower.levels[n]
        for size in cone_sizes:
            domain = range(size)
            for u in _all_maps(domain, a_level):
                for v in _all_maps(domain, b_level):
                    if any(f.apply(n, u[z]) != g.apply(n, v[z]) for z in domain):
                        continue
                    factorizations = sum(
                        1
                        for w in _all_maps(domain, p_level)
                        if all(w[z] == (u[z], v[z]) for z in domain)
                    )
                    if factorizations != 1:
                        return CheckOutcome.fail(
                            level=n,
                            cone=[list(u), list(v)],
                            factorizations=factorizations,
                        )
    return CheckOutcome.ok()


def cantor_surjection(tower: Tower) -> ProMap:
    """
    A level-surjective pro-map from a Cantor tower onto a tower with
    surjective transitions.

    Level k of the target is read from binary words of length L_k, where each
    step adds enough bits to index the largest fiber.
    """
    if tower.is_empty() or not tower.has_surjective_transitions():
        raise TowerError(
            f"cantor_surjection needs a nonempty tower with surjective transitions; "
            f"{tower.name!r} does not qualify."
        )

    def bits_for(count: int) -> int:
        return max(1, math.ceil(math.log2(count))) if count > 1 else 1

    widths = [bits_for(len(tower.levels[0]))]
    for n in range(tower.depth):
        largest = max(len(tower.fiber(n, x)) for x in tower.levels[n])
        widths.append(bits_for(largest))
    lengths = list(itertools.accumulate(widths))
    cantor = canonical_cantor(lengths[-1])

    def read(k: int, word: Tuple[int, ...]) -> Label:
        start = lengths[k - 1] if k else 0
        chunk = word[start : lengths[k]]
        index = int("".join(map(str, chunk)), 2)
        options = tower.levels[0] if k == 0 else tower.fiber(k - 1, read(k - 1, word))
        return options[min(index, len(options) - 1)]

    return ProMap.from_functions(cantor, tower, read, tuple(lengths))


# ---------------------------------------------------------------------------
# Quotient presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientLevel:
    """S_n / R_n with its canonical surjection (classes named by least member)."""

    level: int
    classes: Tuple[Label, ...]
    projection: Dict[Label, Label] = field(compare=False)

    def __len__(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class EquivRelPresentation:
    """
    A tower S with an equivalence relation R_n ⊂ S_n × S_n at each level.

    Relations come either from a relation tower with two pro-maps or from
    explicit identified pairs closed under union-find.
    """

    tower: Tower
    relation: Tuple[FrozenSet[Tuple[Label, Label]], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.relation) != self.tower.depth + 1:
            raise PresentationError(
                f"Presentation {self.name!r} lists relations for {len(self.relation)} "
                f"levels; the tower has {self.tower.depth + 1}."
            )

    @classmethod
    def from_generating_pairs(
        cls,
        tower: Tower,
        pairs: Sequence[Sequence[Tuple[Label, Label]]],
        name: str = "",
    ) -> "EquivRelPresentation":
        """Equivalence closure of identified pairs, level by level."""
        relation = []
        for n, level in enumerate(tower.levels):
            ds = DisjointSet(level)
            for a, b in pairs[n] if n < len(pairs) else ():
                if a not in ds.parent or b not in ds.parent:
                    raise PresentationError(
                        f"Identified pair ({a!r}, {b!r}) is not in level {n} of "
                        f"{tower.name!r}"
                    )
                ds.union(a, b)
            relation.append(
                frozenset((a, b) for cls_ in ds.sets() for a in cls_ for b in cls_)
            )
        return cls(tower, tuple(relation), name)

    @classmethod
    def from_relation_tower(
        cls, r1: ProMap, r2: ProMap, name: str = ""
    ) -> "EquivRelPresentation":
        """Image of (r1, r2): R -> S x S, level by level."""
        if (r1.source, r1.target, r1.reindex) != (r2.source, r2.target, r2.reindex):
            raise PresentationError(
                "Relation pro-maps must share source, target and reindexing"
            )
        tower = r1.target
        relation = tuple(
            frozenset(
                (r1.apply(n, x), r2.apply(n, x))
                for x in r1.source.levels[r1.reindex[n]]
            )
            for n in range(tower.depth + 1)
        )
        return cls(tower, relation, name)

    def check_equivalence(self, n: int) -> CheckOutcome:
        rel = self.relation[n]
        level = self.tower.levels[n]
        for a in level:
            if (a, a) not in rel:
                return CheckOutcome.fail(level=n, property="reflexive", point=a)
        for a, b in rel:
            if (b, a) not in rel:
                return CheckOutcome.fail(level=n, property="symmetric", pair=[a, b])
        related = collections.defaultdict(set)
        for a, b in rel:
            related[a].add(b)
        for a, b in rel:
            missing = related[b] - related[a]
            if missing:
                c = sort_labels(missing)[0]
                return CheckOutcome.fail(
                    level=n, property="transitive", triple=[a, b, c]
                )
        return CheckOutcome.ok()

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "tower": self.tower.to_json(),
            "relation": [
                sorted(
                    ([label_to_json(a), label_to_json(b)] for a, b in level if a != b),
                    key=canonical_key,
                )
                for level in self.relation
            ],
        }


def quotient_presentation(presentation: EquivRelPresentation, n: int) -> QuotientLevel:
    """S_n / R_n as a finite set with the canonical surjection."""
    presentation.tower._check_level(n)
    outcome = presentation.check_equivalence(n)
    if not outcome:
        raise PresentationError(
            f"Relation of {presentation.name!r} is not an equivalence at level {n}: "
            f"{outcome.witness}"
        )
    related = collections.defaultdict(list)
    for a, b in presentation.relation[n]:
        related[a].append(b)
    projection = {
        a: min(related[a], key=canonical_key) for a in presentation.tower.levels[n]
    }
    classes = sort_labels(set(projection.values()))
    return QuotientLevel(n, classes, projection)


def union_find_quotient(
    labels: Sequence[Label], pairs: Sequence[Tuple[Label, Label]]
) -> Tuple[Tuple[Label, ...], ...]:
    """Independent oracle: the classes generated by identified pairs."""
    ds = DisjointSet(labels)
    for a, b in pairs:
        ds.union(a, b)
    return ds.sorted()


def quotient_tower(presentation: EquivRelPresentation) -> Tower:
    """
    The tower of quotient levels, when the relation respects transitions.

    Raises PresentationError naming the first related pair whose images are
    unrelated one level down.
    """
    tower = presentation.tower
    for n in range(tower.depth):
        lower = presentation.relation[n]
        for a, b in sorted(presentation.relation[n + 1], key=canonical_key):
            pair = (tower.transition(n, a), tower.transition(n, b))
            if pair not in lower:
                raise PresentationError(
                    f"Presentation {presentation.name!r} is not transition-compatible: "
                    f"{a!r} ~ {b!r} at level {n + 1} but their images {pair[0]!r} and "
                    f"{pair[1]!r} are not related at level {n}."
                )
    quotients = [quotient_presentation(presentation, n) for n in range(tower.depth + 1)]
    maps = [
        (
            lambda c, n=n: quotients[n].projection[tower.transition(n, c)]
        )
        for n in range(tower.depth)
    ]
    return Tower.from_maps(
        [q.classes for q in quotients], maps, f"{tower.name}/{presentation.name}"
    )


def presentation_from_map(f: ProMap, name: str = "") -> EquivRelPresentation:
    """R = S ×_K S for a pro-map f: S -> K with identity reindexing."""
    if f.reindex != tuple(range(f.target.depth + 1)):
        raise PresentationError("presentation_from_map needs identity reindexing")
    source = tower_truncate(f.source, f.target.depth)
    relation = tuple(
        frozenset(
            (a, b)
            for a in source.levels[n]
            for b in source.levels[n]
            if f.apply(n, a) == f.apply(n, b)
        )
        for n in range(source.depth + 1)
    )
    return EquivRelPresentation(source, relation, name or f"ker({f.target.name})")


def dyadic_identified_pairs(
    word_length: int,
) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Pairs w01^k ~ w10^k (k >= 1) among binary words of the given length."""
    pairs = []
    for k in range(1, word_length):
        for w in itertools.product((0, 1), repeat=word_length - 1 - k):
            pairs.append((w + (0,) + (1,) * k, w + (1,) + (0,) * k))
    return pairs


def dyadic_interval_presentation(depth: int) -> EquivRelPresentation:
    """The interval as a levelwise quotient of the Cantor tower."""
    cantor = canonical_cantor(depth)
    pairs = [dyadic_identified_pairs(n) for n in range(depth + 1)]
    return EquivRelPresentation.from_generating_pairs(cantor, pairs, "dyadic")


# ---------------------------------------------------------------------------
# Locally constant functions
# ---------------------------------------------------------------------------


def cont_functions(tower: Tower, n: int, p: int, m: int) -> FunctionRing:
    """Functions S_n -> Z/p^m (F_p when m = 1)."""
    return FunctionRing(tower.level(n), p, m)


def inflation(tower: Tower, n: int, p: int, m: int) -> Callable:
    """Cont(S_n, -) -> Cont(S_{n+1}, -), f -> f o t_n."""
    source = cont_functions(tower, n, p, m)
    target = cont_functions(tower, n + 1, p, m)

    def inflate(f):
        return tuple(
            source.evaluate(f, tower.transition(n, x)) for x in target.domain
        )

    return inflate
