"""
Exact arithmetic kernel: residue rings Z/p^m, function rings, integer
polynomials with exact division, and the finite-ring contract shared by
every other module.
"""

import itertools
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

from sympy import isprime
from sympy.polys.domains import ZZ
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import ring as polynomial_ring

logger = logging.getLogger(__name__)

Element = Hashable


class AlgebraError(ValueError):
    """Invalid ring data or an operation outside a ring's contract."""


class ModulusMismatchError(AlgebraError):
    """Operands carry different (p, m) parameters."""


class DivisibilityError(ArithmeticError):
    """An exact division by p was requested on a non-divisible value."""


@lru_cache(maxsize=None)
def _is_prime(p: int) -> bool:
    return p >= 2 and bool(isprime(p))


def validate_prime(p: int) -> int:
    """Return p unchanged if it is a prime, raise otherwise."""
    if not isinstance(p, int) or isinstance(p, bool) or not _is_prime(p):
        raise AlgebraError(
            f"Invalid prime: {p!r}.\n"
            f"All p-adic data is defined relative to a fixed prime p >= 2."
        )
    return p


def canonical_key(value: Any) -> Any:
    """Sort key giving a deterministic order on ring elements of any kind."""
    if isinstance(value, ResidueInt):
        return (0, value.value)
    if isinstance(value, bool):
        return (1, int(value))
    if isinstance(value, int):
        return (1, value)
    if isinstance(value, str):
        return (2, value)
    if isinstance(value, (tuple, list)):
        return (3, tuple(canonical_key(v) for v in value))
    components = getattr(value, "components", None)
    if components is not None:
        return (4, tuple(canonical_key(v) for v in components))
    return (5, repr(value))


def jsonable(value: Any) -> Any:
    """Convert ring elements and containers into plain JSON data."""
    if isinstance(value, ResidueInt):
        return value.value
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (tuple, list)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((jsonable(v) for v in value), key=canonical_key)
    components = getattr(value, "components", None)
    if components is not None:
        return [jsonable(v) for v in components]
    return repr(value)


@dataclass(frozen=True)
class CheckOutcome:
    """
    Result of a mechanical verification.

    Failures are data, not exceptions: ``witness`` carries the first
    counterexample, or constructive evidence for checks that produce it.
    """

    passed: bool
    witness: Optional[Dict[str, Any]] = None

    @classmethod
    def ok(cls, **evidence: Any) -> "CheckOutcome":
        return cls(True, jsonable(evidence) if evidence else None)

    @classmethod
    def fail(cls, **witness: Any) -> "CheckOutcome":
        return cls(False, jsonable(witness))

    def __bool__(self) -> bool:
        return self.passed


def first_failure(outcomes: Iterator["CheckOutcome"]) -> "CheckOutcome":
    """Combine outcomes, stopping at the first failure."""
    for outcome in outcomes:
        if not outcome.passed:
            return outcome
    return CheckOutcome.ok()


# ---------------------------------------------------------------------------
# Residues modulo p^m
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidueInt:
    """An integer modulo p^m stored by its canonical representative."""

    value: int
    p: int
    m: int

    def __post_init__(self):
        validate_prime(self.p)
        if self.m < 1:
            raise AlgebraError(
                f"Invalid precision m={self.m} for a residue modulo {self.p}^m.\n"
                f"The zero ring (m=0) is excluded; precision must be at least 1."
            )
        if not 0 <= self.value < self.p**self.m:
            raise AlgebraError(
                f"Residue value {self.value} is not canonical modulo "
                f"{self.p}^{self.m}; use ResidueInt.of() to reduce it."
            )

    @classmethod
    def of(cls, value: int, p: int, m: int) -> "ResidueInt":
        """Build a residue from any integer, reducing it modulo p^m."""
        return cls(value % p**m, p, m)

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def _check(self, other: "ResidueInt") -> None:
        if not isinstance(other, ResidueInt):
            raise TypeError(f"Cannot combine a residue with {type(other).__name__}")
        if (self.p, self.m) != (other.p, other.m):
            raise ModulusMismatchError(
                f"Modulus mismatch: {self.p}^{self.m} vs {other.p}^{other.m}.\n"
                f"Cross-precision arithmetic requires an explicit truncate()."
            )

    def __add__(self, other: "ResidueInt") -> "ResidueInt":
        self._check(other)
        return ResidueInt.of(self.value + other.value, self.p, self.m)

    def __sub__(self, other: "ResidueInt") -> "ResidueInt":
        self._check(other)
        return ResidueInt.of(self.value - other.value, self.p, self.m)

    def __mul__(self, other: "ResidueInt") -> "ResidueInt":
        self._check(other)
        return ResidueInt.of(self.value * other.value, self.p, self.m)

    def __neg__(self) -> "ResidueInt":
        return ResidueInt.of(-self.value, self.p, self.m)

    def __pow__(self, exponent: int) -> "ResidueInt":
        if exponent < 0:
            raise AlgebraError("Negative powers are not supported on residues")
        return ResidueInt(pow(self.value, exponent, self.modulus), self.p, self.m)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidueInt):
            return NotImplemented
        self._check(other)
        return self.value == other.value

    def __hash__(self) -> int:
        return hash((self.value, self.p, self.m))

    def __repr__(self) -> str:
        return f"{self.value} mod {self.p}^{self.m}"

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def truncate(self, m: int) -> "ResidueInt":
        """Reduce to a lower precision m (1 <= m <= self.m)."""
        if not 1 <= m <= self.m:
            raise AlgebraError(
                f"Cannot truncate {self!r} to precision {m}; "
                f"target precision must lie in [1, {self.m}]."
            )
        return ResidueInt.of(self.value, self.p, m)

    def to_json(self) -> Dict[str, int]:
        return {"p": self.p, "m": self.m, "value": self.value}

    @classmethod
    def from_json(cls, data: Dict[str, int]) -> "ResidueInt":
        try:
            return cls(int(data["value"]), int(data["p"]), int(data["m"]))
        except KeyError as e:
            raise AlgebraError(
                f"Invalid ResidueInt JSON {data!r}: missing key {e}.\n"
                f'Expected the form {{"p": 2, "m": 3, "value": 5}}.'
            ) from e


def residue_arith(a: ResidueInt, b: ResidueInt, op: str) -> ResidueInt:
    """Apply op in {"add", "sub", "mul"} to two residues of the same modulus."""
    operations: Dict[str, Callable[[ResidueInt, ResidueInt], ResidueInt]] = {
        "add": ResidueInt.__add__,
        "sub": ResidueInt.__sub__,
        "mul": ResidueInt.__mul__,
    }
    if op not in operations:
        raise AlgebraError(f"Unknown residue operation {op!r}; use add, sub or mul")
    return operations[op](a, b)


# ---------------------------------------------------------------------------
# The finite ring contract
# ---------------------------------------------------------------------------


class FiniteRing(ABC):
    """
    Contract for the finite commutative rings used throughout the library.

    Elements are plain hashable values owned by the ring object, so rings can
    be enumerated, used as dictionary keys and compared structurally.
    p-adically truncated rings additionally report a precision and can lower
    data to precision m-1, which is where divisions by p land.
    """

    p: int

    @abstractmethod
    def zero(self) -> Element: ...

    @abstractmethod
    def one(self) -> Element: ...

    @abstractmethod
    def add(self, a: Element, b: Element) -> Element: ...

    @abstractmethod
    def neg(self, a: Element) -> Element: ...

    @abstractmethod
    def mul(self, a: Element, b: Element) -> Element: ...

    @abstractmethod
    def elements(self) -> Iterator[Element]: ...

    @abstractmethod
    def describe(self) -> str: ...

    def sub(self, a: Element, b: Element) -> Element:
        return self.add(a, self.neg(b))

    def from_int(self, k: int) -> Element:
        result, base = self.zero(), self.one()
        if k < 0:
            k, base = -k, self.neg(base)
        while k:
            if k & 1:
                result = self.add(result, base)
            base = self.add(base, base)
            k >>= 1
        return result

    def scale(self, k: int, a: Element) -> Element:
        return self.mul(self.from_int(k), a)

    def pow(self, a: Element, exponent: int) -> Element:
        result = self.one()
        while exponent:
            if exponent & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            exponent >>= 1
        return result

    def size(self) -> int:
        return sum(1 for _ in self.elements())

    def sorted_elements(self) -> List[Element]:
        return sorted(self.elements(), key=canonical_key)

    def contains(self, a: Element) -> bool:
        return a in self.element_set

    @cached_property
    def element_set(self) -> FrozenSet[Element]:
        return frozenset(self.elements())

    def element_to_json(self, a: Element) -> Any:
        return a

    def element_from_json(self, data: Any) -> Element:
        return data

    # p-adic truncation -----------------------------------------------------

    @property
    def precision(self) -> Optional[int]:
        """Precision m when the ring is a truncation at p^m, else None."""
        return None

    def lowered(self) -> "FiniteRing":
        raise AlgebraError(
            f"{self.describe()} carries no p-adic precision to lower.\n"
            f"Precision lowering is defined for Z/p^m, function rings and Witt "
            f"vectors over F_p-algebras."
        )

    def lower(self, a: Element) -> Element:
        raise AlgebraError(f"{self.describe()} does not support precision lowering")

    def divide_by_p(self, a: Element) -> Element:
        """
        Return y/p as an element of the lowered ring.

        The generic rule tabulates multiplication by p once and refuses values
        with no preimage or whose preimages disagree after lowering.
        """
        candidates = self._p_division_table.get(a)
        if not candidates:
            raise DivisibilityError(
                f"{a!r} is not divisible by p={self.p} in {self.describe()}"
            )
        if len(candidates) > 1:
            raise DivisibilityError(
                f"Division of {a!r} by p={self.p} in {self.describe()} is not "
                f"determined at precision {self.lowered().precision}: "
                f"{len(candidates)} distinct quotients."
            )
        return next(iter(candidates))

    @cached_property
    def _p_division_table(self) -> Dict[Element, set]:
        table: Dict[Element, set] = {}
        for z in self.elements():
            table.setdefault(self.scale(self.p, z), set()).add(self.lower(z))
        logger.debug("Tabulated division by p on %s", self.describe())
        return table


# ---------------------------------------------------------------------------
# Concrete rings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidueRing(FiniteRing):
    """The ring Z/p^m with ResidueInt elements."""

    p: int
    m: int

    def __post_init__(self):
        validate_prime(self.p)
        if self.m < 1:
            raise AlgebraError(
                f"Invalid precision m={self.m}: the zero ring Z/{self.p}^0 is "
                f"excluded at construction."
            )

    @property
    def modulus(self) -> int:
        return self.p**self.m

    def element(self, value: int) -> ResidueInt:
        return ResidueInt.of(value, self.p, self.m)

    def zero(self) -> ResidueInt:
        return self.element(0)

    def one(self) -> ResidueInt:
        return self.element(1)

    def add(self, a: ResidueInt, b: ResidueInt) -> ResidueInt:
        return a + b

    def neg(self, a: ResidueInt) -> ResidueInt:
        return -a

    def mul(self, a: ResidueInt, b: ResidueInt) -> ResidueInt:
        return a * b

    def from_int(self, k: int) -> ResidueInt:
        return self.element(k)

    def pow(self, a: ResidueInt, exponent: int) -> ResidueInt:
        return a**exponent

    def elements(self) -> Iterator[ResidueInt]:
        return (self.element(v) for v in range(self.modulus))

    def size(self) -> int:
        return self.modulus

    def describe(self) -> str:
        return f"Z/{self.p}^{self.m}"

    def teichmuller(self, a: int) -> ResidueInt:
        """Multiplicative lift of a mod p, computed as a^(p^(m-1))."""
        value = pow(a % self.p, self.p ** (self.m - 1), self.modulus)
        return ResidueInt(value, self.p, self.m)

    def element_to_json(self, a: ResidueInt) -> int:
        return a.value

    def element_from_json(self, data: Any) -> ResidueInt:
        return self.element(int(data))

    @property
    def precision(self) -> int:
        return self.m

    def lowered(self) -> "ResidueRing":
        if self.m < 2:
            raise AlgebraError(f"{self.describe()} has no lower precision to reach")
        return ResidueRing(self.p, self.m - 1)

    def lower(self, a: ResidueInt) -> ResidueInt:
        return a.truncate(self.m - 1)

    def divide_by_p(self, a: ResidueInt) -> ResidueInt:
        return exact_div_p(a, self.p)


@dataclass(frozen=True)
class FunctionRing(FiniteRing):
    """
    Functions from a finite set to Z/p^m with pointwise operations.

    Elements are tuples of ResidueInt indexed like ``domain``. The empty
    domain gives the zero ring, which appears as the dual of an empty set.
    """

    domain: Tuple[Hashable, ...]
    p: int
    m: int

    def __post_init__(self):
        validate_prime(self.p)
        if self.m < 1:
            raise AlgebraError(
                f"Invalid precision m={self.m} for functions into Z/{self.p}^m"
            )
        if len(set(self.domain)) != len(self.domain):
            raise AlgebraError(
                f"Function ring domain has repeated points: {self.domain}"
            )

    @property
    def codomain(self) -> ResidueRing:
        return ResidueRing(self.p, self.m)

    def function(self, values: Sequence[int]) -> Tuple[ResidueInt, ...]:
        if len(values) != len(self.domain):
            raise AlgebraError(
                f"Expected {len(self.domain)} values for a function on "
                f"{self.domain}, got {len(values)}"
            )
        return tuple(self.codomain.element(v) for v in values)

    def constant(self, value: int) -> Tuple[ResidueInt, ...]:
        return self.function([value] * len(self.domain))

    def indicator(self, point: Hashable) -> Tuple[ResidueInt, ...]:
        return self.function([1 if s == point else 0 for s in self.domain])

    def evaluate(self, f: Tuple[ResidueInt, ...], point: Hashable) -> ResidueInt:
        return f[self.domain.index(point)]

    def zero(self) -> Tuple[ResidueInt, ...]:
        return self.constant(0)

    def one(self) -> Tuple[ResidueInt, ...]:
        return self.constant(1)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def mul(self, a, b):
        return tuple(x * y for x, y in zip(a, b))

    def from_int(self, k: int):
        return self.constant(k)

    def elements(self) -> Iterator[Tuple[ResidueInt, ...]]:
        values = list(self.codomain.elements())
        return (tuple(f) for f in itertools.product(values, repeat=len(self.domain)))

    def size(self) -> int:
        return self.codomain.modulus ** len(self.domain)

    def is_unit(self, f: Tuple[ResidueInt, ...]) -> bool:
        return all(x.is_unit() for x in f)

    def describe(self) -> str:
        return f"Cont({{{', '.join(map(str, self.domain))}}}, Z/{self.p}^{self.m})"

    def element_to_json(self, a) -> List[int]:
        return [x.value for x in a]

    def element_from_json(self, data: Any):
        return self.function([int(v) for v in data])

    @property
    def precision(self) -> int:
        return self.m

    def lowered(self) -> "FunctionRing":
        if self.m < 2:
            raise AlgebraError(f"{self.describe()} has no lower precision to reach")
        return FunctionRing(self.domain, self.p, self.m - 1)

    def lower(self, a):
        return tuple(x.truncate(self.m - 1) for x in a)

    def divide_by_p(self, a):
        return tuple(exact_div_p(x, self.p) for x in a)


@dataclass(frozen=True)
class SubRing(FiniteRing):
    """A subring of a finite ring given by its (closed) element set."""

    parent: FiniteRing
    members: FrozenSet[Element]

    @property
    def p(self) -> int:
        return self.parent.p

    def zero(self):
        return self.parent.zero()

    def one(self):
        return self.parent.one()

    def add(self, a, b):
        return self.parent.add(a, b)

    def neg(self, a):
        return self.parent.neg(a)

    def mul(self, a, b):
        return self.parent.mul(a, b)

    def elements(self) -> Iterator[Element]:
        return iter(sorted(self.members, key=canonical_key))

    def size(self) -> int:
        return len(self.members)

    def describe(self) -> str:
        return f"subring of {self.parent.describe()} with {len(self.members)} elements"

    def element_to_json(self, a):
        return self.parent.element_to_json(a)

    @property
    def precision(self) -> Optional[int]:
        return self.parent.precision

    def lowered(self) -> "SubRing":
        return self._lowered

    @cached_property
    def _lowered(self) -> "SubRing":
        lower = self.parent.lower
        return SubRing(self.parent.lowered(), frozenset(map(lower, self.members)))

    def lower(self, a):
        return self.parent.lower(a)


@dataclass(frozen=True)
class QuotientRing(FiniteRing):
    """
    The quotient of a finite ring by an ideal.

    Cosets are represented by their least member under canonical_key.
    """

    parent: FiniteRing
    ideal: FrozenSet[Element]

    @property
    def p(self) -> int:
        return self.parent.p

    @cached_property
    def _representative(self) -> Dict[Element, Element]:
        reps: Dict[Element, Element] = {}
        for x in self.parent.sorted_elements():
            if x in reps:
                continue
            for i in self.ideal:
                reps[self.parent.add(x, i)] = x
        return reps

    def project(self, a: Element) -> Element:
        """The canonical surjection from the parent ring."""
        return self._representative[a]

    def zero(self):
        return self.project(self.parent.zero())

    def one(self):
        return self.project(self.parent.one())

    def add(self, a, b):
        return self.project(self.parent.add(a, b))

    def neg(self, a):
        return self.project(self.parent.neg(a))

    def mul(self, a, b):
        return self.project(self.parent.mul(a, b))

    def elements(self) -> Iterator[Element]:
        return iter(sorted(set(self._representative.values()), key=canonical_key))

    def size(self) -> int:
        return self.parent.size() // len(self.ideal)

    def describe(self) -> str:
        return f"{self.parent.describe()} / ideal of size {len(self.ideal)}"

    def element_to_json(self, a):
        return self.parent.element_to_json(a)

    @property
    def precision(self) -> Optional[int]:
        return self.parent.precision

    def lowered(self) -> "QuotientRing":
        return self._lowered

    @cached_property
    def _lowered(self) -> "QuotientRing":
        lower = self.parent.lower
        return QuotientRing(self.parent.lowered(), frozenset(map(lower, self.ideal)))

    def lower(self, a):
        return self.lowered().project(self.parent.lower(a))


# ---------------------------------------------------------------------------
# Closures and homomorphisms of finite rings
# ---------------------------------------------------------------------------


def additive_closure(ring: FiniteRing, seeds: Sequence[Element]) -> FrozenSet[Element]:
    """Smallest additive subgroup containing the seeds."""
    group = {ring.zero()}
    for s in seeds:
        frontier = set(group)
        while True:
            frontier = {ring.add(g, s) for g in frontier} - group
            if not frontier:
                break
            group |= frontier
    return frozenset(group)


def ideal_closure(
    ring: FiniteRing, generators: Sequence[Element]
) -> FrozenSet[Element]:
    """The ideal generated by the given elements."""
    products = [ring.mul(r, g) for g in generators for r in ring.elements()]
    return additive_closure(ring, products)


def subring_closure(
    ring: FiniteRing, generators: Sequence[Element]
) -> FrozenSet[Element]:
    """The subring generated by the given elements (and 1)."""
    members = {ring.zero(), ring.one(), *generators}
    changed = True
    while changed:
        changed = False
        current = list(members)
        for a in current:
            for b in current:
                for c in (ring.add(a, b), ring.mul(a, b)):
                    if c not in members:
                        members.add(c)
                        changed = True
    return frozenset(members)


def ring_generators(ring: FiniteRing) -> Tuple[Element, ...]:
    """A greedy generating set, scanning elements in canonical order."""
    generators: List[Element] = []
    span = subring_closure(ring, generators)
    for x in ring.sorted_elements():
        if x not in span:
            generators.append(x)
            span = subring_closure(ring, generators)
    return tuple(generators)


def extend_to_homomorphism(
    source: FiniteRing,
    target: FiniteRing,
    generators: Sequence[Element],
    images: Sequence[Element],
) -> Optional[Dict[Element, Element]]:
    """
    Extend an assignment on generators to a unital ring map, if one exists.

    Returns the full element table, or None when the assignment conflicts with
    sums or products.
    """
    mapping: Dict[Element, Element] = {
        source.zero(): target.zero(),
        source.one(): target.one(),
    }
    for g, image in zip(generators, images):
        if mapping.setdefault(g, image) != image:
            return None
    changed = True
    while changed:
        changed = False
        current = list(mapping.items())
        for a, fa in current:
            for b, fb in current:
                for value, image in (
                    (source.add(a, b), target.add(fa, fb)),
                    (source.mul(a, b), target.mul(fa, fb)),
                ):
                    known = mapping.get(value)
                    if known is None:
                        mapping[value] = image
                        changed = True
                    elif known != image:
                        return None
    return mapping


def ring_homomorphisms(
    source: FiniteRing,
    target: FiniteRing,
    generators: Optional[Sequence[Element]] = None,
) -> List[Dict[Element, Element]]:
    """All unital ring maps source -> target, as element tables."""
    if generators is None:
        generators = ring_generators(source)
    generators = tuple(generators)
    targets = target.sorted_elements()
    found = []
    for images in itertools.product(targets, repeat=len(generators)):
        mapping = extend_to_homomorphism(source, target, generators, images)
        if mapping is not None:
            found.append(mapping)
    logger.debug(
        "Enumerated %d ring maps %s -> %s from %d generators",
        len(found),
        source.describe(),
        target.describe(),
        len(generators),
    )
    return found


def check_ring_axioms(
    ring: FiniteRing,
    pairs: Iterable[Tuple[Element, Element]],
    triples: Iterable[Tuple[Element, Element, Element]],
) -> CheckOutcome:
    """
    Commutative unital ring laws on the given pairs and triples.

    Identities and inverses are checked on every element.
    """
    zero, one = ring.zero(), ring.one()
    for a in ring.elements():
        if ring.add(a, zero) != a or ring.mul(a, one) != a:
            return CheckOutcome.fail(law="identity", a=a, ring=ring.describe())
        if ring.add(a, ring.neg(a)) != zero:
            return CheckOutcome.fail(law="inverse", a=a, ring=ring.describe())
    for a, b in pairs:
        if ring.add(a, b) != ring.add(b, a) or ring.mul(a, b) != ring.mul(b, a):
            return CheckOutcome.fail(law="commutative", a=a, b=b, ring=ring.describe())
    count = 0
    for a, b, c in triples:
        count += 1
        if ring.add(ring.add(a, b), c) != ring.add(a, ring.add(b, c)):
            return CheckOutcome.fail(law="add associative", a=a, b=b, c=c)
        if ring.mul(ring.mul(a, b), c) != ring.mul(a, ring.mul(b, c)):
            return CheckOutcome.fail(law="mul associative", a=a, b=b, c=c)
        if ring.mul(a, ring.add(b, c)) != ring.add(ring.mul(a, b), ring.mul(a, c)):
            return CheckOutcome.fail(law="distributive", a=a, b=b, c=c)
    return CheckOutcome.ok(triples=count)


# ---------------------------------------------------------------------------
# Integer polynomials
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _polynomial_ring(variables: Tuple[str, ...]):
    ring, *_ = polynomial_ring(",".join(variables), ZZ)
    return ring


class IntPolynomial:
    """
    A multivariate polynomial with arbitrary-precision integer coefficients.

    Backed by sympy's sparse polynomial rings, which keep no zero coefficients
    and give equal polynomials identical term dictionaries.
    """

    def __init__(self, element):
        self._element = element

    @classmethod
    def variables_of(cls, variables: Sequence[str]) -> List["IntPolynomial"]:
        ring = _polynomial_ring(tuple(variables))
        return [cls(g) for g in ring.gens]

    @classmethod
    def constant(cls, variables: Sequence[str], value: int) -> "IntPolynomial":
        return cls(_polynomial_ring(tuple(variables))(value))

    @classmethod
    def from_terms(
        cls, variables: Sequence[str], terms: Dict[Tuple[int, ...], int]
    ) -> "IntPolynomial":
        ring = _polynomial_ring(tuple(variables))
        return cls(ring.from_dict({tuple(k): ZZ(v) for k, v in terms.items() if v}))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(str(s) for s in self._element.ring.symbols)

    @property
    def terms(self) -> Dict[Tuple[int, ...], int]:
        return {
            monom: int(coeff)
            for monom, coeff in sorted(self._element.items(), reverse=True)
        }

    def is_zero(self) -> bool:
        return not self._element

    def degree(self) -> int:
        return max((sum(monom) for monom in self._element.keys()), default=0)

    def _wrap(self, other) -> Any:
        if isinstance(other, IntPolynomial):
            return other._element
        return other

    def __add__(self, other) -> "IntPolynomial":
        return IntPolynomial(self._element + self._wrap(other))

    def __radd__(self, other) -> "IntPolynomial":
        return self + other

    def __sub__(self, other) -> "IntPolynomial":
        return IntPolynomial(self._element - self._wrap(other))

    def __rsub__(self, other) -> "IntPolynomial":
        return IntPolynomial(self._wrap(other) - self._element)

    def __mul__(self, other) -> "IntPolynomial":
        return IntPolynomial(self._element * self._wrap(other))

    def __rmul__(self, other) -> "IntPolynomial":
        return self * other

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(-self._element)

    def __pow__(self, exponent: int) -> "IntPolynomial":
        return IntPolynomial(self._element**exponent)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, IntPolynomial):
            return self._element == other._element
        return self._element == other

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._element.items())))

    def __repr__(self) -> str:
        return str(self._element.as_expr())

    def exact_div_p(self, p: int) -> "IntPolynomial":
        try:
            return IntPolynomial(self._element.exquo(self._element.ring(ZZ(p))))
        except ExactQuotientFailed as e:
            raise DivisibilityError(
                f"Polynomial {self!r} is not divisible by {p}.\n"
                f"A universal integrality statement has failed; this is an "
                f"internal fault, not a rounding issue."
            ) from e

    @cached_property
    def _compiled(self) -> List[Tuple[int, Tuple[int, ...]]]:
        return [(int(c), monom) for monom, c in self._element.items()]

    def evaluate(self, ring: FiniteRing, values: Sequence[Element]) -> Element:
        """Evaluate at ring elements (one per variable), coefficients via from_int."""
        if len(values) != len(self.variables):
            raise AlgebraError(
                f"Polynomial in {len(self.variables)} variables evaluated at "
                f"{len(values)} values"
            )
        powers: Dict[Tuple[int, int], Element] = {}
        result = ring.zero()
        for coeff, monom in self._compiled:
            term = ring.from_int(coeff)
            for index, exponent in enumerate(monom):
                if exponent:
                    key = (index, exponent)
                    if key not in powers:
                        powers[key] = ring.pow(values[index], exponent)
                    term = ring.mul(term, powers[key])
            result = ring.add(result, term)
        return result

    def evaluate_mod(self, values: Sequence[int], modulus: int) -> int:
        """Evaluate at integers modulo ``modulus`` (fast path for Z/p^m)."""
        total = 0
        for coeff, monom in self._reduced_terms(modulus):
            term = coeff
            for value, exponent in zip(values, monom):
                if exponent:
                    term = term * pow(value, exponent, modulus) % modulus
                    if not term:
                        break
            total += term
        return total % modulus

    def _reduced_terms(self, modulus: int) -> List[Tuple[int, Tuple[int, ...]]]:
        memo = self.__dict__.setdefault("_reduced_memo", {})
        terms = memo.get(modulus)
        if terms is None:
            terms = [
                (c % modulus, monom) for c, monom in self._compiled if c % modulus
            ]
            memo[modulus] = terms
        return terms

    def to_json(self) -> Dict[str, Any]:
        return {
            "variables": list(self.variables),
            "terms": [[list(monom), coeff] for monom, coeff in self.terms.items()],
        }


def exact_div_p(x, p: int):
    """
    Divide a polynomial or a residue lift exactly by p.

    Residues drop one step of precision: a value at p^m divisible by p becomes
    a value at p^(m-1). Any non-divisible input raises DivisibilityError.
    """
    validate_prime(p)
    if isinstance(x, IntPolynomial):
        return x.exact_div_p(p)
    if isinstance(x, ResidueInt):
        if x.p != p:
            raise ModulusMismatchError(f"Cannot divide {x!r} by a different prime {p}")
        if x.m < 2:
            raise DivisibilityError(
                f"Cannot divide {x!r} by p: the result would have precision 0"
            )
        if x.value % p:
            raise DivisibilityError(
                f"{x!r} is not divisible by {p}; exact division never rounds."
            )
        return ResidueInt(x.value // p, p, x.m - 1)
    raise TypeError(
        f"exact_div_p expects IntPolynomial or ResidueInt, got {type(x).__name__}"
    )
