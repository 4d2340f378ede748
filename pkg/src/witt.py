"""
Truncated p-typical Witt vectors over the finite rings of exact_algebra,
the universal sum/product polynomials, ghost components, Teichmüller lifts,
Frobenius lifts and the δ-structures they determine.
"""

import itertools
import logging
import random
import threading
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from boolean_stone import char_p_diagnostics
from exact_algebra import (
    CheckOutcome,
    DivisibilityError,
    Element,
    FiniteRing,
    IntPolynomial,
    ResidueRing,
    canonical_key,
    ring_homomorphisms,
    validate_prime,
)
from fp_algebra import FiniteFpAlgebra, algebra_maps

logger = logging.getLogger(__name__)

MEMO_SIZE = 1 << 16


class WittError(ValueError):
    """Invalid Witt vector parameters or an unsupported base ring."""


# ---------------------------------------------------------------------------
# Universal polynomials
# ---------------------------------------------------------------------------


def witt_variable_names(n: int) -> List[str]:
    return [f"X{i}" for i in range(n)] + [f"Y{i}" for i in range(n)]


def ghost_polynomial(
    zs: Sequence[IntPolynomial], i: int, p: int
) -> IntPolynomial:
    """w_i(Z) = sum over j <= i of p^j * Z_j^(p^(i-j))."""
    total = 0 * zs[0]
    for j in range(i + 1):
        total = total + p**j * zs[j] ** (p ** (i - j))
    return total


def _solve_ghost_level(
    target: IntPolynomial, known: Sequence[IntPolynomial], i: int, p: int
) -> IntPolynomial:
    remainder = target
    for j, poly in enumerate(known):
        remainder = remainder - p**j * poly ** (p ** (i - j))
    for _ in range(i):
        remainder = remainder.exact_div_p(p)
    return remainder


@dataclass(frozen=True)
class WittPolySet:
    """Sum polynomials S_0..S_{n-1} and product polynomials P_0..P_{n-1}."""

    p: int
    n: int
    sums: Tuple[IntPolynomial, ...]
    products: Tuple[IntPolynomial, ...]

    @cached_property
    def negation_corrections(self) -> Tuple[IntPolynomial, ...]:
        """Q_i = S_i - X_i - Y_i, which involves only lower-index variables."""
        variables = IntPolynomial.variables_of(witt_variable_names(self.n))
        return tuple(
            s - variables[i] - variables[self.n + i] for i, s in enumerate(self.sums)
        )

    def check_ghost_identities(self) -> CheckOutcome:
        """Verify w_i(S) = w_i(X) + w_i(Y) and w_i(P) = w_i(X) w_i(Y) exactly."""
        variables = IntPolynomial.variables_of(witt_variable_names(self.n))
        xs, ys = variables[: self.n], variables[self.n :]
        for i in range(self.n):
            wx, wy = ghost_polynomial(xs, i, self.p), ghost_polynomial(ys, i, self.p)
            if ghost_polynomial(self.sums, i, self.p) != wx + wy:
                return CheckOutcome.fail(p=self.p, n=self.n, level=i, identity="sum")
            if ghost_polynomial(self.products, i, self.p) != wx * wy:
                return CheckOutcome.fail(
                    p=self.p, n=self.n, level=i, identity="product"
                )
        return CheckOutcome.ok()

    def to_json(self) -> Dict:
        return {
            "p": self.p,
            "n": self.n,
            "sums": [s.to_json() for s in self.sums],
            "products": [q.to_json() for q in self.products],
        }


_WITT_POLY_CACHE: Dict[Tuple[int, int], WittPolySet] = {}
_WITT_POLY_LOCK = threading.Lock()


def witt_polys(p: int, n: int) -> WittPolySet:
    """
    Universal Witt polynomials for W_n at the prime p.

    Each level is solved from the ghost identities by exact division by p^i.
    Results are memoized per (p, n); the memo is filled once under a lock.
    """
    validate_prime(p)
    if n < 1:
        raise WittError(f"Witt vector length must be at least 1, got {n}")
    key = (p, n)
    with _WITT_POLY_LOCK:
        cached = _WITT_POLY_CACHE.get(key)
        if cached is not None:
            return cached
        logger.debug("Computing Witt polynomials for p=%d, n=%d", p, n)
        variables = IntPolynomial.variables_of(witt_variable_names(n))
        xs, ys = variables[:n], variables[n:]
        sums: List[IntPolynomial] = []
        products: List[IntPolynomial] = []
        for i in range(n):
            wx, wy = ghost_polynomial(xs, i, p), ghost_polynomial(ys, i, p)
            sums.append(_solve_ghost_level(wx + wy, sums, i, p))
            products.append(_solve_ghost_level(wx * wy, products, i, p))
        result = WittPolySet(p, n, tuple(sums), tuple(products))
        _WITT_POLY_CACHE[key] = result
        return result


@lru_cache(maxsize=None)
def delta_sum_correction(p: int) -> IntPolynomial:
    """C_p(X, Y) = ((X^p + Y^p) - (X + Y)^p) / p."""
    x, y = IntPolynomial.variables_of(["X", "Y"])
    return (x**p + y**p - (x + y) ** p).exact_div_p(p)


def witt_int_vector(k: int, p: int, n: int) -> Tuple[int, ...]:
    """Witt coordinates over Z of the integer k: every ghost component equals k."""
    validate_prime(p)
    coords: List[int] = []
    for i in range(n):
        partial = sum(p**j * x ** (p ** (i - j)) for j, x in enumerate(coords))
        quotient, rest = divmod(k - partial, p**i)
        if rest:
            raise DivisibilityError(
                f"Integrality failure computing Witt coordinate {i} of {k} at p={p}"
            )
        coords.append(quotient)
    return tuple(coords)


# ---------------------------------------------------------------------------
# Witt vectors
# ---------------------------------------------------------------------------


def is_fp_algebra(ring: FiniteRing) -> bool:
    return ring.from_int(ring.p) == ring.zero()


def frobenius_is_bijective(ring: FiniteRing) -> bool:
    if isinstance(ring, FiniteFpAlgebra):
        return ring.is_perfect()
    return len({ring.pow(x, ring.p) for x in ring.elements()}) == ring.size()


@dataclass(frozen=True)
class WittVector:
    """An element of W_n(A); equality is componentwise."""

    components: Tuple[Element, ...]
    ring: "WittRing" = field(compare=False, repr=False)

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def length(self) -> int:
        return len(self.components)

    def __add__(self, other: "WittVector") -> "WittVector":
        return witt_add(self, other)

    def __mul__(self, other: "WittVector") -> "WittVector":
        return witt_mul(self, other)

    def __neg__(self) -> "WittVector":
        return self.ring.neg(self)

    def __sub__(self, other: "WittVector") -> "WittVector":
        return self.ring.sub(self, other)

    def __repr__(self) -> str:
        return f"W({', '.join(map(repr, self.components))})"


@dataclass(frozen=True)
class WittRing(FiniteRing):
    """
    W_n(A) for a finite ring A.

    As a p-adically truncated carrier its precision is the length n, and
    lowering drops the last component (the restriction W_n -> W_{n-1}).
    """

    base: FiniteRing
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise WittError(f"Witt vector length must be at least 1, got {self.length}")

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def polys(self) -> WittPolySet:
        return witt_polys(self.p, self.length)

    @cached_property
    def _add_components(self) -> Callable[[Tuple, Tuple], Tuple]:
        @lru_cache(maxsize=MEMO_SIZE)
        def add(left: Tuple, right: Tuple) -> Tuple:
            return self._evaluate(self.polys.sums, list(left + right))

        return add

    @cached_property
    def _mul_components(self) -> Callable[[Tuple, Tuple], Tuple]:
        @lru_cache(maxsize=MEMO_SIZE)
        def mul(left: Tuple, right: Tuple) -> Tuple:
            return self._evaluate(self.polys.products, list(left + right))

        return mul

    def vector(self, components: Sequence[Element]) -> WittVector:
        if len(components) != self.length:
            raise WittError(
                f"{self.describe()} needs {self.length} components, "
                f"got {len(components)}"
            )
        return WittVector(tuple(components), self)

    def _evaluate(self, polys: Sequence[IntPolynomial], values: List[Element]):
        if isinstance(self.base, ResidueRing):
            ints = [v.value for v in values]
            modulus = self.base.modulus
            return tuple(
                self.base.element(poly.evaluate_mod(ints, modulus)) for poly in polys
            )
        return tuple(poly.evaluate(self.base, values) for poly in polys)

    def _check_member(self, a: WittVector) -> None:
        if not isinstance(a, WittVector) or (a.ring is not self and a.ring != self):
            raise WittError(
                f"Mismatched Witt vector parameters: expected an element of "
                f"{self.describe()}, got {a!r}"
            )

    def zero(self) -> WittVector:
        return self.vector([self.base.zero()] * self.length)

    def one(self) -> WittVector:
        return self.teichmuller(self.base.one())

    def add(self, a: WittVector, b: WittVector) -> WittVector:
        self._check_member(a)
        self._check_member(b)
        return WittVector(self._add_components(a.components, b.components), self)

    def mul(self, a: WittVector, b: WittVector) -> WittVector:
        self._check_member(a)
        self._check_member(b)
        return WittVector(self._mul_components(a.components, b.components), self)

    def neg(self, a: WittVector) -> WittVector:
        """Solve a + b = 0 level by level using S_i = X_i + Y_i + Q_i."""
        self._check_member(a)
        corrections = self.polys.negation_corrections
        digits = [self.base.zero()] * self.length
        for i in range(self.length):
            q = corrections[i].evaluate(self.base, list(a.components) + digits)
            digits[i] = self.base.neg(self.base.add(a.components[i], q))
        return WittVector(tuple(digits), self)

    def from_int(self, k: int) -> WittVector:
        coords = witt_int_vector(k, self.p, self.length)
        return self.vector([self.base.from_int(c) for c in coords])

    def elements(self) -> Iterator[WittVector]:
        digits = self.base.sorted_elements()
        return (
            WittVector(tuple(c), self)
            for c in itertools.product(digits, repeat=self.length)
        )

    def size(self) -> int:
        return self.base.size() ** self.length

    def describe(self) -> str:
        return f"W_{self.length}({self.base.describe()})"

    def element_to_json(self, a: WittVector) -> List:
        return [self.base.element_to_json(c) for c in a.components]

    def element_from_json(self, data) -> WittVector:
        return self.vector([self.base.element_from_json(c) for c in data])

    def teichmuller(self, a: Element) -> WittVector:
        """The multiplicative lift [a] = (a, 0, ..., 0)."""
        return self.vector([a] + [self.base.zero()] * (self.length - 1))

    def ghost(self, a: WittVector) -> Tuple[Element, ...]:
        """Ghost components w_i = sum p^j x_j^(p^(i-j)) computed in the base ring."""
        base, p = self.base, self.p
        out = []
        for i in range(self.length):
            total = base.zero()
            for j in range(i + 1):
                term = base.pow(a.components[j], p ** (i - j))
                total = base.add(total, base.scale(p**j, term))
            out.append(total)
        return tuple(out)

    def restrict(self, a: WittVector) -> WittVector:
        return self.lowered().vector(a.components[:-1])

    # precision contract ------------------------------------------------------

    @property
    def precision(self) -> int:
        return self.length

    def lowered(self) -> "WittRing":
        if self.length < 2:
            raise WittError(f"{self.describe()} has no lower length to reach")
        return self._lowered

    @cached_property
    def _lowered(self) -> "WittRing":
        return WittRing(self.base, self.length - 1)

    def lower(self, a: WittVector) -> WittVector:
        return self.restrict(a)

    @cached_property
    def _frobenius_inverse(self) -> Optional[Dict[Element, Element]]:
        if not is_fp_algebra(self.base):
            return None
        table = {self.base.pow(x, self.p): x for x in self.base.elements()}
        return table if len(table) == self.base.size() else None

    def divide_by_p(self, a: WittVector) -> WittVector:
        """
        Over an F_p-algebra, p(x_0, x_1, ...) = (0, x_0^p, x_1^p, ...), so the
        quotient is read off digitwise when Frobenius is bijective. Other bases
        use the tabulated rule of FiniteRing.
        """
        if not is_fp_algebra(self.base):
            return super().divide_by_p(a)
        inverse = self._frobenius_inverse
        if inverse is None:
            raise DivisibilityError(
                f"Division by p in {self.describe()} is not determined: the base "
                f"Frobenius is not injective, so p-multiples forget digits."
            )
        if a.components[0] != self.base.zero():
            raise DivisibilityError(f"{a!r} is not divisible by p in {self.describe()}")
        return self.lowered().vector([inverse[c] for c in a.components[1:]])


def witt_add(a: WittVector, b: WittVector) -> WittVector:
    if a.ring != b.ring:
        raise WittError(
            f"Cannot add Witt vectors from {a.ring.describe()} and "
            f"{b.ring.describe()}: base ring, length and p must agree."
        )
    return a.ring.add(a, b)


def witt_mul(a: WittVector, b: WittVector) -> WittVector:
    if a.ring != b.ring:
        raise WittError(
            f"Cannot multiply Witt vectors from {a.ring.describe()} and "
            f"{b.ring.describe()}: base ring, length and p must agree."
        )
    return a.ring.mul(a, b)


def ghost(a: WittVector) -> Tuple[Element, ...]:
    return a.ring.ghost(a)


def check_ghost_homomorphism(
    ring: WittRing, pairs: Iterator[Tuple[WittVector, WittVector]]
) -> CheckOutcome:
    """The ghost map W_n(A) -> A^n preserves 1, sums and products."""
    base = ring.base
    if ring.ghost(ring.one()) != (base.one(),) * ring.length:
        return CheckOutcome.fail(law="unit", ring=ring.describe())
    for a, b in pairs:
        ga, gb = ring.ghost(a), ring.ghost(b)
        if ring.ghost(ring.add(a, b)) != tuple(map(base.add, ga, gb)):
            return CheckOutcome.fail(law="additive", a=a, b=b, ring=ring.describe())
        if ring.ghost(ring.mul(a, b)) != tuple(map(base.mul, ga, gb)):
            return CheckOutcome.fail(
                law="multiplicative", a=a, b=b, ring=ring.describe()
            )
    return CheckOutcome.ok()


def teichmuller(ring: WittRing, a: Element) -> WittVector:
    return ring.teichmuller(a)


def digitwise_frobenius(ring: WittRing) -> Callable[[WittVector], WittVector]:
    """W_n(Frob_A): a Frobenius lift on W_n(A) for any F_p-algebra A."""
    if not is_fp_algebra(ring.base):
        raise WittError(
            f"The digitwise Frobenius needs an F_p-algebra base; "
            f"{ring.base.describe()} has characteristic other than p."
        )
    base, p = ring.base, ring.p

    def lift(a: WittVector) -> WittVector:
        return WittVector(tuple(base.pow(c, p) for c in a.components), ring)

    return lift


def witt_frobenius(a: WittVector) -> WittVector:
    """The Frobenius lift on W_n of a perfect F_p-algebra (digitwise p-th power)."""
    ring = a.ring
    if not is_fp_algebra(ring.base) or not frobenius_is_bijective(ring.base):
        raise WittError(
            f"witt_frobenius requires a perfect F_p-algebra base.\n"
            f"Base {ring.base.describe()} does not have a bijective Frobenius; use "
            f"digitwise_frobenius for the induced (non-bijective) lift."
        )
    return digitwise_frobenius(ring)(a)


def witt_functorial_map(
    f: Callable[[Element], Element], source: WittRing, target: WittRing
) -> Callable[[WittVector], WittVector]:
    """W_n(f) for a ring map f between bases, applied componentwise."""
    if source.length != target.length:
        raise WittError("Witt functoriality needs equal lengths")

    def mapped(a: WittVector) -> WittVector:
        return target.vector([f(c) for c in a.components])

    return mapped


# ---------------------------------------------------------------------------
# δ-structures
# ---------------------------------------------------------------------------


def delta_from_lift(
    lift: Callable[[Element], Element], x: Element, carrier: FiniteRing
) -> Element:
    """δ(x) = (φ(x) - x^p) / p, landing at precision m-1."""
    if carrier.precision is None or carrier.precision < 2:
        raise WittError(
            f"δ needs a p-adically truncated carrier of precision >= 2; "
            f"{carrier.describe()} has precision {carrier.precision}."
        )
    difference = carrier.sub(lift(x), carrier.pow(x, carrier.p))
    try:
        return carrier.divide_by_p(difference)
    except DivisibilityError as e:
        raise DivisibilityError(
            f"φ({x!r}) - {x!r}^{carrier.p} is not divisible by p in "
            f"{carrier.describe()}: the given map is not a Frobenius lift.\n{e}"
        ) from e


@dataclass(frozen=True)
class DeltaStructure:
    """
    A carrier with a Frobenius lift φ and the δ it determines.

    ``delta_override`` replaces the derived δ, which is how corrupted
    structures are fed to the axiom checker.
    """

    carrier: FiniteRing
    lift: Callable[[Element], Element] = field(compare=False)
    name: str = "φ"
    delta_override: Optional[Callable[[Element], Element]] = field(
        default=None, compare=False
    )

    def phi(self, x: Element) -> Element:
        return self.lift(x)

    @cached_property
    def _derived_delta(self) -> Callable[[Element], Element]:
        @lru_cache(maxsize=MEMO_SIZE)
        def delta(x: Element) -> Element:
            return delta_from_lift(self.lift, x, self.carrier)

        return delta

    def delta(self, x: Element) -> Element:
        if self.delta_override is not None:
            return self.delta_override(x)
        return self._derived_delta(x)

    @property
    def precision(self) -> int:
        return self.carrier.precision

    def shifted(self) -> "DeltaStructure":
        """The corrupted structure δ'(x) = δ(x) + 1."""
        lowered = self.carrier.lowered()
        return DeltaStructure(
            self.carrier,
            self.lift,
            f"{self.name}+shift",
            lambda x: lowered.add(self.delta(x), lowered.one()),
        )


def identity_delta(carrier: FiniteRing) -> DeltaStructure:
    return DeltaStructure(carrier, lambda x: x, "id")


def witt_delta(ring: WittRing) -> DeltaStructure:
    """The δ-structure of the digitwise Frobenius lift on W_n(A)."""
    return DeltaStructure(ring, digitwise_frobenius(ring), "W(Frob)")


def check_delta_axioms(
    structure: DeltaStructure, pairs: Iterator[Tuple[Element, Element]]
) -> CheckOutcome:
    """
    Check the product rule, the sum rule and δ(1) = 0 at precision m-1.

    Returns the first counterexample as the witness.
    """
    carrier = structure.carrier
    lowered = carrier.lowered()
    lower = carrier.lower
    p = carrier.p
    correction = delta_sum_correction(p)
    checked = 0
    for x, y in pairs:
        dx, dy = structure.delta(x), structure.delta(y)
        lx, ly = lower(x), lower(y)
        lhs = structure.delta(carrier.mul(x, y))
        rhs = lowered.add(
            lowered.add(
                lowered.mul(lowered.pow(lx, p), dy), lowered.mul(dx, lowered.pow(ly, p))
            ),
            lowered.scale(p, lowered.mul(dx, dy)),
        )
        if lhs != rhs:
            return CheckOutcome.fail(
                axiom="product", x=x, y=y, lhs=lhs, rhs=rhs, structure=structure.name
            )
        lhs = structure.delta(carrier.add(x, y))
        rhs = lowered.add(lowered.add(dx, dy), correction.evaluate(lowered, [lx, ly]))
        if lhs != rhs:
            return CheckOutcome.fail(
                axiom="sum", x=x, y=y, lhs=lhs, rhs=rhs, structure=structure.name
            )
        checked += 1
    unit_delta = structure.delta(carrier.one())
    if unit_delta != lowered.zero():
        return CheckOutcome.fail(
            axiom="unit", value=unit_delta, structure=structure.name
        )
    logger.debug("δ-axioms hold on %d pairs in %s", checked, carrier.describe())
    return CheckOutcome.ok()


def is_perfect_delta(lift: Callable[[Element], Element], carrier: FiniteRing) -> bool:
    """True iff the Frobenius lift is a bijection of the finite carrier."""
    return len({lift(x) for x in carrier.elements()}) == carrier.size()


# ---------------------------------------------------------------------------
# Structural checks at truncation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftDiagnostics:
    """Injectivity/surjectivity of W_n(Frob) against reducedness/semiperfectness."""

    lift_injective: bool
    lift_surjective: bool
    reduced: bool
    semiperfect: bool

    @property
    def consistent(self) -> bool:
        return (
            self.lift_injective == self.reduced
            and self.lift_surjective == self.semiperfect
        )


def witt_lift_diagnostics(base: FiniteFpAlgebra, n: int) -> LiftDiagnostics:
    ring = WittRing(base, n)
    lift = digitwise_frobenius(ring)
    images = {lift(a) for a in ring.elements()}
    diagnostics = char_p_diagnostics(base)
    return LiftDiagnostics(
        lift_injective=len(images) == ring.size(),
        lift_surjective=images == ring.element_set,
        reduced=diagnostics.reduced,
        semiperfect=diagnostics.semiperfect,
    )


def strict_p_check(base: FiniteRing, n: int) -> CheckOutcome:
    """
    For a perfect F_p-algebra A: W_n(A)/p ≅ A through the first component,
    and the p-torsion of W_n(A) is exactly p^(n-1) W_n(A).
    """
    if not is_fp_algebra(base) or not frobenius_is_bijective(base):
        raise WittError(
            f"strict_p_check needs a perfect F_p-algebra, got {base.describe()}"
        )
    ring = WittRing(base, n)
    elements = list(ring.elements())
    p_multiples = {ring.scale(ring.p, a) for a in elements}
    kernel = {a for a in elements if a.components[0] == base.zero()}
    if p_multiples != kernel:
        extra = sorted(kernel ^ p_multiples, key=canonical_key)[0]
        return CheckOutcome.fail(
            property="ker(first component) = pW", element=extra, ring=ring.describe()
        )
    for a, b in itertools.product(elements, repeat=2):
        if ring.mul(a, b).components[0] != base.mul(a.components[0], b.components[0]):
            return CheckOutcome.fail(
                property="first component multiplicative", a=a, b=b
            )
    torsion = {a for a in elements if ring.scale(ring.p, a) == ring.zero()}
    top = {ring.scale(ring.p ** (n - 1), a) for a in elements}
    if torsion != top:
        extra = sorted(torsion ^ top, key=canonical_key)[0]
        return CheckOutcome.fail(property="W[p] = p^(n-1) W", element=extra)
    return CheckOutcome.ok(quotient_size=len(elements) // len(kernel))


def residue_witt_isomorphism(
    p: int,
    n: int,
    rng: Optional[random.Random] = None,
    samples: int = 500,
    exhaustive_limit: int = 4096,
) -> CheckOutcome:
    """
    W_n(F_p) ≅ Z/p^n through k -> Witt coordinates of k.

    Bijectivity and compatibility with the successor map are checked on every
    element. Sums and products are compared on all pairs when there are at
    most ``exhaustive_limit`` of them, otherwise on ``samples`` seeded pairs.
    """
    integers = ResidueRing(p, n)
    ring = WittRing(ResidueRing(p, 1), n)
    residues = list(integers.elements())
    image = {k.value: ring.from_int(k.value) for k in residues}
    if len(set(image.values())) != integers.size():
        return CheckOutcome.fail(p=p, n=n, property="injective")
    one = ring.one()
    for a in residues:
        if image[(a + integers.one()).value] != ring.add(image[a.value], one):
            return CheckOutcome.fail(p=p, n=n, property="successor", a=a)
    if len(residues) ** 2 <= exhaustive_limit:
        pairs: Iterator = itertools.product(residues, repeat=2)
    else:
        rng = rng or random.Random(0)
        pairs = ((rng.choice(residues), rng.choice(residues)) for _ in range(samples))
    for a, b in pairs:
        if image[(a + b).value] != ring.add(image[a.value], image[b.value]):
            return CheckOutcome.fail(p=p, n=n, property="additive", a=a, b=b)
        if image[(a * b).value] != ring.mul(image[a.value], image[b.value]):
            return CheckOutcome.fail(p=p, n=n, property="multiplicative", a=a, b=b)
    return CheckOutcome.ok()


def delta_maps(
    source: DeltaStructure, target: DeltaStructure
) -> List[Dict[Element, Element]]:
    """Ring maps commuting with the Frobenius lifts."""
    maps = ring_homomorphisms(source.carrier, target.carrier)
    return [
        f
        for f in maps
        if all(f[source.phi(x)] == target.phi(f[x]) for x in source.carrier.elements())
    ]


def mod_p_equivalence_check(
    source: FiniteFpAlgebra, target: FiniteFpAlgebra, n: int
) -> CheckOutcome:
    """
    δ-maps W_n(A) -> W_n(B) correspond to algebra maps A -> B by reduction
    mod p, for perfect A and B.
    """
    for algebra in (source, target):
        if not algebra.is_perfect():
            raise WittError(
                "mod_p_equivalence_check needs perfect algebras: "
                f"{algebra.describe()}"
            )
    w_source, w_target = WittRing(source, n), WittRing(target, n)
    lifts = delta_maps(witt_delta(w_source), witt_delta(w_target))
    reductions = set()
    for table in lifts:
        g = {a: table[w_source.teichmuller(a)].components[0] for a in source.elements()}
        functorial = witt_functorial_map(g.__getitem__, w_source, w_target)
        if any(table[x] != functorial(x) for x in w_source.elements()):
            return CheckOutcome.fail(
                property="δ-map is W(reduction)", source=source.labels
            )
        reductions.add(tuple(g[source.basis_vector(i)] for i in range(source.dim)))
    algebra_images = {
        tuple(f(source.basis_vector(i)) for i in range(source.dim))
        for f in algebra_maps(source, target)
    }
    if reductions != algebra_images or len(reductions) != len(lifts):
        return CheckOutcome.fail(
            property="bijection",
            delta_maps=len(lifts),
            algebra_maps=len(algebra_images),
        )
    return CheckOutcome.ok(maps=len(lifts))

