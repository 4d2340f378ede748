"""
p-Boolean algebras and finite Stone duality over F_p.

Covers the character set of an algebra, the function algebra of a finite
set, Frobenius (co)invariants and (co)perfection with their adjunctions,
and the reduced/semiperfect diagnostics.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from exact_algebra import CheckOutcome, canonical_key
from fp_algebra import (
    AlgebraMap,
    FiniteFpAlgebra,
    Matrix,
    Subspace,
    Vector,
    algebra_maps,
    frobenius_power_image,
    function_algebra,
    identity_matrix,
    linear_ker_coker,
)

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 2**12


class StoneError(ValueError):
    """Input outside the Stone/p-Boolean world an operation requires."""


def is_p_boolean(algebra: FiniteFpAlgebra) -> bool:
    """a^p = a for every element, i.e. the Frobenius matrix is the identity."""
    return algebra.frobenius_matrix == identity_matrix(algebra.dim)


@dataclass(frozen=True)
class PBooleanAlgebra:
    """An F_p-algebra on which Frobenius is the identity."""

    algebra: FiniteFpAlgebra

    def __post_init__(self):
        if not is_p_boolean(self.algebra):
            raise StoneError(
                f"{self.algebra.describe()} is not p-Boolean.\n"
                f"Frobenius matrix {self.algebra.frobenius_matrix} is not the "
                f"identity, so some element has a^p != a."
            )

    @property
    def p(self) -> int:
        return self.algebra.p

    @property
    def dim(self) -> int:
        return self.algebra.dim


@dataclass(frozen=True)
class FiniteStoneDual:
    """The characters A -> F_p of an algebra, each given on the basis."""

    algebra: FiniteFpAlgebra
    points: Tuple[Vector, ...]

    def __len__(self) -> int:
        return len(self.points)

    def evaluate(self, point: Vector, a: Vector) -> int:
        return sum(c * x for c, x in zip(point, a)) % self.algebra.p


def _is_character(algebra: FiniteFpAlgebra, chi: Vector) -> bool:
    p = algebra.p

    def value(a: Vector) -> int:
        return sum(c * x for c, x in zip(chi, a)) % p

    if value(algebra.unit) != 1:
        return False
    for i, j in itertools.combinations_with_replacement(range(algebra.dim), 2):
        product = algebra.mul(algebra.basis_vector(i), algebra.basis_vector(j))
        if value(product) != chi[i] * chi[j] % p:
            return False
    return True


def algebra_characters(algebra: FiniteFpAlgebra) -> FiniteStoneDual:
    """All F_p-algebra maps A -> F_p, by exhaustive search over linear forms."""
    points = tuple(
        chi
        for chi in itertools.product(range(algebra.p), repeat=algebra.dim)
        if _is_character(algebra, chi)
    )
    return FiniteStoneDual(algebra, points)


def _split_idempotents(algebra: FiniteFpAlgebra) -> List[Vector]:
    """
    Primitive idempotents of a p-Boolean algebra.

    Each basis element x cuts every idempotent e into the pieces
    e * (1 - (x - c)^(p-1)), c in F_p, which are the loci where x equals c.
    """
    p, one = algebra.p, algebra.one()
    idempotents = [one]
    for i in range(algebra.dim):
        x = algebra.basis_vector(i)
        refined = []
        for e in idempotents:
            for c in range(p):
                shifted = algebra.sub(x, algebra.from_int(c))
                piece = algebra.mul(e, algebra.sub(one, algebra.pow(shifted, p - 1)))
                if any(piece):
                    refined.append(piece)
        idempotents = refined
    # the zero algebra has no points
    return [e for e in idempotents if any(e)]


def _character_of_idempotent(algebra: FiniteFpAlgebra, e: Vector) -> Vector:
    p = algebra.p
    k = next(i for i, c in enumerate(e) if c)
    inverse = pow(e[k], p - 2, p)
    return tuple(
        algebra.mul(algebra.basis_vector(i), e)[k] * inverse % p
        for i in range(algebra.dim)
    )


@lru_cache(maxsize=512)
def spec_chars(algebra: FiniteFpAlgebra) -> FiniteStoneDual:
    """
    Characters of a p-Boolean algebra, one per primitive idempotent.

    When the algebra has at most EXHAUSTIVE_LIMIT elements the result is
    compared with exhaustive character search.
    """
    if not is_p_boolean(algebra):
        raise StoneError(
            f"spec_chars needs a p-Boolean algebra; {algebra.describe()} has "
            f"a^p != a for some a."
        )
    points = tuple(
        sorted(
            (_character_of_idempotent(algebra, e) for e in _split_idempotents(algebra)),
            key=canonical_key,
        )
    )
    if len(points) != algebra.dim:
        raise StoneError(
            f"Found {len(points)} primitive idempotents in a p-Boolean algebra of "
            f"dimension {algebra.dim}; the structure constants are inconsistent."
        )
    if algebra.size() <= EXHAUSTIVE_LIMIT:
        exhaustive = algebra_characters(algebra).points
        if set(exhaustive) != set(points):
            raise StoneError(
                f"Idempotent splitting found {points} but exhaustive search found "
                f"{exhaustive} in {algebra.describe()}"
            )
    return FiniteStoneDual(algebra, points)


def stone_dual_of_set(points: Sequence[Hashable], p: int) -> PBooleanAlgebra:
    """F_p^S in the indicator basis."""
    if not points:
        raise StoneError(
            "Cannot dualize the empty set: its function algebra is the zero ring, "
            "which is excluded."
        )
    return PBooleanAlgebra(function_algebra(points, p))


def evaluation_map(algebra: FiniteFpAlgebra) -> Tuple[AlgebraMap, FiniteStoneDual]:
    """A -> F_p^{characters}, a -> (chi(a))_chi."""
    dual = spec_chars(algebra)
    target = function_algebra(range(len(dual.points)), algebra.p)
    return AlgebraMap(algebra, target, tuple(dual.points)), dual


def p_boolean_iso_check(algebra: FiniteFpAlgebra) -> CheckOutcome:
    """Every p-Boolean algebra is its function algebra on characters."""
    f, dual = evaluation_map(algebra)
    if not f.is_homomorphism():
        return CheckOutcome.fail(algebra=algebra.labels, property="homomorphism")
    if not f.is_isomorphism():
        return CheckOutcome.fail(
            algebra=algebra.labels, property="bijective", rank=f.rank, points=len(dual)
        )
    return CheckOutcome.ok()


def pullback_map(
    f: Dict[Hashable, Hashable],
    source_points: Sequence[Hashable],
    target_points: Sequence[Hashable],
    p: int,
) -> AlgebraMap:
    """
    For a set map f: T -> S, the algebra map F_p^S -> F_p^T, g -> g o f.

    ``source_points`` is S (the algebra source), ``target_points`` is T.
    """
    source = function_algebra(source_points, p)
    target = function_algebra(target_points, p)
    matrix = tuple(
        tuple(int(f[t] == s) for s in source_points) for t in target_points
    )
    return AlgebraMap(source, target, matrix)


def dual_map(f: AlgebraMap) -> Dict[Vector, Vector]:
    """Spec on maps: a character chi of the target goes to chi o f."""
    p = f.source.p
    target_points = spec_chars(f.target).points
    columns = list(zip(*f.matrix)) if f.matrix else [()] * f.source.dim
    return {
        chi: tuple(sum(c * x for c, x in zip(chi, col)) % p for col in columns)
        for chi in target_points
    }


def double_dual_check(
    f: Dict[Hashable, Hashable],
    source_points: Sequence[Hashable],
    target_points: Sequence[Hashable],
    p: int,
) -> CheckOutcome:
    """
    For f: T -> S, dualizing twice recovers f once points are matched with
    coordinate characters.
    """
    algebra_map = pullback_map(f, source_points, target_points, p)
    recovered = dual_map(algebra_map)

    def point_char(points: Sequence[Hashable], s: Hashable) -> Vector:
        return tuple(int(x == s) for x in points)

    for t in target_points:
        expected = point_char(source_points, f[t])
        got = recovered.get(point_char(target_points, t))
        if got != expected:
            return CheckOutcome.fail(point=t, expected=f[t], got=got)
    return CheckOutcome.ok()


# ---------------------------------------------------------------------------
# Frobenius (co)invariants and (co)perfection
# ---------------------------------------------------------------------------


def _frobenius_minus_identity(algebra: FiniteFpAlgebra) -> Matrix:
    frob = algebra.frobenius_matrix
    return tuple(
        tuple((frob[r][c] - int(r == c)) % algebra.p for c in range(algebra.dim))
        for r in range(algebra.dim)
    )


def frobenius_invariants(algebra: FiniteFpAlgebra) -> AlgebraMap:
    """ker(Frob - 1) as a p-Boolean subalgebra, with its inclusion."""
    kernel, _ = linear_ker_coker(_frobenius_minus_identity(algebra), algebra.p)
    inclusion = algebra.subalgebra(kernel)
    if not is_p_boolean(inclusion.source):
        raise StoneError("Frobenius invariants failed to be p-Boolean")
    return inclusion


def _matrix_inverse(matrix: Matrix, p: int) -> Matrix:
    if not matrix:
        return ()
    inverse = DomainMatrix.from_list([list(r) for r in matrix], GF(p)).inv()
    return tuple(tuple(int(x) % p for x in row) for row in inverse.to_list())


@dataclass(frozen=True)
class Perfections:
    """
    The eventual image E = Frob^k(A) with its two structure maps.

    ``unit``: A -> E exhibits E as the coperfection (colimit along Frob).
    ``counit``: E -> A, the inclusion, exhibits E as the perfection
    (limit along Frob); for finite A both are carried by E.
    """

    algebra: FiniteFpAlgebra
    image: FiniteFpAlgebra
    unit: AlgebraMap
    counit: AlgebraMap
    steps: int


def perfections(algebra: FiniteFpAlgebra) -> Perfections:
    steps = 0
    space = frobenius_power_image(algebra, 0)
    while True:
        following = frobenius_power_image(algebra, steps + 1)
        if following.dim == space.dim:
            break
        space, steps = following, steps + 1
    inclusion = algebra.subalgebra(space.basis)
    image = inclusion.source
    frob_on_image = image.frobenius_matrix
    inverse = _matrix_inverse(frob_on_image, algebra.p)
    # a -> (Frob|_E)^{-k}(Frob^k(a)) in E-coordinates
    columns = []
    for i in range(algebra.dim):
        v = algebra.basis_vector(i)
        for _ in range(steps):
            v = algebra.frobenius(v)
        coords = Subspace.span(space.basis, algebra.p, algebra.dim).coordinates(v)
        for _ in range(steps):
            coords = tuple(
                sum(a * b for a, b in zip(row, coords)) % algebra.p for row in inverse
            )
        columns.append(coords)
    unit = AlgebraMap.from_images(algebra, image, columns)
    logger.debug(
        "Frobenius image of %s stabilizes after %d steps at dimension %d",
        algebra.describe(),
        steps,
        image.dim,
    )
    return Perfections(algebra, image, unit, inclusion, steps)


def coperfection(algebra: FiniteFpAlgebra) -> AlgebraMap:
    """The unit A -> A_perf."""
    return perfections(algebra).unit


def perfection(algebra: FiniteFpAlgebra) -> AlgebraMap:
    """The counit A^perf -> A."""
    return perfections(algebra).counit


def frobenius_coinvariants(algebra: FiniteFpAlgebra) -> AlgebraMap:
    """
    A -> A_perf / (Frob - 1), a p-Boolean quotient.

    The ring structure on the cokernel is taken after passing to the
    coperfection; the result is the zero algebra when A has no F_p-points.
    """
    unit = coperfection(algebra)
    image = unit.target
    differences = [
        image.sub(image.frobenius(image.basis_vector(i)), image.basis_vector(i))
        for i in range(image.dim)
    ]
    projection = image.quotient(differences)
    if not is_p_boolean(projection.target):
        raise StoneError("Frobenius coinvariants failed to be p-Boolean")
    return unit.then(projection)


@dataclass(frozen=True)
class CharPDiagnostics:
    reduced: bool
    frob_injective: bool
    semiperfect: bool
    nilpotent_witness: Optional[Vector] = None

    @property
    def consistent(self) -> bool:
        return self.reduced == self.frob_injective

    def to_json(self) -> Dict:
        return {
            "reduced": self.reduced,
            "frob_injective": self.frob_injective,
            "semiperfect": self.semiperfect,
        }


def char_p_diagnostics(algebra: FiniteFpAlgebra) -> CharPDiagnostics:
    """Reducedness by exhaustive nilpotency search against the Frobenius rank."""
    zero = algebra.zero()
    witness = next(
        (
            a
            for a in algebra.sorted_elements()
            if a != zero and algebra.pow(a, max(algebra.dim, 1)) == zero
        ),
        None,
    )
    rank = algebra.frobenius_rank
    return CharPDiagnostics(
        reduced=witness is None,
        frob_injective=rank == algebra.dim,
        semiperfect=rank == algebra.dim,
        nilpotent_witness=witness,
    )


# ---------------------------------------------------------------------------
# Adjunction checks
# ---------------------------------------------------------------------------


def hom_bijection(
    left: Sequence[AlgebraMap],
    right: Sequence[AlgebraMap],
    transport: Callable[[AlgebraMap], AlgebraMap],
) -> CheckOutcome:
    """``transport`` must send ``left`` bijectively onto ``right``."""
    images = [transport(f).key() for f in left]
    expected = {f.key() for f in right}
    if len(set(images)) != len(images):
        return CheckOutcome.fail(property="injective", left=len(left), right=len(right))
    if set(images) != expected:
        missing = sorted(expected - set(images))
        return CheckOutcome.fail(
            property="surjective", left=len(left), right=len(right), missing=missing[:1]
        )
    return CheckOutcome.ok(maps=len(left))


def invariants_adjunction_check(
    test_object: FiniteFpAlgebra, algebra: FiniteFpAlgebra
) -> CheckOutcome:
    """Hom(B, A^{Frob=1}) = Hom(B, A) for p-Boolean B, by composing with inclusion."""
    inclusion = frobenius_invariants(algebra)
    return hom_bijection(
        algebra_maps(test_object, inclusion.source),
        algebra_maps(test_object, algebra),
        lambda g: g.then(inclusion),
    )


def coinvariants_adjunction_check(
    algebra: FiniteFpAlgebra, test_object: FiniteFpAlgebra
) -> CheckOutcome:
    """Hom(A_{Frob=1}, B) = Hom(A, B) for p-Boolean B, by precomposition."""
    projection = frobenius_coinvariants(algebra)
    return hom_bijection(
        algebra_maps(projection.target, test_object),
        algebra_maps(algebra, test_object),
        lambda g: projection.then(g),
    )


def coperfection_adjunction_check(
    algebra: FiniteFpAlgebra, test_object: FiniteFpAlgebra
) -> CheckOutcome:
    """Hom(A_perf, B) = Hom(A, B) for perfect B."""
    unit = coperfection(algebra)
    return hom_bijection(
        algebra_maps(unit.target, test_object),
        algebra_maps(algebra, test_object),
        lambda g: unit.then(g),
    )


def perfection_adjunction_check(
    test_object: FiniteFpAlgebra, algebra: FiniteFpAlgebra
) -> CheckOutcome:
    """Hom(B, A^perf) = Hom(B, A) for perfect B."""
    counit = perfection(algebra)
    return hom_bijection(
        algebra_maps(test_object, counit.source),
        algebra_maps(test_object, algebra),
        lambda g: g.then(counit),
    )
