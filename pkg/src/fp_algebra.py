"""
Finite-dimensional commutative F_p-algebras given by structure constants,
together with the F_p linear algebra (row reduction, kernels, cokernels)
used to compute Frobenius invariants and related constructions.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from exact_algebra import AlgebraError, FiniteRing, validate_prime

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]
Matrix = Tuple[Tuple[int, ...], ...]


# ---------------------------------------------------------------------------
# Linear algebra over F_p
# ---------------------------------------------------------------------------


def rref_mod_p(
    rows: Sequence[Sequence[int]], p: int, ncols: Optional[int] = None
) -> Tuple[List[List[int]], Tuple[int, ...]]:
    """
    Reduced row echelon form over F_p with leftmost pivots.

    Returns the nonzero rows of the reduced matrix and the pivot columns.
    """
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = DomainMatrix.from_list(rows, GF(p)).rref()
    values = [[int(x) % p for x in row] for row in reduced.to_list()]
    return values[: len(pivots)], tuple(pivots)


def matrix_rank(rows: Sequence[Sequence[int]], p: int) -> int:
    return len(rref_mod_p(rows, p)[1])


def transpose(rows: Sequence[Sequence[int]], ncols: int) -> List[List[int]]:
    return [[row[c] for row in rows] for c in range(ncols)]


def mat_vec(matrix: Sequence[Sequence[int]], v: Sequence[int], p: int) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) % p for row in matrix)


def mat_mul(
    left: Sequence[Sequence[int]], right: Sequence[Sequence[int]], p: int
) -> Matrix:
    columns = list(zip(*right)) if right else []
    return tuple(
        tuple(sum(a * b for a, b in zip(row, col)) % p for col in columns)
        for row in left
    )


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def linear_ker_coker(
    matrix: Sequence[Sequence[int]], p: int
) -> Tuple[List[Vector], List[Vector]]:
    """
    Bases for the kernel and cokernel of a square matrix over F_p.

    The kernel basis has one vector per free column of the reduced matrix, in
    increasing column order. The cokernel is represented by the standard
    vectors at positions that are not pivots of the reduced transpose, which
    span a complement of the image.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise AlgebraError(
            f"linear_ker_coker expects a square matrix, got {n} rows of lengths "
            f"{sorted({len(row) for row in matrix})}"
        )
    reduced, pivots = rref_mod_p(matrix, p, n)
    kernel = []
    for free in (c for c in range(n) if c not in pivots):
        v = [0] * n
        v[free] = 1
        for row, pivot in zip(reduced, pivots):
            v[pivot] = -row[free] % p
        kernel.append(tuple(v))
    _, image_pivots = rref_mod_p(transpose(matrix, n), p, n)
    cokernel = [
        tuple(int(i == c) for i in range(n)) for c in range(n) if c not in image_pivots
    ]
    return kernel, cokernel


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n stored by its reduced basis."""

    p: int
    n: int
    basis: Tuple[Vector, ...]
    pivots: Tuple[int, ...]

    @classmethod
    def span(cls, vectors: Sequence[Sequence[int]], p: int, n: int) -> "Subspace":
        reduced, pivots = rref_mod_p(vectors, p, n)
        return cls(p, n, tuple(tuple(r) for r in reduced), pivots)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence[int]) -> Vector:
        """Canonical representative of v modulo the subspace."""
        w = list(v)
        for row, pivot in zip(self.basis, self.pivots):
            c = w[pivot]
            if c:
                w = [(a - c * b) % self.p for a, b in zip(w, row)]
        return tuple(w)

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def coordinates(self, v: Sequence[int]) -> Vector:
        """Coordinates of a member of the subspace in the reduced basis."""
        if not self.contains(v):
            raise AlgebraError(f"Vector {tuple(v)} is not in the subspace")
        return tuple(v[pivot] % self.p for pivot in self.pivots)

    def combine(self, coords: Sequence[int]) -> Vector:
        out = [0] * self.n
        for c, row in zip(coords, self.basis):
            out = [(a + c * b) % self.p for a, b in zip(out, row)]
        return tuple(out)

    @property
    def complement_positions(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.pivots)


# ---------------------------------------------------------------------------
# Algebras
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteFpAlgebra(FiniteRing):
    """
    A commutative F_p-algebra with basis x_0..x_{dim-1}.

    ``structure[i][j][k]`` is the coefficient of x_k in x_i * x_j and ``unit``
    holds the coordinates of 1. Elements are coordinate tuples. Use
    ``from_structure`` or ``from_json`` for unchecked input: they validate the
    ring axioms and reject the zero algebra. Derived algebras (quotients) may
    be the zero algebra.
    """

    p: int
    dim: int
    structure: Tuple[Tuple[Tuple[int, ...], ...], ...]
    unit: Vector
    labels: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        validate_prime(self.p)
        if (
            self.dim < 0
            or len(self.structure) != self.dim
            or len(self.unit) != self.dim
        ):
            raise AlgebraError(
                f"Malformed algebra data: dim={self.dim}, "
                f"{len(self.structure)} structure rows, unit of length {len(self.unit)}"
            )
        for row in self.structure:
            if len(row) != self.dim or any(len(c) != self.dim for c in row):
                raise AlgebraError(
                    f"Structure constants must form a {self.dim}x{self.dim}x{self.dim} "
                    f"array of integers"
                )
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i}" for i in range(self.dim)))

    @classmethod
    def from_structure(
        cls,
        p: int,
        structure: Sequence[Sequence[Sequence[int]]],
        unit: Sequence[int],
        labels: Sequence[str] = (),
    ) -> "FiniteFpAlgebra":
        """Build an algebra from raw constants, validating every axiom."""
        dim = len(structure)
        if dim < 1:
            raise AlgebraError(
                "Invalid algebra: dimension 0.\n"
                "The zero ring is excluded; an algebra needs at least one basis "
                "element."
            )
        validate_prime(p)
        algebra = cls(
            p,
            dim,
            tuple(
                tuple(tuple(int(c) % p for c in cell) for cell in row)
                for row in structure
            ),
            tuple(int(c) % p for c in unit),
            tuple(labels),
        )
        algebra.validate()
        return algebra

    def validate(self) -> None:
        """Raise AlgebraError unless the constants define a commutative unital ring."""
        basis = [self.basis_vector(i) for i in range(self.dim)]
        for i, j in itertools.product(range(self.dim), repeat=2):
            if self.structure[i][j] != self.structure[j][i]:
                raise AlgebraError(
                    f"Structure constants are not commutative: "
                    f"x{i}*x{j} = {self.structure[i][j]} but "
                    f"x{j}*x{i} = {self.structure[j][i]}"
                )
        for i, j, k in itertools.product(range(self.dim), repeat=3):
            left = self.mul(self.mul(basis[i], basis[j]), basis[k])
            right = self.mul(basis[i], self.mul(basis[j], basis[k]))
            if left != right:
                raise AlgebraError(
                    f"Structure constants are not associative on basis triple "
                    f"({i}, {j}, {k}): {left} != {right}"
                )
        for i in range(self.dim):
            if self.mul(self.unit, basis[i]) != basis[i]:
                raise AlgebraError(
                    f"Unit {self.unit} does not act as identity on x{i}: "
                    f"got {self.mul(self.unit, basis[i])}"
                )

    # ring contract -----------------------------------------------------------

    def basis_vector(self, i: int) -> Vector:
        return tuple(int(k == i) for k in range(self.dim))

    def vector(self, coords: Sequence[int]) -> Vector:
        if len(coords) != self.dim:
            raise AlgebraError(
                f"Expected {self.dim} coordinates for an element of "
                f"{self.describe()}, got {len(coords)}"
            )
        return tuple(int(c) % self.p for c in coords)

    def zero(self) -> Vector:
        return (0,) * self.dim

    def one(self) -> Vector:
        return self.unit

    def add(self, a: Vector, b: Vector) -> Vector:
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a: Vector) -> Vector:
        return tuple(-x % self.p for x in a)

    def scalar(self, c: int, a: Vector) -> Vector:
        return tuple(c * x % self.p for x in a)

    def mul(self, a: Vector, b: Vector) -> Vector:
        out = [0] * self.dim
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                c = ai * bj
                for k, s in enumerate(self.structure[i][j]):
                    if s:
                        out[k] += c * s
        return tuple(x % self.p for x in out)

    def from_int(self, k: int) -> Vector:
        return self.scalar(k % self.p, self.unit)

    def elements(self) -> Iterator[Vector]:
        return (tuple(v) for v in itertools.product(range(self.p), repeat=self.dim))

    def size(self) -> int:
        return self.p**self.dim

    def describe(self) -> str:
        return f"F_{self.p}-algebra of dimension {self.dim} ({', '.join(self.labels)})"

    def element_to_json(self, a: Vector) -> List[int]:
        return list(a)

    def element_from_json(self, data: Any) -> Vector:
        return self.vector(data)

    # Frobenius -------------------------------------------------------------

    def frobenius(self, a: Vector) -> Vector:
        return self.pow(a, self.p)

    @cached_property
    def frobenius_matrix(self) -> Matrix:
        """Matrix of x -> x^p; column i holds the coordinates of x_i^p."""
        columns = [self.frobenius(self.basis_vector(i)) for i in range(self.dim)]
        return tuple(tuple(col[r] for col in columns) for r in range(self.dim))

    @cached_property
    def frobenius_rank(self) -> int:
        return matrix_rank(self.frobenius_matrix, self.p)

    def is_perfect(self) -> bool:
        return self.frobenius_rank == self.dim

    def is_zero_algebra(self) -> bool:
        return self.dim == 0

    # constructions -----------------------------------------------------------

    def subalgebra(
        self, vectors: Sequence[Vector], labels: Sequence[str] = ()
    ) -> "AlgebraMap":
        """
        The subalgebra spanned by ``vectors`` together with its inclusion.

        The span must contain 1 and be closed under multiplication.
        """
        space = Subspace.span([*vectors, self.unit], self.p, self.dim)
        structure = []
        for u in space.basis:
            row = []
            for v in space.basis:
                product = self.mul(u, v)
                if not space.contains(product):
                    raise AlgebraError(
                        f"Span of {list(vectors)} is not closed under multiplication "
                        f"in {self.describe()}: {u}*{v} = {product} escapes it"
                    )
                row.append(space.coordinates(product))
            structure.append(tuple(row))
        sub = FiniteFpAlgebra(
            self.p,
            space.dim,
            tuple(structure),
            space.coordinates(self.unit),
            tuple(labels) or tuple(f"s{i}" for i in range(space.dim)),
        )
        inclusion = tuple(tuple(b[r] for b in space.basis) for r in range(self.dim))
        return AlgebraMap(sub, self, inclusion)

    def quotient(self, ideal_vectors: Sequence[Vector]) -> "AlgebraMap":
        """
        The quotient by the ideal generated by ``ideal_vectors`` and its projection.

        The quotient basis is the set of standard vectors outside the pivot
        positions of the reduced ideal basis. The result is the zero algebra when
        the ideal is everything.
        """
        generators = [
            self.mul(self.basis_vector(i), g)
            for g in ideal_vectors
            for i in range(self.dim)
        ]
        ideal = Subspace.span(generators, self.p, self.dim)
        positions = ideal.complement_positions

        def project(v: Vector) -> Vector:
            reduced = ideal.reduce(v)
            return tuple(reduced[i] for i in positions)

        structure = tuple(
            tuple(
                project(self.mul(self.basis_vector(i), self.basis_vector(j)))
                for j in positions
            )
            for i in positions
        )
        quotient = FiniteFpAlgebra(
            self.p,
            len(positions),
            structure,
            project(self.unit),
            tuple(self.labels[i] for i in positions),
        )
        columns = [project(self.basis_vector(i)) for i in range(self.dim)]
        matrix = tuple(tuple(col[r] for col in columns) for r in range(quotient.dim))
        return AlgebraMap(self, quotient, matrix)

    def to_json(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "dim": self.dim,
            "unit": list(self.unit),
            "sc": [[list(cell) for cell in row] for row in self.structure],
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FiniteFpAlgebra":
        try:
            p, dim, unit, sc = data["p"], data["dim"], data["unit"], data["sc"]
        except KeyError as e:
            raise AlgebraError(
                f"Invalid algebra JSON: missing key {e}.\n"
                f'Expected {{"p": 2, "dim": 2, "unit": [1, 0], "sc": [[[...]]]}}.'
            ) from e
        if len(sc) != dim:
            raise AlgebraError(
                f"Algebra JSON declares dim={dim} but has {len(sc)} structure rows"
            )
        return cls.from_structure(int(p), sc, unit, data.get("labels", ()))


@dataclass(frozen=True)
class AlgebraMap:
    """An F_p-linear map between algebras, by its matrix (target.dim x source.dim)."""

    source: FiniteFpAlgebra
    target: FiniteFpAlgebra
    matrix: Matrix

    def __post_init__(self):
        if len(self.matrix) != self.target.dim or any(
            len(row) != self.source.dim for row in self.matrix
        ):
            raise AlgebraError(
                f"Algebra map matrix has the wrong shape for "
                f"{self.source.dim} -> {self.target.dim}"
            )

    def __call__(self, v: Vector) -> Vector:
        return mat_vec(self.matrix, v, self.source.p)

    def is_homomorphism(self) -> bool:
        if self(self.source.unit) != self.target.unit:
            return False
        for i, j in itertools.combinations_with_replacement(range(self.source.dim), 2):
            x, y = self.source.basis_vector(i), self.source.basis_vector(j)
            if self(self.source.mul(x, y)) != self.target.mul(self(x), self(y)):
                return False
        return True

    @cached_property
    def rank(self) -> int:
        return matrix_rank(self.matrix, self.source.p)

    def is_injective(self) -> bool:
        return self.rank == self.source.dim

    def is_surjective(self) -> bool:
        return self.rank == self.target.dim

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def then(self, other: "AlgebraMap") -> "AlgebraMap":
        """Composite ``other`` after ``self``."""
        if other.source != self.target:
            raise AlgebraError("Cannot compose algebra maps with mismatched ends")
        return AlgebraMap(
            self.source, other.target, mat_mul(other.matrix, self.matrix, self.source.p)
        )

    @classmethod
    def identity(cls, algebra: FiniteFpAlgebra) -> "AlgebraMap":
        return cls(algebra, algebra, identity_matrix(algebra.dim))

    @classmethod
    def from_images(
        cls,
        source: FiniteFpAlgebra,
        target: FiniteFpAlgebra,
        images: Sequence[Vector],
    ) -> "AlgebraMap":
        """Linear map sending basis vector i of the source to images[i]."""
        return cls(
            source,
            target,
            tuple(tuple(img[r] for img in images) for r in range(target.dim)),
        )

    def key(self) -> Matrix:
        return self.matrix


def frobenius_matrix(algebra: FiniteFpAlgebra) -> Matrix:
    """The matrix of x -> x^p in the algebra's basis."""
    return algebra.frobenius_matrix


def frobenius_power_image(algebra: FiniteFpAlgebra, k: int) -> Subspace:
    """The image of Frob^k as a subspace."""
    columns = [algebra.basis_vector(i) for i in range(algebra.dim)]
    for _ in range(k):
        columns = [algebra.frobenius(c) for c in columns]
    return Subspace.span(columns, algebra.p, algebra.dim)


# ---------------------------------------------------------------------------
# Standard algebras
# ---------------------------------------------------------------------------


def prime_field(p: int) -> FiniteFpAlgebra:
    return FiniteFpAlgebra.from_structure(p, [[[1]]], [1], ["1"])


def function_algebra(points: Sequence[Any], p: int) -> FiniteFpAlgebra:
    """F_p^S in the indicator basis (diagonal structure constants)."""
    return _function_algebra(tuple(points), p)


@lru_cache(maxsize=256)
def _function_algebra(points: Tuple[Any, ...], p: int) -> FiniteFpAlgebra:
    n = len(points)
    structure = [
        [[int(i == j == k) for k in range(n)] for j in range(n)] for i in range(n)
    ]
    return FiniteFpAlgebra.from_structure(
        p, structure, [1] * n, [f"e[{s}]" for s in points]
    )


def monogenic_algebra(p: int, modulus: Sequence[int]) -> FiniteFpAlgebra:
    """
    F_p[x]/(f) for a monic f, in the basis 1, x, ..., x^{d-1}.

    ``modulus`` lists the coefficients of f from the constant term up, without
    the leading 1.
    """
    d = len(modulus)

    def reduce(coeffs: List[int]) -> List[int]:
        coeffs = coeffs + [0] * max(0, 2 * d - len(coeffs))
        for power in range(len(coeffs) - 1, d - 1, -1):
            c = coeffs[power] % p
            if c:
                coeffs[power] = 0
                for i, f in enumerate(modulus):
                    coeffs[power - d + i] -= c * f
        return [c % p for c in coeffs[:d]]

    structure = []
    for i in range(d):
        row = []
        for j in range(d):
            monomial = [0] * (i + j + 1)
            monomial[i + j] = 1
            row.append(reduce(monomial))
        structure.append(row)
    labels = ["1"] + [f"x^{i}" if i > 1 else "x" for i in range(1, d)]
    return FiniteFpAlgebra.from_structure(
        p, structure, [1] + [0] * (d - 1), labels
    )


def dual_numbers(p: int) -> FiniteFpAlgebra:
    """F_p[x]/(x^2)."""
    return monogenic_algebra(p, [0, 0])


def f4() -> FiniteFpAlgebra:
    """F_4 = F_2[w]/(w^2 + w + 1) with basis {1, w}."""
    algebra = monogenic_algebra(2, [1, 1])
    return FiniteFpAlgebra(2, 2, algebra.structure, algebra.unit, ("1", "w"))


def idempotent_pair_algebra(p: int) -> FiniteFpAlgebra:
    """F_p^2 in the non-diagonal basis {1, e} with e^2 = e."""
    return FiniteFpAlgebra.from_structure(
        p, [[[1, 0], [0, 1]], [[0, 1], [0, 1]]], [1, 0], ["1", "e"]
    )


def product_algebra(left: FiniteFpAlgebra, right: FiniteFpAlgebra) -> FiniteFpAlgebra:
    """The product ring, with the concatenated basis."""
    if left.p != right.p:
        raise AlgebraError(
            f"Cannot take a product of F_{left.p}- and F_{right.p}-algebras"
        )
    n = left.dim + right.dim
    structure = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i, j in itertools.product(range(left.dim), repeat=2):
        structure[i][j][: left.dim] = list(left.structure[i][j])
    for i, j in itertools.product(range(right.dim), repeat=2):
        structure[left.dim + i][left.dim + j][left.dim :] = list(right.structure[i][j])
    labels = [f"{s}'" for s in left.labels] + [f"{s}''" for s in right.labels]
    return FiniteFpAlgebra.from_structure(
        left.p, structure, list(left.unit) + list(right.unit), labels
    )


# ---------------------------------------------------------------------------
# Enumeration of algebra maps
# ---------------------------------------------------------------------------

MAX_MAP_CANDIDATES = 2**16


def algebra_maps(
    source: FiniteFpAlgebra, target: FiniteFpAlgebra
) -> List[AlgebraMap]:
    """
    All unital F_p-algebra maps source -> target.

    Brute force over every linear map, so the candidate count
    p^(dim source * dim target) is capped at MAX_MAP_CANDIDATES.
    """
    if source.p != target.p:
        raise AlgebraError(
            f"No algebra maps between F_{source.p}- and F_{target.p}-algebras"
        )
    candidates = target.size() ** source.dim
    if candidates > MAX_MAP_CANDIDATES:
        raise AlgebraError(
            f"Refusing to enumerate {candidates} linear maps "
            f"{source.describe()} -> {target.describe()}.\n"
            f"Exhaustive map enumeration is bounded by p^(dim*dim) <= "
            f"{MAX_MAP_CANDIDATES}."
        )
    targets = target.sorted_elements()
    maps = []
    for images in itertools.product(targets, repeat=source.dim):
        candidate = AlgebraMap.from_images(source, target, images)
        if candidate.is_homomorphism():
            maps.append(candidate)
    logger.debug(
        "Found %d algebra maps among %d candidates %s -> %s",
        len(maps),
        candidates,
        source.describe(),
        target.describe(),
    )
    return maps
