"""The affine building of PGL_{r+1} over F_q((t)): vertices, adjacency, metrics.

Vertices are homothety classes of o-lattices in F^n (n = r+1), encoded by a
canonical matrix representative:

* lower triangular, diagonal entries exact powers t^{-a_i};
* below-diagonal entries are Laurent polynomials reduced modulo t^{-a_i} * o
  (only exponents strictly below the pivot exponent survive);
* a global power of t normalizes sum(a_i) into {0, ..., r}.

Equal cosets gK (projectively) get identical canonical forms, so vertices are
hashable and sphere bookkeeping is exact.

Metrics: ``vector_distance`` returns the dominant coweight d(x, y) in
coweight coordinates (consecutive differences of the Cartan exponents);
``busemann`` returns the horospherical coweight h(x) (consecutive differences
of the Iwasawa exponents, position order).  Both are invariant under the
center, so they are well-defined on PGL.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

from .coxeter import RootSystem
from .field import RationalFunction, laurent_prefix, laurent_to_rf, validate_modulus
from .matrices import (
    RationalFunctionMatrix,
    identity_matrix,
    iwasawa_valuations,
    smith_valuations,
    translation_matrix,
)


@dataclass(frozen=True)
class BuildingParams:
    """Ambient data: rank r (vertices have r+1 types) and residue size q."""

    rank: int
    q: int

    def __post_init__(self):
        if not 1 <= self.rank <= 4:
            raise ValueError("rank must be in 1..4")
        validate_modulus(self.q)

    @property
    def n(self) -> int:
        return self.rank + 1

    @property
    def panel_orders(self) -> tuple[int, ...]:
        """q_i for i = 0..r; all equal to q here, so every wall is q-thick."""
        return (self.q,) * (self.rank + 1)


@lru_cache(maxsize=None)
def root_system_of(params: BuildingParams) -> RootSystem:
    return RootSystem("A", params.rank)


class Vertex:
    """A building vertex, held by its canonical matrix; use canonicalize()."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: RationalFunctionMatrix, _trusted: bool = False):
        if not _trusted:
            raise TypeError("construct vertices through canonicalize()")
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Vertex is immutable")

    @property
    def q(self) -> int:
        return self.matrix.q

    @property
    def diagonal_exponents(self) -> tuple[int, ...]:
        return tuple(
            -int(self.matrix[i, i].valuation()) for i in range(self.matrix.shape[0])
        )

    @property
    def type(self) -> int:
        return sum(self.diagonal_exponents)

    def in_standard_apartment(self) -> bool:
        n, _ = self.matrix.shape
        return all(
            self.matrix[i, j].is_zero() for i in range(n) for j in range(n) if i != j
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Vertex) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"Vertex({self.matrix!r})"


def canonicalize(params: BuildingParams, m: RationalFunctionMatrix) -> Vertex:
    """Canonical representative of the coset m * GL_n(o) modulo t-power scalars."""
    n = params.n
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix")
    q = m.q
    cols = [[m.rows[i][j] for i in range(n)] for j in range(n)]

    # lower-triangularize by column operations over o
    for i in range(n):
        best = None
        for j in range(i, n):
            f = cols[j][i]
            if f.is_zero():
                continue
            key = (f.valuation(), j)
            if best is None or key < best:
                best = key
        if best is None:
            raise ValueError("matrix is singular")
        j = best[1]
        cols[i], cols[j] = cols[j], cols[i]
        v = int(cols[i][i].valuation())
        unit = cols[i][i] / RationalFunction.t_power(q, v)
        inv = unit.inverse()
        cols[i] = [inv * e for e in cols[i]]
        for j in range(i + 1, n):
            f = cols[j][i]
            if not f.is_zero():
                factor = f / cols[i][i]
                cols[j] = [a - factor * b for a, b in zip(cols[j], cols[i])]

    # reduce below-diagonal residues modulo the pivot scale of their row
    for j in range(n):
        for i in range(j + 1, n):
            f = cols[j][i]
            if f.is_zero():
                continue
            stop = int(cols[i][i].valuation())
            low, coeffs = laurent_prefix(f, stop)
            prefix = laurent_to_rf(q, low, coeffs)
            rest = f - prefix
            if not rest.is_zero():
                factor = rest / cols[i][i]
                cols[j] = [a - factor * b for a, b in zip(cols[j], cols[i])]

    # normalize the determinant valuation into {0..r} with a global t-power
    total = sum(int(cols[i][i].valuation()) for i in range(n))
    target = (-total) % n
    s = (-total - target) // n
    if s:
        tp = RationalFunction.t_power(q, s)
        cols = [[tp * e for e in col] for col in cols]

    rows = ((cols[j][i] for j in range(n)) for i in range(n))
    return Vertex(RationalFunctionMatrix(q, rows), _trusted=True)


def base_vertex(params: BuildingParams) -> Vertex:
    return canonicalize(params, identity_matrix(params.q, params.n))


def act(params: BuildingParams, g: RationalFunctionMatrix, v: Vertex) -> Vertex:
    return canonicalize(params, g @ v.matrix)


# -- metrics ----------------------------------------------------------------

def vector_distance(params: BuildingParams, v: Vertex, w: Vertex) -> tuple[int, ...]:
    """d(v, w) in coweight coordinates: a dominant integer vector."""
    lam = smith_valuations(v.matrix.inverse() @ w.matrix)
    return tuple(lam[i] - lam[i + 1] for i in range(len(lam) - 1))


def busemann(params: BuildingParams, v: Vertex) -> tuple[int, ...]:
    """h(v) in coweight coordinates (integer vector, possibly non-dominant)."""
    mu = iwasawa_valuations(v.matrix)
    return tuple(mu[i] - mu[i + 1] for i in range(len(mu) - 1))


def coweight_to_gl_exponents(params: BuildingParams, coords) -> tuple[int, ...]:
    """Lift coweight coordinates to GL exponents (last entry 0)."""
    if len(coords) != params.rank:
        raise ValueError("coordinate length must equal the rank")
    out = [0]
    for c in reversed([int(c) for c in coords]):
        out.append(out[-1] + c)
    return tuple(reversed(out))


def sector_point(params: BuildingParams, coords) -> Vertex:
    """s0(lambda) = t_lambda . o for dominant lambda in coweight coordinates."""
    coords = [int(c) for c in coords]
    if any(c < 0 for c in coords):
        raise ValueError("sector points need dominant coordinates")
    exps = coweight_to_gl_exponents(params, coords)
    return canonicalize(params, translation_matrix(params.q, exps))


@dataclass(frozen=True)
class SectorRay:
    """The standard sector: dominant coweight points t_lambda . o."""

    params: BuildingParams

    def point(self, coords) -> Vertex:
        return sector_point(self.params, coords)


# -- adjacency --------------------------------------------------------------

def gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


@lru_cache(maxsize=None)
def neighbor_transversal(params: BuildingParams, i: int) -> tuple[RationalFunctionMatrix, ...]:
    """Coset representatives of K t_{omega_i} K / K at the base vertex.

    One representative k_V t_{omega_i} per i-dimensional subspace V of F_q^n:
    the neighbours of o with type shift i are the lattices between o^n and
    t^-1 o^n reducing to V inside F_q^n.
    """
    n, q = params.n, params.q
    if not 1 <= i <= params.rank:
        raise ValueError("type index out of range")
    t_omega = translation_matrix(q, tuple(int(a < i) for a in range(n)))
    reps = []
    for pivots in combinations(range(n), i):
        # reduced echelon pattern: row a is free at non-pivot columns past its pivot
        free_positions = [
            (a, j)
            for a in range(i)
            for j in range(n)
            if j not in pivots and j > pivots[a]
        ]
        for values in product(range(q), repeat=len(free_positions)):
            basis = [[0] * n for _ in range(i)]
            for a in range(i):
                basis[a][pivots[a]] = 1
            for (a, j), val in zip(free_positions, values):
                basis[a][j] = val
            k_cols = [[basis[a][row] for row in range(n)] for a in range(i)]
            k_cols += [
                [int(row == j) for row in range(n)]
                for j in range(n)
                if j not in pivots
            ]
            k_mat = RationalFunctionMatrix(
                q, ((k_cols[c][row] for c in range(n)) for row in range(n))
            )
            reps.append(k_mat @ t_omega)
    assert len(reps) == gaussian_binomial(n, i, q)
    return tuple(reps)


def neighbors(params: BuildingParams, v: Vertex, i: int) -> frozenset[Vertex]:
    """All vertices at vector distance omega_i from v."""
    return frozenset(
        canonicalize(params, v.matrix @ rep) for rep in neighbor_transversal(params, i)
    )


def all_neighbors(params: BuildingParams, v: Vertex) -> frozenset[Vertex]:
    out: set[Vertex] = set()
    for i in range(1, params.rank + 1):
        out |= neighbors(params, v, i)
    return frozenset(out)


MAX_SPHERE_HEIGHT = 4


def ball(params: BuildingParams, center: Vertex, steps: int) -> frozenset[Vertex]:
    """All vertices within `steps` fundamental neighbour moves of center."""
    if steps > MAX_SPHERE_HEIGHT:
        raise ValueError(f"ball radius capped at {MAX_SPHERE_HEIGHT}")
    seen = {center}
    frontier = {center}
    for _ in range(steps):
        nxt: set[Vertex] = set()
        for x in frontier:
            nxt |= all_neighbors(params, x)
        frontier = nxt - seen
        seen |= nxt
    return frozenset(seen)


def sphere(params: BuildingParams, center: Vertex, nu) -> frozenset[Vertex]:
    """{y : d(center, y) = nu} for nu in dominant coweight coordinates."""
    nu = tuple(int(c) for c in nu)
    if len(nu) != params.rank or any(c < 0 for c in nu):
        raise ValueError("nu must be dominant coweight coordinates")
    height = sum(nu)
    if height > MAX_SPHERE_HEIGHT:
        raise ValueError(f"sphere height capped at {MAX_SPHERE_HEIGHT}")
    return frozenset(
        y
        for y in ball(params, center, height)
        if vector_distance(params, center, y) == nu
    )


# -- the tree-case sector-entry map -----------------------------------------

def sector_entry_level(params: BuildingParams, v: Vertex) -> int:
    """Busemann level where the ray from v to the dominant end meets the
    standard apartment; rank 1 only.

    Follows the unique Busemann-increasing neighbour until the canonical form
    is diagonal, then reads off the Busemann value of that entry vertex.
    """
    if params.rank != 1:
        raise ValueError("sector_entry_level is defined for rank 1 only")
    current = v
    for _ in range(10_000):
        if current.in_standard_apartment():
            return busemann(params, current)[0]
        level = busemann(params, current)[0]
        ups = [
            y
            for y in neighbors(params, current, 1)
            if busemann(params, y)[0] == level + 1
        ]
        assert len(ups) == 1, "tree must have a unique end-facing neighbour"
        current = ups[0]
    raise AssertionError("ray failed to reach the standard apartment")
