"""Finite root systems, Weyl groups, and exact chamber geometry.

Supported types: A_r (r >= 1) and C_r (r in 2..4).  All arithmetic is exact
(`fractions.Fraction`); norms are compared through their squares.

Vectors are stored in coweight coordinates: the i-th coordinate of x is the
pairing <x, alpha_i> with the i-th simple root, so x = sum_i x_i * omega_i
where omega_i are the fundamental coweights.  This makes dominance a
sign check and wall pairings a dot product with the root's simple-root
coefficient vector.  The Euclidean structure is carried by the Gram matrix of
the fundamental coweights, kept on the RootSystem.

Weyl group elements are enumerated eagerly at construction (breadth-first over
generator words, so each element's stored word is a reduced word that is
lexicographically least among its reduced words).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
RootCoeffs = tuple[int, ...]  # coefficients over the simple roots
Matrix = tuple[tuple[int, ...], ...]

_MAX_RANK = {"A": 4, "C": 4}
_MIN_RANK = {"A": 1, "C": 2}


def vec(*coords) -> Vector:
    """Convenience constructor: exact vector from ints/Fractions/strings."""
    return tuple(Fraction(c) for c in coords)


def _as_vector(x: Iterable) -> Vector:
    return tuple(Fraction(c) for c in x)


def _mat_vec(m: Matrix, x: Vector) -> Vector:
    return tuple(sum(row[k] * x[k] for k in range(len(x))) for row in m)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _fraction_inverse(mat: Sequence[Sequence[Fraction]]) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse by Gauss-Jordan; raises on singular input."""
    n = len(mat)
    aug = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [a * inv for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


@dataclass(frozen=True)
class WeylElement:
    """A Weyl group element: a reduced word and its matrix in coweight coordinates.

    The word (i_1, ..., i_k), with 1-based letters, denotes s_{i_1} ... s_{i_k};
    acting on vectors the last letter applies first.
    """

    word: tuple[int, ...]
    matrix: Matrix

    @property
    def length(self) -> int:
        return len(self.word)

    def apply(self, x: Vector) -> Vector:
        return _mat_vec(self.matrix, _as_vector(x))

    def __repr__(self) -> str:
        return f"WeylElement{self.word}"


@dataclass(frozen=True)
class Wall:
    """Affine wall H_{alpha,k} = {x : <x, alpha> = k} for a positive root alpha."""

    root: RootCoeffs
    level: int


@dataclass(frozen=True)
class Sector:
    """Translate base + w(fundamental chamber cone)."""

    base: Vector
    direction: WeylElement


class RootSystem:
    """Irreducible finite root system with its Weyl group, fully enumerated."""

    def __init__(self, kind: str, rank: int):
        if kind not in _MIN_RANK:
            raise ValueError(f"unsupported kind {kind!r} (want 'A' or 'C')")
        if not (_MIN_RANK[kind] <= rank <= _MAX_RANK[kind]):
            raise ValueError(
                f"rank {rank} out of range for {kind} "
                f"(supported {_MIN_RANK[kind]}..{_MAX_RANK[kind]})"
            )
        self.kind = kind
        self.rank = rank
        self.simple_gram = self._simple_gram(kind, rank)
        # cartan[i][j] = <alpha_i^vee, alpha_j>; integer by the crystallographic axiom
        self.cartan: Matrix = tuple(
            tuple(int(2 * self.simple_gram[i][j] / self.simple_gram[i][i]) for j in range(rank))
            for i in range(rank)
        )
        self.coweight_gram = _fraction_inverse(self.simple_gram)
        self._cartan_t_inv = _fraction_inverse(
            [[Fraction(self.cartan[i][j]) for i in range(rank)] for j in range(rank)]
        )
        self._build_roots()
        self._build_weyl()
        self._build_ambient()

    # -- construction ------------------------------------------------------
    @staticmethod
    def _simple_gram(kind: str, rank: int):
        g = [[Fraction(0)] * rank for _ in range(rank)]
        for i in range(rank):
            g[i][i] = Fraction(2)
        for i in range(rank - 1):
            g[i][i + 1] = g[i + 1][i] = Fraction(-1)
        if kind == "C":
            # long last simple root: alpha_r = 2 e_r
            g[rank - 1][rank - 1] = Fraction(4)
            if rank >= 2:
                g[rank - 2][rank - 1] = g[rank - 1][rank - 2] = Fraction(-2)
        return tuple(tuple(row) for row in g)

    def _root_reflect(self, i: int, a: RootCoeffs) -> RootCoeffs:
        # s_i acting on a root written over the simple roots
        pairing = sum(self.cartan[i][j] * a[j] for j in range(self.rank))
        out = list(a)
        out[i] -= pairing
        return tuple(out)

    def _build_roots(self) -> None:
        r = self.rank
        seen: set[RootCoeffs] = set()
        frontier = [tuple(int(i == j) for j in range(r)) for i in range(r)]
        seen.update(frontier)
        while frontier:
            nxt = []
            for a in frontier:
                for i in range(r):
                    b = self._root_reflect(i, a)
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
            frontier = nxt
        pos = sorted(
            (a for a in seen if all(c >= 0 for c in a)), key=lambda a: (sum(a), a)
        )
        self.roots: tuple[RootCoeffs, ...] = tuple(sorted(seen))
        self.positive_roots: tuple[RootCoeffs, ...] = tuple(pos)
        heights = [sum(a) for a in pos]
        top = max(heights)
        assert heights.count(top) == 1, "highest root must be unique"
        self.highest_root: RootCoeffs = pos[heights.index(top)]
        # coroot of each positive root, in coweight coordinates (integers)
        co = {}
        for a in pos:
            sa = [sum(self.simple_gram[i][j] * a[i] for i in range(r)) for j in range(r)]
            csq = sum(a[j] * sa[j] for j in range(r))
            entries = [2 * sa[j] / csq for j in range(r)]
            assert all(e.denominator == 1 for e in entries)
            co[a] = tuple(int(e) for e in entries)
        self.coroot_coords: dict[RootCoeffs, RootCoeffs] = co

    def _gen_matrix(self, i: int) -> Matrix:
        r = self.rank
        return tuple(
            tuple((1 if j == k else 0) - (self.cartan[i][j] if k == i else 0) for k in range(r))
            for j in range(r)
        )

    def _build_weyl(self) -> None:
        gens = [self._gen_matrix(i) for i in range(self.rank)]
        ident = _identity(self.rank)
        order: list[WeylElement] = [WeylElement((), ident)]
        seen = {ident: order[0]}
        queue = deque(order)
        while queue:
            w = queue.popleft()
            for i, g in enumerate(gens):
                m = _mat_mul(w.matrix, g)
                if m not in seen:
                    elt = WeylElement(w.word + (i + 1,), m)
                    seen[m] = elt
                    order.append(elt)
                    queue.append(elt)
        self.weyl: tuple[WeylElement, ...] = tuple(order)
        self._by_matrix = seen
        self.identity = order[0]
        top_len = order[-1].length
        assert sum(1 for w in order if w.length == top_len) == 1
        self.longest_element = order[-1]
        assert top_len == len(self.positive_roots)

    def _build_ambient(self) -> None:
        r = self.rank
        if self.kind == "A":
            n = r + 1
            simples = [
                tuple(Fraction(int(j == i) - int(j == i + 1)) for j in range(n))
                for i in range(r)
            ]
            coweights = [
                tuple(Fraction(int(j <= i), 1) - Fraction(i + 1, n) for j in range(n))
                for i in range(r)
            ]
        else:
            n = r
            simples = [
                tuple(Fraction(int(j == i) - int(j == i + 1)) for j in range(n))
                for i in range(r - 1)
            ]
            simples.append(tuple(Fraction(2 * int(j == r - 1)) for j in range(n)))
            coweights = [
                tuple(Fraction(int(j <= i)) for j in range(n)) for i in range(r - 1)
            ]
            coweights.append(tuple(Fraction(1, 2) for _ in range(n)))
        self.ambient_simple_roots = tuple(simples)
        self.ambient_coweights = tuple(coweights)

    # -- basic linear structure -------------------------------------------
    def zero(self) -> Vector:
        return (Fraction(0),) * self.rank

    def fundamental_coweight(self, i: int) -> Vector:
        """omega_i in coweight coordinates (1-based i)."""
        if not 1 <= i <= self.rank:
            raise ValueError(f"coweight index {i} out of range")
        return tuple(Fraction(int(j == i - 1)) for j in range(self.rank))

    def add(self, x: Iterable, y: Iterable) -> Vector:
        return tuple(a + b for a, b in zip(_as_vector(x), _as_vector(y), strict=True))

    def sub(self, x: Iterable, y: Iterable) -> Vector:
        return tuple(a - b for a, b in zip(_as_vector(x), _as_vector(y), strict=True))

    def smul(self, c, x: Iterable) -> Vector:
        c = Fraction(c)
        return tuple(c * a for a in _as_vector(x))

    def pairing(self, x: Iterable, root: RootCoeffs) -> Fraction:
        """<x, alpha> for alpha given by its simple-root coefficients."""
        x = _as_vector(x)
        return sum((a * c for a, c in zip(x, root, strict=True)), Fraction(0))

    def inner(self, x: Iterable, y: Iterable) -> Fraction:
        x, y = _as_vector(x), _as_vector(y)
        return sum(
            (x[i] * self.coweight_gram[i][j] * y[j] for i in range(self.rank) for j in range(self.rank)),
            Fraction(0),
        )

    def norm_sq(self, x: Iterable) -> Fraction:
        return self.inner(x, x)

    def distance_sq(self, x: Iterable, y: Iterable) -> Fraction:
        return self.norm_sq(self.sub(x, y))

    def is_dominant(self, x: Iterable) -> bool:
        return all(c >= 0 for c in _as_vector(x))

    # -- reflections and the Weyl action ----------------------------------
    def coroot(self, root: RootCoeffs) -> Vector:
        """alpha^vee in coweight coordinates, for alpha a positive root."""
        if root not in self.coroot_coords:
            raise ValueError(f"{root} is not a positive root")
        return tuple(Fraction(c) for c in self.coroot_coords[root])

    def reflect(self, wall: Wall, x: Iterable) -> Vector:
        """Affine reflection in H_{alpha,k}: x - (<x,alpha> - k) alpha^vee."""
        x = _as_vector(x)
        f = self.pairing(x, wall.root) - wall.level
        co = self.coroot(wall.root)
        return tuple(a - f * c for a, c in zip(x, co))

    def apply(self, w: WeylElement, x: Iterable) -> Vector:
        return w.apply(_as_vector(x))

    def compose(self, a: WeylElement, b: WeylElement) -> WeylElement:
        return self._by_matrix[_mat_mul(a.matrix, b.matrix)]

    def inverse(self, w: WeylElement) -> WeylElement:
        m = _identity(self.rank)
        for i in w.word:  # left-multiplying in word order reverses the product
            m = _mat_mul(self._gen_matrix(i - 1), m)
        return self._by_matrix[m]

    def orbit(self, x: Iterable) -> set[Vector]:
        x = _as_vector(x)
        return {w.apply(x) for w in self.weyl}

    def dominant_representative(self, x: Iterable) -> tuple[Vector, WeylElement]:
        """The dominant point x+ of W0.x and the minimal w with w(x+) = x.

        Among minimal-length witnesses the one with lexicographically least
        reduced word is returned (the eager Weyl table is scanned in
        (length, word) order).
        """
        x = _as_vector(x)
        dom = list(x)
        guard = 0
        while True:
            i = next((j for j in range(self.rank) if dom[j] < 0), None)
            if i is None:
                break
            f = dom[i]
            for j in range(self.rank):
                dom[j] -= f * self.cartan[i][j]
            guard += 1
            if guard > 10_000:
                raise AssertionError("dominance iteration failed to terminate")
        domv = tuple(dom)
        for w in self.weyl:
            if w.apply(domv) == x:
                return domv, w
        raise AssertionError("orbit scan failed")  # pragma: no cover

    def inversion_set(self, w: WeylElement) -> frozenset[RootCoeffs]:
        """{alpha > 0 : w^(-1)(alpha) < 0}; its size is the word length."""
        out = []
        for a in self.positive_roots:
            b = a
            for letter in w.word:  # applies w^{-1} to the root
                b = self._root_reflect(letter - 1, b)
            if all(c <= 0 for c in b):
                out.append(a)
        return frozenset(out)

    # -- lattices and vertex types ----------------------------------------
    def in_coweight_lattice(self, x: Iterable) -> bool:
        return all(Fraction(c).denominator == 1 for c in x)

    def in_coroot_lattice(self, x: Iterable) -> bool:
        x = _as_vector(x)
        coeffs = _mat_vec_frac(self._cartan_t_inv, x)
        return all(c.denominator == 1 for c in coeffs)

    def vertex_type(self, x: Iterable) -> int:
        """Type of a coweight-lattice point, constant on classes mod the coroot lattice.

        A_r: type(sum a_i omega_i) = sum i*a_i mod (r+1), so type(omega_i) = i.
        C_r: 0 on the coroot lattice, r elsewhere (omega_r is the only
        non-trivially special basis coweight).
        """
        x = _as_vector(x)
        if not self.in_coweight_lattice(x):
            raise ValueError(f"{x} is not a coweight-lattice point")
        if self.kind == "A":
            return int(sum((i + 1) * int(c) for i, c in enumerate(x))) % (self.rank + 1)
        return 0 if self.in_coroot_lattice(x) else self.rank

    # -- geometry of orbits -----------------------------------------------
    def vector_distance_apartment(self, x: Iterable, y: Iterable) -> Vector:
        """Dominant representative of y - x."""
        return self.dominant_representative(self.sub(y, x))[0]

    def orbit_separation_sq(self, x: Iterable) -> Fraction:
        """min ||w1 x - w2 x||^2 / ||x||^2 over distinct orbit points."""
        x = _as_vector(x)
        nsq = self.norm_sq(x)
        if nsq == 0:
            raise ValueError("separation constant needs a nonzero vector")
        pts = sorted(self.orbit(x))
        best = None
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = self.distance_sq(pts[i], pts[j])
                if best is None or d < best:
                    best = d
        if best is None:  # orbit is a single point
            raise ValueError("orbit of a W0-fixed vector has no separated pair")
        return best / nsq

    def orbit_separation_constant(self, x: Iterable) -> Fraction:
        """Rational lower bound for min d(w1 x, w2 x)/||x||, within 1e-9."""
        csq = self.orbit_separation_sq(x)
        scale = 10**9
        return Fraction(isqrt((csq.numerator * scale * scale) // csq.denominator), scale)

    def cat0_comparison_holds(self, o, a, b, t1, t2) -> bool:
        """Exact endpoint-interpolation comparison for geodesics from o to a, b.

        d^2(p(t1), q(t2)) <= t1(t1-t2) d^2(o,a) + t2(t2-t1) d^2(o,b)
                             + t1 t2 d^2(a,b),
        where p, q are the unit-time parametrisations of [o,a], [o,b].
        Holds with equality in the flat model; must never be False here.
        """
        o, a, b = _as_vector(o), _as_vector(a), _as_vector(b)
        t1, t2 = Fraction(t1), Fraction(t2)
        if not (0 <= t1 <= 1 and 0 <= t2 <= 1):
            raise ValueError("comparison parameters must lie in [0,1]")
        p = tuple(oo + t1 * (aa - oo) for oo, aa in zip(o, a))
        qq = tuple(oo + t2 * (bb - oo) for oo, bb in zip(o, b))
        lhs = self.distance_sq(p, qq)
        rhs = (
            t1 * (t1 - t2) * self.distance_sq(o, a)
            + t2 * (t2 - t1) * self.distance_sq(o, b)
            + t1 * t2 * self.distance_sq(a, b)
        )
        return lhs <= rhs

    # -- reporting ---------------------------------------------------------
    def ambient_root(self, root: RootCoeffs) -> Vector:
        dim = len(self.ambient_simple_roots[0])
        out = [Fraction(0)] * dim
        for c, simple in zip(root, self.ambient_simple_roots, strict=True):
            for j in range(dim):
                out[j] += c * simple[j]
        return tuple(out)

    def ambient_coroot(self, root: RootCoeffs) -> Vector:
        a = self.ambient_root(root)
        nsq = sum(c * c for c in a)
        return tuple(2 * c / nsq for c in a)

    def summary(self) -> dict:
        """JSON-ready description (fractions rendered as strings)."""
        fr = lambda v: [str(c) for c in v]
        return {
            "kind": self.kind,
            "rank": self.rank,
            "cartan": [list(row) for row in self.cartan],
            "simple_roots": [fr(v) for v in self.ambient_simple_roots],
            "simple_coroots": [
                fr(self.ambient_coroot(tuple(int(i == j) for j in range(self.rank))))
                for i in range(self.rank)
            ],
            "fundamental_coweights": [fr(v) for v in self.ambient_coweights],
            "positive_roots": [list(a) for a in self.positive_roots],
            "highest_root": list(self.highest_root),
            "weyl_order": len(self.weyl),
            "longest_word": list(self.longest_element.word),
        }


def _mat_vec_frac(m, x: Vector) -> Vector:
    return tuple(sum(row[k] * x[k] for k in range(len(x))) for row in m)


def build_root_system(kind: str, rank: int) -> RootSystem:
    """Construct the root system of the given type; see RootSystem."""
    return RootSystem(kind, rank)
