"""Exact matrices over F_q(t): Smith and Iwasawa normal forms with transcripts.

Conventions
-----------
* o = F_q[[t]] cap F_q(t) is the valuation ring; K = GL_n(o) consists of the
  integral matrices whose determinant has valuation 0.
* For an integer vector lam, ``translation_matrix`` is diag(t^-lam_1, ...,
  t^-lam_n).  With this sign, larger exponents mean "further in the dominant
  direction" when lam is weakly decreasing.
* ``smith_decomposition(A)`` returns (k1, lam, k2) with A = k1 * t_lam * k2,
  k1, k2 in K and lam weakly decreasing: the Cartan exponents of A.
* ``iwasawa_decomposition(A)`` returns (u, mu, k) with A = u * t_mu * k,
  u upper unitriangular over F_q(t), k in K, and mu NOT reordered: the
  horospherical exponents of A read off position by position.

Both decompositions use deterministic pivoting (minimal valuation, ties broken
by smallest index) so transcripts are reproducible.  The *_by_minors variants
recompute the exponents through determinantal valuations only; they share no
elimination code and serve as independent cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .field import Poly, RationalFunction, parse_rational_function, validate_modulus

_INF = float("inf")


def _coerce(q: int, entry) -> RationalFunction:
    if isinstance(entry, RationalFunction):
        if entry.q != q:
            raise ValueError("mixed moduli in matrix")
        return entry
    if isinstance(entry, Poly):
        if entry.q != q:
            raise ValueError("mixed moduli in matrix")
        return RationalFunction.from_poly(entry)
    if isinstance(entry, int):
        return RationalFunction.const(q, entry)
    if isinstance(entry, str):
        return parse_rational_function(q, entry)
    raise TypeError(f"cannot use {type(entry).__name__} as a matrix entry")


class RationalFunctionMatrix:
    """Immutable matrix with entries in F_q(t)."""

    __slots__ = ("q", "rows")

    def __init__(self, q: int, rows: Iterable[Iterable]):
        validate_modulus(q)
        object.__setattr__(self, "q", q)
        coerced = tuple(tuple(_coerce(q, e) for e in row) for row in rows)
        if not coerced or not coerced[0]:
            raise ValueError("matrix needs at least one row and column")
        width = len(coerced[0])
        if any(len(row) != width for row in coerced):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", coerced)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunctionMatrix is immutable")

    # -- shape and access --------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij: tuple[int, int]) -> RationalFunction:
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple[RationalFunction, ...]:
        return tuple(row[j] for row in self.rows)

    # -- algebra -----------------------------------------------------------
    def __matmul__(self, other: "RationalFunctionMatrix") -> "RationalFunctionMatrix":
        if self.q != other.q:
            raise ValueError("mixed moduli")
        n, m = self.shape
        m2, p = other.shape
        if m != m2:
            raise ValueError("shape mismatch")
        zero = RationalFunction.zero(self.q)
        out = []
        for i in range(n):
            row = []
            for j in range(p):
                acc = zero
                for k in range(m):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return RationalFunctionMatrix(self.q, out)

    def scale(self, c: RationalFunction) -> "RationalFunctionMatrix":
        return RationalFunctionMatrix(
            self.q, ((c * e for e in row) for row in self.rows)
        )

    def transpose(self) -> "RationalFunctionMatrix":
        n, m = self.shape
        return RationalFunctionMatrix(
            self.q, ((self.rows[i][j] for i in range(n)) for j in range(m))
        )

    def det(self) -> RationalFunction:
        n, m = self.shape
        if n != m:
            raise ValueError("determinant of a non-square matrix")
        return _det(self.q, [list(row) for row in self.rows])

    def inverse(self) -> "RationalFunctionMatrix":
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        zero, one = RationalFunction.zero(self.q), RationalFunction.one(self.q)
        aug = [
            list(self.rows[i]) + [one if i == j else zero for j in range(n)]
            for i in range(n)
        ]
        for col in range(n):
            piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
            if piv is None:
                raise ValueError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = aug[col][col].inverse()
            aug[col] = [e * inv for e in aug[col]]
            for r in range(n):
                if r != col and not aug[r][col].is_zero():
                    f = aug[r][col]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
        return RationalFunctionMatrix(self.q, (row[n:] for row in aug))

    # -- integrality -------------------------------------------------------
    def is_integral(self) -> bool:
        return all(e.is_integral() for row in self.rows for e in row)

    def det_valuation(self) -> float:
        return self.det().valuation()

    def in_maximal_compact(self) -> bool:
        """True iff the matrix lies in K = GL_n(o)."""
        return self.is_integral() and self.det_valuation() == 0

    def is_upper_unitriangular(self) -> bool:
        n, m = self.shape
        if n != m:
            return False
        one = RationalFunction.one(self.q)
        for i in range(n):
            if self.rows[i][i] != one:
                return False
            for j in range(i):
                if not self.rows[i][j].is_zero():
                    return False
        return True

    # -- misc --------------------------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunctionMatrix)
            and self.q == other.q
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.q, self.rows))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(e) for e in row) for row in self.rows)
        return f"[{body}]"


def _det(q: int, rows: list[list[RationalFunction]]) -> RationalFunction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = RationalFunction.zero(q)
    for j, top in enumerate(rows[0]):
        if top.is_zero():
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in rows[1:]]
        term = top * _det(q, minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def identity_matrix(q: int, n: int) -> RationalFunctionMatrix:
    return RationalFunctionMatrix(
        q, ((int(i == j) for j in range(n)) for i in range(n))
    )


def translation_matrix(q: int, exponents: Sequence[int]) -> RationalFunctionMatrix:
    """diag(t^-e_1, ..., t^-e_n)."""
    n = len(exponents)
    zero = RationalFunction.zero(q)
    return RationalFunctionMatrix(
        q,
        (
            (
                RationalFunction.t_power(q, -exponents[i]) if i == j else zero
                for j in range(n)
            )
            for i in range(n)
        ),
    )


# -- elimination with transcripts -------------------------------------------

class _Transcript:
    """Mutable worksheet M with accumulated factors: A = left @ M @ right."""

    def __init__(self, a: RationalFunctionMatrix):
        n, m = a.shape
        if n != m:
            raise ValueError("decompositions need a square matrix")
        self.q = a.q
        self.n = n
        self.m = [list(row) for row in a.rows]
        one, zero = RationalFunction.one(a.q), RationalFunction.zero(a.q)
        self.left = [[one if i == j else zero for j in range(n)] for i in range(n)]
        self.right = [[one if i == j else zero for j in range(n)] for i in range(n)]

    # row ops touch `left`, column ops touch `right`
    def swap_rows(self, i, j):
        if i == j:
            return
        self.m[i], self.m[j] = self.m[j], self.m[i]
        for row in self.left:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for row in self.m:
            row[i], row[j] = row[j], row[i]
        self.right[i], self.right[j] = self.right[j], self.right[i]

    def add_row(self, dst, src, factor):
        """row_dst -= factor * row_src on M; compensated on the left."""
        self.m[dst] = [a - factor * b for a, b in zip(self.m[dst], self.m[src])]
        for row in self.left:
            row[src] = row[src] + factor * row[dst]

    def add_col(self, dst, src, factor):
        """col_dst -= factor * col_src on M; compensated on the right."""
        for row in self.m:
            row[dst] = row[dst] - factor * row[src]
        self.right[src] = [
            a + factor * b for a, b in zip(self.right[src], self.right[dst])
        ]

    def scale_row(self, i, unit):
        """row_i *= unit on M; left column i picks up unit^-1."""
        self.m[i] = [unit * e for e in self.m[i]]
        inv = unit.inverse()
        for row in self.left:
            row[i] = row[i] * inv

    def scale_col(self, j, unit):
        for k in range(self.n):
            self.m[k][j] = self.m[k][j] * unit
        inv = unit.inverse()
        self.right[j] = [inv * e for e in self.right[j]]

    def matrices(self):
        return (
            RationalFunctionMatrix(self.q, self.left),
            RationalFunctionMatrix(self.q, self.m),
            RationalFunctionMatrix(self.q, self.right),
        )


@dataclass(frozen=True)
class SmithDecomposition:
    k1: RationalFunctionMatrix
    exponents: tuple[int, ...]
    k2: RationalFunctionMatrix

    def assemble(self) -> RationalFunctionMatrix:
        return self.k1 @ translation_matrix(self.k1.q, self.exponents) @ self.k2


@dataclass(frozen=True)
class IwasawaDecomposition:
    u: RationalFunctionMatrix
    exponents: tuple[int, ...]
    k: RationalFunctionMatrix

    def assemble(self) -> RationalFunctionMatrix:
        return self.u @ translation_matrix(self.u.q, self.exponents) @ self.k


def smith_decomposition(a: RationalFunctionMatrix) -> SmithDecomposition:
    """A = k1 * diag(t^-lam_i) * k2 with k1, k2 in K and lam weakly decreasing."""
    tr = _Transcript(a)
    n = tr.n
    for k in range(n):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                f = tr.m[i][j]
                if f.is_zero():
                    continue
                key = (f.valuation(), i, j)
                if best is None or key < best:
                    best = key
        if best is None:
            raise ValueError("matrix is singular")
        _, pi, pj = best
        tr.swap_rows(k, pi)
        tr.swap_cols(k, pj)
        piv = tr.m[k][k]
        for i in range(k + 1, n):
            if not tr.m[i][k].is_zero():
                tr.add_row(i, k, tr.m[i][k] / piv)
        for j in range(k + 1, n):
            if not tr.m[k][j].is_zero():
                tr.add_col(j, k, tr.m[k][j] / piv)
    vals = []
    for k in range(n):
        v = tr.m[k][k].valuation()
        unit = tr.m[k][k] / RationalFunction.t_power(tr.q, int(v))
        tr.scale_row(k, unit.inverse())
        vals.append(int(v))
    # minimal-valuation pivoting makes vals weakly increasing already;
    # sort defensively so the contract never depends on that argument
    for k in range(n):
        j = min(range(k, n), key=lambda idx: vals[idx])
        if j != k:
            tr.swap_rows(k, j)
            tr.swap_cols(k, j)
            vals[k], vals[j] = vals[j], vals[k]
    left, mid, right = tr.matrices()
    exps = tuple(-v for v in vals)
    assert mid == translation_matrix(a.q, exps)
    return SmithDecomposition(left, exps, right)


def smith_valuations(a: RationalFunctionMatrix) -> tuple[int, ...]:
    """Cartan exponents of A: weakly decreasing."""
    return smith_decomposition(a).exponents


def iwasawa_decomposition(a: RationalFunctionMatrix) -> IwasawaDecomposition:
    """A = u * diag(t^-mu_i) * k with u upper unitriangular, k in K.

    Rows are processed bottom-up; the exponent vector keeps positional order.
    """
    tr = _Transcript(a)
    n = tr.n
    for i in range(n - 1, -1, -1):
        best = None
        for j in range(i + 1):
            f = tr.m[i][j]
            if f.is_zero():
                continue
            key = (f.valuation(), j)
            if best is None or key < best:
                best = key
        if best is None:
            raise ValueError("matrix is singular")
        tr.swap_cols(best[1], i)
        piv = tr.m[i][i]
        for j in range(i):
            if not tr.m[i][j].is_zero():
                tr.add_col(j, i, tr.m[i][j] / piv)
        for r in range(i):
            if not tr.m[r][i].is_zero():
                tr.add_row(r, i, tr.m[r][i] / piv)
    exps = []
    for i in range(n):
        v = int(tr.m[i][i].valuation())
        unit = tr.m[i][i] / RationalFunction.t_power(tr.q, v)
        tr.scale_col(i, unit.inverse())
        exps.append(-v)
    left, mid, right = tr.matrices()
    assert mid == translation_matrix(a.q, exps)
    return IwasawaDecomposition(left, tuple(exps), right)


def iwasawa_valuations(a: RationalFunctionMatrix) -> tuple[int, ...]:
    """Horospherical exponents of A, in matrix-position order."""
    return iwasawa_decomposition(a).exponents


# -- independent minor-based routes -----------------------------------------

def _minor_det(a: RationalFunctionMatrix, rows: Sequence[int], cols: Sequence[int]):
    return _det(a.q, [[a.rows[i][j] for j in cols] for i in rows])


def smith_valuations_by_minors(a: RationalFunctionMatrix) -> tuple[int, ...]:
    """Cartan exponents from determinantal valuations only.

    d_k = min valuation over k x k minors; the k-th exponent is d_{k-1} - d_k.
    """
    n, m = a.shape
    if n != m:
        raise ValueError("square matrices only")
    d = [0]
    for k in range(1, n + 1):
        best = _INF
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                det = _minor_det(a, rows, cols)
                if not det.is_zero():
                    best = min(best, det.valuation())
        if best is _INF:
            raise ValueError("matrix is singular")
        d.append(int(best))
    return tuple(d[k - 1] - d[k] for k in range(1, n + 1))


def iwasawa_valuations_by_minors(a: RationalFunctionMatrix) -> tuple[int, ...]:
    """Horospherical exponents from bottom-row minor valuations only.

    The sum of the last m exponents equals minus the minimal valuation over
    m x m minors drawn from the bottom m rows.
    """
    n, m = a.shape
    if n != m:
        raise ValueError("square matrices only")
    sums = [0]
    for size in range(1, n + 1):
        rows = tuple(range(n - size, n))
        best = _INF
        for cols in combinations(range(n), size):
            det = _minor_det(a, rows, cols)
            if not det.is_zero():
                best = min(best, det.valuation())
        if best is _INF:
            raise ValueError("matrix is singular")
        sums.append(-int(best))
    return tuple(sums[n - i] - sums[n - i - 1] for i in range(n))
