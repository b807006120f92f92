"""Fast exact walk engines for the rank-1 tree and the rank-2 building.

Both engines advance a nearest-neighbour walk one vertex per call while
keeping every reported observable exact; they are cross-validated against the
generic (matrix-product + decomposition) route in the test suite.

Tree engine (rank 1).  The canonical form of any PGL_2 vertex is
[[t^-a, 0], [c, t^-b]] with a+b in {0,1} and c a Laurent polynomial supported
on exponents [m, -b).  The q+1 neighbour moves act on (a, b, c) by O(1)
coefficient surgery, and the Busemann level h, the translation distance, and
the sector-entry level pi are closed-form in (a, b, m):

    h  = a - b                 if c = 0        else  a + b + 2m
    d  = |a - b|               if c = 0        else  2 max(a, b, -m) - (a+b)
    pi = h                     if c = 0        else  max(h, a + m)

Frame engine (rank 2).  A walk vertex is u t_mu k K; the engine stores mu and
a truncation kbar of k modulo t^3.  Replacing k by kbar is a legal
representative re-choice: kbar = k*(1 - k^-1 E) with E = 0 mod t^3, and the
compensator stays in K even after conjugation through one nearest-neighbour
step (the translation part spreads valuations by at most one, leaving two
orders to spare).  Hence the induced vertex path is unchanged, and Busemann
classes of all 14 candidate neighbours are computed exactly from kbar alone:
the needed bottom-row and bottom-2x2-minor valuations are provably at most 2
because the residue matrix of any K-element is invertible.

A numpy coefficient tracker maintains the rescaled polynomial product of the
chosen step matrices so Cartan checkpoints cost a few convolutions.
"""
from __future__ import annotations

import numpy as np

from .building import BuildingParams, neighbor_transversal
from .field import Poly, RationalFunction, laurent_prefix
from .matrices import (
    RationalFunctionMatrix,
    identity_matrix,
    iwasawa_decomposition,
    translation_matrix,
)

# ---------------------------------------------------------------------------
# rank 1: the (q+1)-regular tree
# ---------------------------------------------------------------------------


def tree_move_matrix(q: int, move: int) -> RationalFunctionMatrix:
    """Transversal of the q+1 neighbour cosets: move 0 is diag(t^-1, 1);
    move j >= 1 is [[gamma/t, 1], [1/t, 0]] with gamma = j-1."""
    if move == 0:
        return translation_matrix(q, (1, 0))
    gamma = move - 1
    if not 0 <= gamma < q:
        raise ValueError("move out of range")
    g = RationalFunction.t_power(q, -1)
    return RationalFunctionMatrix(
        q,
        [
            [RationalFunction.const(q, gamma) * g, RationalFunction.one(q)],
            [g, RationalFunction.zero(q)],
        ],
    )


class TreeWalkState:
    """Exact O(1)-per-step state of a vertex walk on the PGL_2 tree."""

    __slots__ = ("q", "a", "b", "low", "coeffs")

    def __init__(self, q: int):
        if q < 2:
            raise ValueError("thickness requires q >= 2")
        self.q = q
        self.a = 0
        self.b = 0
        self.low = 0
        self.coeffs: list[int] = []

    def copy(self) -> "TreeWalkState":
        out = TreeWalkState(self.q)
        out.a, out.b, out.low = self.a, self.b, self.low
        out.coeffs = list(self.coeffs)
        return out

    # -- observables -------------------------------------------------------
    def h(self) -> int:
        """Busemann level toward the dominant end (coweight coordinate)."""
        if not self.coeffs:
            return self.a - self.b
        return self.a + self.b + 2 * self.low

    def dist(self) -> int:
        """Vector distance from the base vertex (coweight coordinate)."""
        if not self.coeffs:
            return abs(self.a - self.b)
        return 2 * max(self.a, self.b, -self.low) - (self.a + self.b)

    def pi(self) -> int:
        """Sector-entry level: where the ray to the end meets the apartment."""
        if not self.coeffs:
            return self.h()
        return max(self.h(), self.a + self.low)

    def is_hit(self) -> bool:
        """True iff the vertex lies in its own entry sector (h == pi)."""
        return self.h() == self.pi()

    def vertex_type(self) -> int:
        return (self.a + self.b) % 2

    # -- dynamics ----------------------------------------------------------
    def up_move(self) -> int:
        """The unique move with Busemann increment +1 from this state."""
        return 0 if not self.coeffs else 1

    def apply(self, move: int) -> None:
        q = self.q
        if move == 0:
            self.a += 1
            if self.coeffs:
                self.low -= 1
        else:
            gamma = move - 1
            if not 0 <= gamma < q:
                raise ValueError("move out of range")
            if gamma == 0:
                self.b += 1
                if self.coeffs and self.low + len(self.coeffs) - 1 == -self.b:
                    self.coeffs.pop()
                    while self.coeffs and self.coeffs[-1] == 0:
                        self.coeffs.pop()
                    if not self.coeffs:
                        self.low = 0
            else:
                inv = pow(gamma, q - 2, q)
                self.a += 1
                if self.coeffs:
                    self.low -= 1
                    gap = (-self.b - 1) - (self.low + len(self.coeffs))
                    self.coeffs.extend([0] * gap)
                    self.coeffs.append(inv)
                else:
                    self.low = -self.b - 1
                    self.coeffs = [inv]
        if self.a + self.b == 2:  # strip the central t-power
            self.a -= 1
            self.b -= 1
            if self.coeffs:
                self.low += 1

    def move_effects(self) -> list[tuple[int, int, int]]:
        """(move, delta h, delta pi) for each of the q+1 moves."""
        out = []
        h0, p0 = self.h(), self.pi()
        for move in range(self.q + 1):
            probe = self.copy()
            probe.apply(move)
            out.append((move, probe.h() - h0, probe.pi() - p0))
        return out

    def to_matrix(self) -> RationalFunctionMatrix:
        q = self.q
        zero = RationalFunction.zero(q)
        if self.coeffs:
            c = RationalFunction.t_power(q, self.low) * RationalFunction.from_poly(
                Poly(q, self.coeffs)
            )
        else:
            c = zero
        return RationalFunctionMatrix(
            q,
            [
                [RationalFunction.t_power(q, -self.a), zero],
                [c, RationalFunction.t_power(q, -self.b)],
            ],
        )


# ---------------------------------------------------------------------------
# rank 2: mod-t^3 frame recursion for PGL_3
# ---------------------------------------------------------------------------

_Triple = tuple[int, int, int]
_PAIRS = ((0, 1), (0, 2), (1, 2))


def _tmul(x: _Triple, y: _Triple, q: int) -> _Triple:
    return (
        x[0] * y[0] % q,
        (x[0] * y[1] + x[1] * y[0]) % q,
        (x[0] * y[2] + x[1] * y[1] + x[2] * y[0]) % q,
    )


def _tsub(x: _Triple, y: _Triple, q: int) -> _Triple:
    return ((x[0] - y[0]) % q, (x[1] - y[1]) % q, (x[2] - y[2]) % q)


def _tadd(x: _Triple, y: _Triple, q: int) -> _Triple:
    return ((x[0] + y[0]) % q, (x[1] + y[1]) % q, (x[2] + y[2]) % q)


def _tval(x: _Triple) -> int:
    """Valuation readable from a mod-t^3 triple; 3 stands for 'at least 3'."""
    if x[0]:
        return 0
    if x[1]:
        return 1
    if x[2]:
        return 2
    return 3


def _poly_triple(f: RationalFunction) -> _Triple:
    if f.is_zero():
        return (0, 0, 0)
    low, coeffs = laurent_prefix(f, 3)
    assert low >= 0, "frame entries must be integral"
    out = [0, 0, 0]
    for k, c in enumerate(coeffs):
        if low + k < 3:
            out[low + k] = c
    return tuple(out)


class _Candidate:
    __slots__ = ("rep", "nu_index", "y_triples", "y2_triples", "np_const", "np_shift")

    def __init__(self, q: int, nu_index: int, rep: RationalFunctionMatrix):
        self.rep = rep
        self.nu_index = nu_index
        scaled = rep.scale(RationalFunction.t_power(q, 1))  # polynomial form
        self.y_triples = [
            [_poly_triple(scaled[i, j]) for j in range(3)] for i in range(3)
        ]
        # second compound matrix (2x2 minors indexed by row/column pairs)
        self.y2_triples = []
        for r1, r2 in _PAIRS:
            row = []
            for c1, c2 in _PAIRS:
                m = _tsub(
                    _tmul(self.y_triples[r1][c1], self.y_triples[r2][c2], q),
                    _tmul(self.y_triples[r1][c2], self.y_triples[r2][c1], q),
                    q,
                )
                row.append(m)
            self.y2_triples.append(row)
        # numpy form: entry = const * t^shift (shift in {0,1})
        self.np_const = np.zeros((3, 3), dtype=np.int64)
        self.np_shift = np.zeros((3, 3), dtype=np.int64)
        for i in range(3):
            for j in range(3):
                c0, c1, c2 = self.y_triples[i][j]
                assert c2 == 0, "step matrices are linear in t"
                if c1:
                    self.np_const[i, j] = c1
                    self.np_shift[i, j] = 1
                else:
                    self.np_const[i, j] = c0


def frame_candidates(params: BuildingParams) -> tuple[_Candidate, ...]:
    """The 14 nearest-neighbour step matrices of the rank-2 building,
    type-1 representatives first, in transversal order."""
    if params.rank != 2:
        raise ValueError("frame engine is specific to rank 2")
    out = []
    for i in (1, 2):
        for rep in neighbor_transversal(params, i):
            out.append(_Candidate(params.q, i, rep))
    return tuple(out)


class FrameWalkState:
    """Exact per-step Iwasawa tracking for a nearest-neighbour walk on the
    rank-2 building, with the K-factor truncated modulo t^3."""

    __slots__ = ("params", "candidates", "mu", "kbar", "truncate")

    def __init__(self, params: BuildingParams, truncate: bool = True):
        self.params = params
        self.candidates = frame_candidates(params)
        self.mu = (0, 0, 0)
        self.kbar = identity_matrix(params.q, 3)
        self.truncate = truncate

    def h_coords(self) -> tuple[int, int]:
        return (self.mu[0] - self.mu[1], self.mu[1] - self.mu[2])

    def classify(self) -> list[tuple[int, int, tuple[int, int]]]:
        """(candidate index, nu index, Busemann offset in coweight coords)
        for all 14 neighbour candidates of the current vertex."""
        q = self.params.q
        row2 = [_poly_triple(self.kbar[2, j]) for j in range(3)]
        m2 = []
        for c1, c2 in _PAIRS:
            m2.append(
                _tsub(
                    _tmul(_poly_triple(self.kbar[1, c1]), row2[c2], q),
                    _tmul(_poly_triple(self.kbar[1, c2]), row2[c1], q),
                    q,
                )
            )
        out = []
        for idx, cand in enumerate(self.candidates):
            m1_val = 3
            for c in range(3):
                acc = (0, 0, 0)
                for k in range(3):
                    acc = _tadd(acc, _tmul(row2[k], cand.y_triples[k][c], q), q)
                m1_val = min(m1_val, _tval(acc))
            m2_val = 3
            for cp in range(3):
                acc = (0, 0, 0)
                for kp in range(3):
                    acc = _tadd(acc, _tmul(m2[kp], cand.y2_triples[kp][cp], q), q)
                m2_val = min(m2_val, _tval(acc))
            assert m1_val <= 1 and m2_val <= 2, "residue invertibility bound"
            mu3 = 1 - m1_val
            mu23 = 2 - m2_val
            mu2 = mu23 - mu3
            mu1 = cand.nu_index - mu23
            out.append((idx, cand.nu_index, (mu1 - mu2, mu2 - mu3)))
        return out

    def apply(self, cand_index: int) -> tuple[int, int, int]:
        """Advance to the chosen neighbour; returns the exponent increment."""
        cand = self.candidates[cand_index]
        dec = iwasawa_decomposition(self.kbar @ cand.rep)
        self.mu = tuple(m + d for m, d in zip(self.mu, dec.exponents))
        if self.truncate:
            q = self.params.q
            rows = []
            for i in range(3):
                row = []
                for j in range(3):
                    e = dec.k[i, j]
                    if e.is_zero():
                        row.append(RationalFunction.zero(q))
                        continue
                    low, coeffs = laurent_prefix(e, 3)
                    assert low >= 0
                    padded = [0] * low + list(coeffs)
                    row.append(RationalFunction.from_poly(Poly(q, padded[:3])))
                rows.append(row)
            self.kbar = RationalFunctionMatrix(q, rows)
        else:
            self.kbar = dec.k
        return dec.exponents


class ProductTracker:
    """Coefficient arrays of the rescaled polynomial product of step matrices.

    After n steps the tracked matrix is t^n times the group element moving the
    base vertex to the current vertex; Cartan checkpoints come from minor
    valuations (the global t-power cancels in coweight coordinates).
    """

    __slots__ = ("q", "arr", "deg")

    def __init__(self, q: int, capacity: int):
        self.q = q
        self.arr = np.zeros((3, 3, capacity + 2), dtype=np.int64)
        for i in range(3):
            self.arr[i, i, 0] = 1
        self.deg = 0

    def step(self, cand: _Candidate) -> None:
        d = self.deg
        new = np.zeros((3, 3, d + 2), dtype=np.int64)
        old = self.arr[:, :, : d + 1]
        for c in range(3):
            for k in range(3):
                const = cand.np_const[k, c]
                if const == 0:
                    continue
                s = cand.np_shift[k, c]
                new[:, c, s : d + 1 + s] += const * old[:, k, :]
        self.deg = d + 1
        self.arr[:, :, : d + 2] = new % self.q
        self.arr[:, :, d + 2 :] = 0

    def _val(self, coeffs: np.ndarray) -> int | None:
        nz = np.nonzero(coeffs % self.q)[0]
        return int(nz[0]) if len(nz) else None

    def cartan_coords(self) -> tuple[int, int]:
        """d(base, current vertex) in coweight coordinates, via minors."""
        a = self.arr[:, :, : self.deg + 1]
        d1 = min(v for i in range(3) for j in range(3) if (v := self._val(a[i, j])) is not None)
        minors2 = {}
        vals2 = []
        for r1, r2 in _PAIRS:
            for c1, c2 in _PAIRS:
                m = np.convolve(a[r1, c1], a[r2, c2]) - np.convolve(a[r1, c2], a[r2, c1])
                minors2[((r1, r2), (c1, c2))] = m
                v = self._val(m)
                if v is not None:
                    vals2.append(v)
        d2 = min(vals2)
        det = None
        for j, (c1, c2) in zip(range(3), ((1, 2), (0, 2), (0, 1))):
            term = np.convolve(a[0, j], minors2[((1, 2), (c1, c2))])
            if j == 1:
                term = -term
            det = term if det is None else _padded_add(det, term)
        d3 = self._val(det)
        assert d3 is not None, "tracked product must stay invertible"
        lam1, lam2, lam3 = -d1, d1 - d2, d2 - d3
        return (lam1 - lam2, lam2 - lam3)


def _padded_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = max(len(x), len(y))
    out = np.zeros(n, dtype=np.int64)
    out[: len(x)] += x
    out[: len(y)] += y
    return out
