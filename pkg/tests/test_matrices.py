"""Decomposition tests: known-answer roundtrips, invariance fuzz, dual routes."""
import random

import pytest

from randmat import (
    random_gl_with_known_cartan,
    random_gl_with_known_iwasawa,
    random_k_matrix,
    random_unitriangular,
)
from weylwalk.field import RationalFunction
from weylwalk.matrices import (
    RationalFunctionMatrix,
    identity_matrix,
    iwasawa_decomposition,
    iwasawa_valuations,
    iwasawa_valuations_by_minors,
    smith_decomposition,
    smith_valuations,
    smith_valuations_by_minors,
    translation_matrix,
)


# -- basic algebra ----------------------------------------------------------

def test_matrix_construction_and_coercion():
    m = RationalFunctionMatrix(2, [[1, "t"], [0, "1/t"]])
    assert m.shape == (2, 2)
    assert m[0, 1] == RationalFunction.t_power(2, 1)
    assert not m.is_integral()
    with pytest.raises(ValueError):
        RationalFunctionMatrix(2, [[1, 2], [3]])
    with pytest.raises(TypeError):
        RationalFunctionMatrix(2, [[1.5]])


def test_matmul_inverse_det():
    rng = random.Random(5)
    for q in (2, 5):
        for n in (2, 3, 4):
            a, _ = random_gl_with_known_cartan(rng, q, n, spread=2)
            ainv = a.inverse()
            assert a @ ainv == identity_matrix(q, n)
            assert ainv @ a == identity_matrix(q, n)
            prod = a.det() * ainv.det()
            assert prod == RationalFunction.one(q)


def test_translation_matrix_sign_convention():
    m = translation_matrix(3, [2, -1])
    assert m[0, 0] == RationalFunction.t_power(3, -2)
    assert m[1, 1] == RationalFunction.t_power(3, 1)
    assert m.det_valuation() == -1  # sum of -exponents


def test_in_maximal_compact():
    assert identity_matrix(2, 3).in_maximal_compact()
    assert not translation_matrix(2, [1, -1]).in_maximal_compact()
    scaled = identity_matrix(2, 2).scale(RationalFunction.t_power(2, 1))
    assert scaled.is_integral() and not scaled.in_maximal_compact()


# -- Smith (Cartan) ---------------------------------------------------------

def test_smith_of_translation_matrices():
    for exps in [(0, 0), (3, 1, -2), (1, 1, 1), (-1, -2)]:
        m = translation_matrix(5, exps)
        assert smith_valuations(m) == tuple(sorted(exps, reverse=True))


def test_smith_known_answer_roundtrips():
    rng = random.Random(101)
    for q in (2, 3, 5):
        for _ in range(25):
            n = rng.randint(2, 4)
            a, lam = random_gl_with_known_cartan(rng, q, n)
            dec = smith_decomposition(a)
            assert dec.exponents == lam
            assert dec.assemble() == a
            assert dec.k1.in_maximal_compact()
            assert dec.k2.in_maximal_compact()
            assert list(dec.exponents) == sorted(dec.exponents, reverse=True)


def test_smith_bi_invariance_fuzz():
    rng = random.Random(17)
    q = 3
    for _ in range(30):
        n = rng.randint(2, 4)
        a, lam = random_gl_with_known_cartan(rng, q, n, spread=2)
        k1 = random_k_matrix(rng, q, n)
        k2 = random_k_matrix(rng, q, n)
        assert smith_valuations(k1 @ a @ k2) == lam


def test_smith_inverse_reverses_and_negates():
    rng = random.Random(23)
    q = 2
    for _ in range(15):
        n = rng.randint(2, 4)
        a, lam = random_gl_with_known_cartan(rng, q, n, spread=2)
        flipped = tuple(-x for x in reversed(lam))
        assert smith_valuations(a.inverse()) == flipped


def test_smith_minors_route_agrees():
    rng = random.Random(31)
    for q in (2, 7):
        for _ in range(15):
            n = rng.randint(2, 4)
            a, lam = random_gl_with_known_cartan(rng, q, n, spread=2)
            b = a @ random_unitriangular(rng, q, n)
            assert smith_valuations_by_minors(b) == smith_valuations(b)


def test_smith_rejects_singular():
    m = RationalFunctionMatrix(2, [[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        smith_decomposition(m)
    with pytest.raises(ValueError):
        smith_valuations_by_minors(m)


# -- Iwasawa ----------------------------------------------------------------

def test_iwasawa_of_translation_is_positional():
    exps = (-1, 3, 0)
    assert iwasawa_valuations(translation_matrix(3, exps)) == exps


def test_iwasawa_known_answer_roundtrips():
    rng = random.Random(41)
    for q in (2, 3, 5):
        for _ in range(25):
            n = rng.randint(2, 4)
            a, mu = random_gl_with_known_iwasawa(rng, q, n)
            dec = iwasawa_decomposition(a)
            assert dec.exponents == mu
            assert dec.assemble() == a
            assert dec.u.is_upper_unitriangular()
            assert dec.k.in_maximal_compact()


def test_iwasawa_invariance_fuzz():
    rng = random.Random(43)
    q = 2
    for _ in range(30):
        n = rng.randint(2, 4)
        a, mu = random_gl_with_known_iwasawa(rng, q, n, spread=2)
        u = random_unitriangular(rng, q, n)
        k = random_k_matrix(rng, q, n)
        assert iwasawa_valuations(u @ a @ k) == mu


def test_iwasawa_minors_route_agrees():
    rng = random.Random(47)
    for q in (3, 5):
        for _ in range(15):
            n = rng.randint(2, 4)
            a, mu = random_gl_with_known_iwasawa(rng, q, n, spread=2)
            assert iwasawa_valuations_by_minors(a) == mu
            assert iwasawa_valuations_by_minors(a) == iwasawa_valuations(a)


def test_exponent_sums_match_determinant():
    rng = random.Random(53)
    q = 5
    for _ in range(20):
        n = rng.randint(2, 4)
        a, _ = random_gl_with_known_cartan(rng, q, n, spread=2)
        total = -a.det_valuation()
        assert sum(smith_valuations(a)) == total
        assert sum(iwasawa_valuations(a)) == total


def test_cartan_dominates_iwasawa():
    """Sorted horospherical exponents are majorized by the Cartan exponents."""
    rng = random.Random(59)
    q = 2
    for _ in range(25):
        n = rng.randint(2, 4)
        a, _ = random_gl_with_known_cartan(rng, q, n, spread=2)
        lam = smith_valuations(a)
        mu = tuple(sorted(iwasawa_valuations(a), reverse=True))
        assert sum(mu) == sum(lam)
        for k in range(1, n):
            assert sum(mu[:k]) <= sum(lam[:k])
