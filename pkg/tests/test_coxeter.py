"""Root-system and Weyl-group unit tests, with brute-force oracles."""
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylwalk.coxeter import RootSystem, Wall, build_root_system, vec

ALL_TYPES = [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("C", 2), ("C", 3), ("C", 4)]
_CACHE: dict[tuple[str, int], RootSystem] = {}


def rs_of(kind: str, rank: int) -> RootSystem:
    if (kind, rank) not in _CACHE:
        _CACHE[(kind, rank)] = build_root_system(kind, rank)
    return _CACHE[(kind, rank)]


def lattice_vec(rs: RootSystem, coords) -> tuple:
    return tuple(Q(c) for c in coords)


# -- construction invariants ------------------------------------------------

@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_weyl_group_order(kind, rank):
    import math

    rs = rs_of(kind, rank)
    expected = math.factorial(rank + 1) if kind == "A" else 2**rank * math.factorial(rank)
    assert len(rs.weyl) == expected
    assert rs.longest_element.length == len(rs.positive_roots)


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_root_counts(kind, rank):
    rs = rs_of(kind, rank)
    expected = rank * (rank + 1) if kind == "A" else 2 * rank * rank
    assert len(rs.roots) == expected
    assert len(rs.positive_roots) == expected // 2
    # roots come in opposite pairs
    root_set = set(rs.roots)
    for a in rs.roots:
        assert tuple(-c for c in a) in root_set


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_coroot_pairings(kind, rank):
    rs = rs_of(kind, rank)
    for a in rs.positive_roots:
        co = rs.coroot(a)
        assert rs.pairing(co, a) == 2
        # <alpha^vee, beta> is always an integer
        for b in rs.roots:
            assert rs.pairing(co, b).denominator == 1


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_gram_matches_ambient_model(kind, rank):
    """Coweight-coordinate Gram agrees with the explicit Euclidean model."""
    rs = rs_of(kind, rank)
    dim = len(rs.ambient_coweights[0])
    for i in range(rank):
        for j in range(rank):
            dot = sum(
                rs.ambient_coweights[i][k] * rs.ambient_coweights[j][k]
                for k in range(dim)
            )
            assert dot == rs.coweight_gram[i][j]
            # defining pairing: <omega_i, alpha_j> = delta_ij
            pair = sum(
                rs.ambient_coweights[i][k] * rs.ambient_simple_roots[j][k]
                for k in range(dim)
            )
            assert pair == (1 if i == j else 0)


def test_c2_explicit_data():
    """Rank-2 type-C data in the standard plane model, frozen exactly."""
    rs = rs_of("C", 2)
    assert rs.cartan == ((2, -2), (-1, 2))
    assert rs.ambient_simple_roots == (vec(1, -1), vec(0, 2))
    assert rs.ambient_coweights == (vec(1, 0), vec("1/2", "1/2"))
    assert rs.highest_root == (2, 1)
    assert rs.ambient_root((2, 1)) == vec(2, 0)
    assert rs.ambient_coroot((2, 1)) == vec(1, 0)
    assert rs.ambient_coroot((1, 0)) == vec(1, -1)
    assert rs.ambient_coroot((0, 1)) == vec(0, 1)
    assert rs.coweight_gram == (
        (Q(1), Q(1, 2)),
        (Q(1, 2), Q(1, 2)),
    )


# -- dominant representatives ----------------------------------------------

def brute_dominant(rs: RootSystem, x):
    """Oracle: scan the whole orbit/witness table independently."""
    dom = None
    for w in rs.weyl:
        y = w.apply(x)
        if rs.is_dominant(y):
            assert dom is None or dom == y  # dominant representative is unique
            dom = y
    witnesses = sorted(
        (w for w in rs.weyl if w.apply(dom) == x), key=lambda w: (w.length, w.word)
    )
    return dom, witnesses[0]


def test_dominant_representative_frozen_example():
    """-omega_1 in rank-2 type C: minimal witness has length 3, word (1,2,1)."""
    rs = rs_of("C", 2)
    dom, w = rs.dominant_representative(vec(-1, 0))
    assert dom == vec(1, 0)
    assert w.word == (1, 2, 1)
    assert w.length == 3
    b_dom, b_w = brute_dominant(rs, vec(-1, 0))
    assert (b_dom, b_w.word) == (dom, (1, 2, 1))


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_dominant_representative_matches_brute_force(kind, rank):
    import itertools
    import random

    rs = rs_of(kind, rank)
    rng = random.Random(7)
    samples = [tuple(Q(rng.randint(-3, 3)) for _ in range(rank)) for _ in range(25)]
    samples += [tuple(Q(c) for c in v) for v in itertools.product((-1, 0, 1), repeat=rank)][:20]
    for x in samples:
        dom, w = rs.dominant_representative(x)
        b_dom, b_w = brute_dominant(rs, x)
        assert dom == b_dom
        assert w.word == b_w.word
        assert w.apply(dom) == x
        assert rs.is_dominant(dom)


@given(
    data=st.data(),
    idx=st.integers(min_value=0, max_value=len(ALL_TYPES) - 1),
)
@settings(max_examples=60, deadline=None)
def test_dominant_is_orbit_invariant(data, idx):
    kind, rank = ALL_TYPES[idx]
    rs = rs_of(kind, rank)
    coords = data.draw(
        st.lists(st.integers(-4, 4), min_size=rank, max_size=rank)
    )
    x = tuple(Q(c) for c in coords)
    dom, _ = rs.dominant_representative(x)
    w = data.draw(st.sampled_from(rs.weyl))
    dom2, _ = rs.dominant_representative(w.apply(x))
    assert dom == dom2


# -- Weyl-group structure ---------------------------------------------------

@pytest.mark.parametrize("kind,rank", [("A", 2), ("C", 2), ("A", 3)])
def test_inversion_sets(kind, rank):
    rs = rs_of(kind, rank)
    for w in rs.weyl:
        inv = rs.inversion_set(w)
        assert len(inv) == w.length
    assert rs.inversion_set(rs.longest_element) == frozenset(rs.positive_roots)
    assert rs.inversion_set(rs.identity) == frozenset()


@pytest.mark.parametrize("kind,rank", [("A", 2), ("C", 2), ("C", 3)])
def test_compose_and_inverse(kind, rank):
    rs = rs_of(kind, rank)
    for w in rs.weyl:
        winv = rs.inverse(w)
        assert rs.compose(w, winv) == rs.identity
        assert winv.length == w.length
    a, b = rs.weyl[1], rs.weyl[-1]
    x = vec(*range(1, rank + 1))
    assert rs.compose(a, b).apply(x) == a.apply(b.apply(x))


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_weyl_words_are_sorted_and_reduced(kind, rank):
    rs = rs_of(kind, rank)
    keys = [(w.length, w.word) for w in rs.weyl]
    assert keys == sorted(keys)
    assert len({w.matrix for w in rs.weyl}) == len(rs.weyl)


@given(data=st.data())
@settings(max_examples=80, deadline=None)
def test_weyl_action_is_isometric(data):
    kind, rank = data.draw(st.sampled_from(ALL_TYPES))
    rs = rs_of(kind, rank)
    w = data.draw(st.sampled_from(rs.weyl))
    x = tuple(Q(c, 2) for c in data.draw(st.lists(st.integers(-8, 8), min_size=rank, max_size=rank)))
    y = tuple(Q(c, 2) for c in data.draw(st.lists(st.integers(-8, 8), min_size=rank, max_size=rank)))
    assert rs.distance_sq(w.apply(x), w.apply(y)) == rs.distance_sq(x, y)


# -- affine reflections -----------------------------------------------------

@pytest.mark.parametrize("kind,rank", [("A", 2), ("C", 2)])
def test_affine_reflection_properties(kind, rank):
    import random

    rs = rs_of(kind, rank)
    rng = random.Random(11)
    for _ in range(40):
        a = rs.positive_roots[rng.randrange(len(rs.positive_roots))]
        k = rng.randint(-2, 2)
        wall = Wall(a, k)
        x = tuple(Q(rng.randint(-9, 9), rng.choice((1, 2, 3))) for _ in range(rank))
        y = rs.reflect(wall, x)
        assert rs.reflect(wall, y) == x  # involution
        assert rs.pairing(y, a) == 2 * k - rs.pairing(x, a)  # mirrored pairing
        # fixed points of the wall stay fixed
        if rs.pairing(x, a) == k:
            assert y == x


# -- lattices and types -----------------------------------------------------

def test_vertex_types_basis_table():
    for kind, rank in ALL_TYPES:
        rs = rs_of(kind, rank)
        types = [rs.vertex_type(rs.fundamental_coweight(i)) for i in range(1, rank + 1)]
        if kind == "A":
            assert types == list(range(1, rank + 1))
        else:
            # only the last basis coweight leaves the coroot lattice in this model
            expected = [0] * rank
            expected[-1] = rank
            # middle coweights may or may not lie in Q depending on rank parity
            for i in range(1, rank + 1):
                omega = rs.fundamental_coweight(i)
                assert rs.vertex_type(omega) == (0 if rs.in_coroot_lattice(omega) else rank)
        assert rs.vertex_type(rs.zero()) == 0


@pytest.mark.parametrize("kind,rank", ALL_TYPES)
def test_vertex_type_invariant_mod_coroot_lattice(kind, rank):
    import random

    rs = rs_of(kind, rank)
    rng = random.Random(3)
    for _ in range(30):
        x = tuple(Q(rng.randint(-4, 4)) for _ in range(rank))
        a = rs.positive_roots[rng.randrange(len(rs.positive_roots))]
        shifted = rs.add(x, rs.coroot(a))
        assert rs.vertex_type(x) == rs.vertex_type(shifted)
        assert rs.in_coroot_lattice(rs.sub(shifted, x))


def test_coroot_lattice_membership():
    rs = rs_of("C", 2)
    assert rs.in_coroot_lattice(vec(1, 0))       # omega_1 = a1v + a2v
    assert not rs.in_coroot_lattice(vec(0, 1))   # omega_2 is strictly finer
    assert rs.in_coroot_lattice(vec(0, 2))
    a2 = rs_of("A", 2)
    assert not a2.in_coroot_lattice(vec(1, 0))
    assert a2.in_coroot_lattice(vec(2, -1))      # alpha_1^vee


# -- vector distance in an apartment ----------------------------------------

def test_vector_distance_apartment_examples():
    rs = rs_of("C", 2)
    o = rs.zero()
    assert rs.vector_distance_apartment(o, vec(1, 0)) == vec(1, 0)
    assert rs.vector_distance_apartment(o, vec(-1, 0)) == vec(1, 0)
    assert rs.vector_distance_apartment(vec(2, 1), vec(2, 1)) == o


@given(data=st.data())
@settings(max_examples=60, deadline=None)
def test_vector_distance_opposition_symmetry(data):
    """d(y,x) is the image of d(x,y) under the dominance involution -w0."""
    kind, rank = data.draw(st.sampled_from(ALL_TYPES))
    rs = rs_of(kind, rank)
    x = tuple(Q(c) for c in data.draw(st.lists(st.integers(-4, 4), min_size=rank, max_size=rank)))
    y = tuple(Q(c) for c in data.draw(st.lists(st.integers(-4, 4), min_size=rank, max_size=rank)))
    d_xy = rs.vector_distance_apartment(x, y)
    d_yx = rs.vector_distance_apartment(y, x)
    flipped = tuple(-c for c in rs.longest_element.apply(d_xy))
    assert d_yx == flipped
    # translation invariance
    t = tuple(Q(c) for c in data.draw(st.lists(st.integers(-3, 3), min_size=rank, max_size=rank)))
    assert rs.vector_distance_apartment(rs.add(x, t), rs.add(y, t)) == d_xy


# -- orbit separation -------------------------------------------------------

def test_orbit_separation_frozen_values():
    c2 = rs_of("C", 2)
    assert c2.orbit_separation_sq(vec(1, 0)) == 2
    a1 = rs_of("A", 1)
    assert a1.orbit_separation_sq(vec(1,)) == 4  # orbit {x, -x}, C = 2 exactly
    assert a1.orbit_separation_constant(vec(1,)) == 2
    c = c2.orbit_separation_constant(vec(1, 0))
    assert c * c <= 2 and abs(float(c) - 2**0.5) < 1e-8


@pytest.mark.parametrize("kind,rank", [("A", 2), ("A", 3), ("C", 2), ("C", 3)])
def test_orbit_separation_bounds_real_pairs(kind, rank):
    import random

    rs = rs_of(kind, rank)
    rng = random.Random(19)
    for _ in range(10):
        x = tuple(Q(rng.randint(-3, 3)) for _ in range(rank))
        if all(c == 0 for c in x):
            continue
        csq = rs.orbit_separation_sq(x)
        assert csq > 0
        pts = sorted(rs.orbit(x))
        nsq = rs.norm_sq(x)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                assert rs.distance_sq(pts[i], pts[j]) >= csq * nsq


# -- comparison inequality --------------------------------------------------

@given(data=st.data())
@settings(max_examples=120, deadline=None)
def test_cat0_comparison_never_fails(data):
    kind, rank = data.draw(st.sampled_from(ALL_TYPES))
    rs = rs_of(kind, rank)

    def pt():
        return tuple(
            Q(n, d)
            for n, d in zip(
                data.draw(st.lists(st.integers(-12, 12), min_size=rank, max_size=rank)),
                data.draw(st.lists(st.integers(1, 4), min_size=rank, max_size=rank)),
            )
        )

    o, a, b = pt(), pt(), pt()
    t1 = Q(data.draw(st.integers(0, 8)), 8)
    t2 = Q(data.draw(st.integers(0, 8)), 8)
    assert rs.cat0_comparison_holds(o, a, b, t1, t2)


def test_cat0_comparison_rejects_bad_parameters():
    rs = rs_of("A", 2)
    z = rs.zero()
    with pytest.raises(ValueError):
        rs.cat0_comparison_holds(z, z, z, Q(3, 2), 0)


# -- misc -------------------------------------------------------------------

def test_summary_shape():
    rs = rs_of("C", 2)
    s = rs.summary()
    assert s["kind"] == "C" and s["rank"] == 2
    assert s["weyl_order"] == 8
    assert s["highest_root"] == [2, 1]
    assert s["simple_roots"] == [["1", "-1"], ["0", "2"]]
    assert s["fundamental_coweights"] == [["1", "0"], ["1/2", "1/2"]]


def test_bad_construction_rejected():
    with pytest.raises(ValueError):
        build_root_system("B", 2)
    with pytest.raises(ValueError):
        build_root_system("A", 5)
    with pytest.raises(ValueError):
        build_root_system("C", 1)
