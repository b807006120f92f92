"""Cross-validation of the fast walk engines against the generic route.

Every observable the engines report in O(1) (or via coefficient arrays) is
recomputed here through the slow, independently implemented pipeline:
matrix products -> canonical vertex forms -> Smith / Iwasawa valuations.
"""
import random

import pytest

from weylwalk.building import (
    BuildingParams,
    all_neighbors,
    base_vertex,
    busemann,
    canonicalize,
    sector_entry_level,
    vector_distance,
)
from weylwalk.engines import (
    FrameWalkState,
    ProductTracker,
    TreeWalkState,
    frame_candidates,
    tree_move_matrix,
)
from weylwalk.matrices import identity_matrix, smith_valuations


def _random_tree_path(q, length, seed):
    rng = random.Random(seed)
    return [rng.randrange(q + 1) for _ in range(length)]


@pytest.mark.parametrize("q", [2, 3])
def test_tree_moves_are_a_neighbour_transversal(q):
    """From any vertex, right-multiplying the canonical form by the q+1 move
    matrices reaches the q+1 distinct neighbours; a move-index walk on
    canonical forms is therefore a uniform nearest-neighbour walk."""
    params = BuildingParams(1, q)
    rng = random.Random(17 + q)
    starts = [base_vertex(params)]
    for _ in range(5):
        state = TreeWalkState(q)
        for move in [rng.randrange(q + 1) for _ in range(rng.randrange(1, 15))]:
            state.apply(move)
        starts.append(canonicalize(params, state.to_matrix()))
    for v in starts:
        reached = {
            canonicalize(params, v.matrix @ tree_move_matrix(q, m))
            for m in range(q + 1)
        }
        assert len(reached) == q + 1
        assert reached == set(all_neighbors(params, v))


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("seed", range(8))
def test_tree_state_tracks_building_observables(q, seed):
    """The O(1) coefficient surgery reproduces, step for step, the generic
    route v -> canonicalize(v.matrix @ move), and every closed-form
    observable matches its decomposition-based counterpart."""
    params = BuildingParams(1, q)
    base = base_vertex(params)
    state = TreeWalkState(q)
    v = base
    for move in _random_tree_path(q, 40, seed):
        state.apply(move)
        v = canonicalize(params, v.matrix @ tree_move_matrix(q, move))
        assert canonicalize(params, state.to_matrix()) == v
        assert state.h() == busemann(params, v)[0]
        assert state.dist() == vector_distance(params, base, v)[0]
        assert state.vertex_type() == v.type
        assert state.pi() == sector_entry_level(params, v)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_tree_exactly_one_up_move_everywhere(q):
    rng = random.Random(130 + q)
    for _ in range(40):
        state = TreeWalkState(q)
        for move in [rng.randrange(q + 1) for _ in range(rng.randrange(25))]:
            state.apply(move)
        effects = state.move_effects()
        ups = [m for m, dh, _ in effects if dh == 1]
        downs = [m for m, dh, _ in effects if dh == -1]
        assert len(ups) == 1 and ups[0] == state.up_move()
        assert len(downs) == q


@pytest.mark.parametrize("q", [2, 3])
def test_tree_entry_level_moves_only_at_hits(q):
    """pi is non-increasing under down-moves, drops by exactly 1 for exactly
    one of the q down-moves when h == pi, and is frozen when h < pi."""
    rng = random.Random(77 + q)
    prefixes = [[rng.randrange(q + 1) for _ in range(rng.randrange(30))] for _ in range(60)]
    # up-dominated paths end in hit states, keeping both branches exercised
    prefixes += [[0] * k for k in range(6)]
    prefixes += [[1, 1, 0, 0, 0], [2, 0, 0]]
    hit_states = 0
    for prefix in prefixes:
        state = TreeWalkState(q)
        for move in prefix:
            state.apply(move)
        effects = state.move_effects()
        up = state.up_move()
        down_dpis = [dpi for m, dh, dpi in effects if m != up]
        for m, dh, dpi in effects:
            if m == up:
                assert dpi == 1 if state.is_hit() else dpi == 0
        if state.is_hit():
            hit_states += 1
            assert sorted(down_dpis) == [-1] + [0] * (q - 1)
        else:
            assert down_dpis == [0] * q
    assert hit_states > 5


def test_frame_candidate_count_and_types():
    params = BuildingParams(2, 2)
    cands = frame_candidates(params)
    assert len(cands) == 14
    assert [c.nu_index for c in cands] == [1] * 7 + [2] * 7


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("seed", range(4))
def test_frame_classification_matches_building(q, seed):
    params = BuildingParams(2, q)
    state = FrameWalkState(params)
    cands = state.candidates
    g = identity_matrix(q, 3)
    rng = random.Random(900 + seed)
    base = base_vertex(params)
    for _ in range(4):
        v = canonicalize(params, g)
        here = busemann(params, v)
        for idx, nu, offset in state.classify():
            w = canonicalize(params, g @ cands[idx].rep)
            there = busemann(params, w)
            assert offset == tuple(b - a for a, b in zip(here, there))
            expected_nu = (1, 0) if nu == 1 else (0, 1)
            assert vector_distance(params, v, w) == expected_nu
        choice = rng.randrange(len(cands))
        predicted = dict((i, off) for i, _, off in state.classify())[choice]
        exps = state.apply(choice)
        assert (exps[0] - exps[1], exps[1] - exps[2]) == predicted
        g = g @ cands[choice].rep
        assert state.h_coords() == busemann(params, canonicalize(params, g))


@pytest.mark.parametrize("q", [2, 3])
def test_frame_truncation_is_pathwise_exact(q):
    params = BuildingParams(2, q)
    trunc = FrameWalkState(params, truncate=True)
    full = FrameWalkState(params, truncate=False)
    rng = random.Random(41 + q)
    for _ in range(8):
        table_t = trunc.classify()
        table_f = full.classify()
        assert table_t == table_f
        choice = rng.randrange(len(trunc.candidates))
        et = trunc.apply(choice)
        ef = full.apply(choice)
        assert et == ef
        assert trunc.mu == full.mu


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_product_tracker_matches_vector_distance(q, seed):
    params = BuildingParams(2, q)
    base = base_vertex(params)
    cands = frame_candidates(params)
    tracker = ProductTracker(q, capacity=12)
    g = identity_matrix(q, 3)
    rng = random.Random(555 + seed)
    for _ in range(12):
        choice = rng.randrange(len(cands))
        tracker.step(cands[choice])
        g = g @ cands[choice].rep
        assert tracker.cartan_coords() == vector_distance(
            params, base, canonicalize(params, g)
        )


def test_tracker_and_frame_share_the_same_path():
    """Driving the frame state and the tracker with the same candidate
    indices realises one walk: Cartan and Iwasawa data stay consistent
    (the Cartan coordinates majorise the Weyl orbit of the Busemann ones)."""
    q = 2
    params = BuildingParams(2, q)
    state = FrameWalkState(params)
    tracker = ProductTracker(q, capacity=20)
    rng = random.Random(7)
    g = identity_matrix(q, 3)
    for _ in range(20):
        choice = rng.randrange(len(state.candidates))
        exps = state.apply(choice)
        tracker.step(state.candidates[choice])
        g = g @ state.candidates[choice].rep
    v = canonicalize(params, g)
    base = base_vertex(params)
    assert state.h_coords() == busemann(params, v)
    assert tracker.cartan_coords() == vector_distance(params, base, v)
    # Iwasawa exponents of the product agree with the accumulated mu.
    from weylwalk.matrices import iwasawa_valuations

    assert state.mu == iwasawa_valuations(g)


def test_tree_long_run_is_cheap():
    state = TreeWalkState(2)
    rng = random.Random(3)
    for _ in range(20000):
        state.apply(rng.randrange(3))
    # closed-form observables stay available and consistent at scale
    assert state.dist() >= abs(state.h())
    assert state.pi() >= state.h()
