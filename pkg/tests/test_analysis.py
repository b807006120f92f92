"""Tests for drift estimators, orbit checks, and end-convergence statistics."""
from fractions import Fraction as Q

import pytest

from weylwalk.analysis import (
    DriftEstimate,
    check_orbit_relation,
    default_tolerance,
    empirical_busemann_drift,
    empirical_speed,
    end_convergence_stats,
    max_step_norm_bound,
    reduced_chain_hit_statistics,
    regularity_report,
    theorem_equivalence_check,
    theoretical_drift,
)
from weylwalk.building import BuildingParams
from weylwalk.coxeter import build_root_system
from weylwalk.matrices import translation_matrix
from weylwalk.walks import (
    CheckpointRecord,
    GroupWalkConfig,
    ReducedChainConfig,
    SemiIsotropicKernel,
    SemiIsotropicWalkConfig,
    Trajectory,
    WalkDataset,
    sample_trajectories,
)

TREE = BuildingParams(1, 2)
PGL3 = BuildingParams(2, 2)
A1 = build_root_system("A", 1)
A2 = build_root_system("A", 2)


def test_default_tolerance_floor():
    assert default_tolerance(0.0) == 0.02
    assert default_tolerance(0.01) == 0.04


def test_theoretical_drift_tree_isotropic():
    mu, lam = theoretical_drift(SemiIsotropicKernel.isotropic_nn(TREE))
    assert mu == (Q(-1, 3),)
    assert lam == (Q(1, 3),)


def test_theoretical_drift_rank2_isotropic():
    mu, lam = theoretical_drift(SemiIsotropicKernel.isotropic_nn(PGL3))
    assert mu == (Q(-3, 14), Q(-3, 14))
    assert lam == (Q(3, 14), Q(3, 14))


def test_theoretical_drift_symmetric_kernel_is_zero():
    mu, lam = theoretical_drift(SemiIsotropicKernel.drift_free_tree(TREE))
    assert mu == (Q(0),)
    assert lam == (Q(0),)


def _translation_dataset(params, coweight, n_steps):
    from weylwalk.building import coweight_to_gl_exponents

    t = translation_matrix(params.q, coweight_to_gl_exponents(params, coweight))
    config = GroupWalkConfig(params, ((t, Q(1)),))
    return sample_trajectories(config, n_steps, 2, base_seed=0, parallel=False)


def test_empirical_speed_deterministic_translation():
    ds = _translation_dataset(PGL3, (1, 0), 8)
    est = empirical_speed(ds)
    assert est.values == (1.0, 0.0)
    assert est.std_errors == (0.0, 0.0)
    drift = empirical_busemann_drift(ds)
    assert drift.values == (1.0, 0.0)


def test_empirical_speed_rejects_empty_or_static():
    with pytest.raises(ValueError, match="zero steps"):
        empirical_speed(_translation_dataset(TREE, (1,), 0))


def test_orbit_relation_identity_and_longest():
    dominant = (0.25, 0.4)
    check = check_orbit_relation(A2, dominant, dominant, tol=0.02)
    assert check.passed and check.witness_word == ()
    w0 = A2.longest_element
    image = tuple(float(c) for c in A2.apply(w0, (Q(1, 4), Q(2, 5))))
    check = check_orbit_relation(A2, dominant, image, tol=0.02)
    assert check.passed and check.witness_word == w0.word


def test_orbit_relation_tree_reflection():
    check = check_orbit_relation(A1, (0.334,), (-0.331,), tol=0.02)
    assert check.passed and check.witness_word == (1,)
    # far-off pair fails
    check = check_orbit_relation(A1, (0.334,), (0.1,), tol=0.02)
    assert not check.passed


def test_orbit_relation_scaling_invariance_of_witness():
    lam, mu = (0.31, 0.12), (0.12 - 0.31, 0.31 + 0.0)
    w1 = check_orbit_relation(A2, lam, mu, tol=10.0).witness_word
    w2 = check_orbit_relation(
        A2, tuple(3 * x for x in lam), tuple(3 * x for x in mu), tol=10.0
    ).witness_word
    assert w1 == w2


def test_regularity_report_deterministic_translation():
    ds = _translation_dataset(PGL3, (1, 0), 8)
    report = regularity_report(ds, (Q(1), Q(0)), field="lam")
    assert report.passed
    assert all(res == 0.0 for _, res in report.residuals)
    assert report.max_step <= report.step_bound + 1e-9


def test_step_probe_flags_teleporting_trajectory():
    recs = tuple(
        CheckpointRecord(0, n, (n,), (n if n < 5 else n + 40,)) for n in range(9)
    )
    forged = WalkDataset("iso", 1, "forged", (Trajectory(0, recs),))
    report = regularity_report(forged, (Q(1),), field="lam")
    assert not report.step_ok
    assert not report.passed
    assert report.max_step > max_step_norm_bound(A1)


def test_equivalence_check_tree_isotropic():
    kernel = SemiIsotropicKernel.isotropic_nn(TREE)
    config = SemiIsotropicWalkConfig(TREE, kernel)
    ds = sample_trajectories(config, 4000, 20, base_seed=21, parallel=False)
    report = theorem_equivalence_check(ds, kernel)
    assert report.cartan.passed and report.busemann.passed
    assert report.agree
    assert report.orbit.passed and report.orbit.witness_word == (1,)


def test_variance_shrinks_with_horizon():
    """CLT sanity: quadrupling the horizon shrinks the per-trajectory
    variance of the speed estimate by roughly that factor."""
    kernel = SemiIsotropicKernel.isotropic_nn(TREE)
    config = SemiIsotropicWalkConfig(TREE, kernel)
    short = sample_trajectories(config, 1000, 50, base_seed=31, parallel=False)
    long = sample_trajectories(config, 4000, 50, base_seed=32, parallel=False)
    se_short = empirical_speed(short).std_errors[0]
    se_long = empirical_speed(long).std_errors[0]
    ratio = (se_long / se_short) ** 2
    assert 0.1 < ratio < 0.7


def test_end_convergence_dataset_and_streaming_agree():
    config = ReducedChainConfig(q=2)
    n = 3000
    ds = sample_trajectories(
        config, n, 3, base_seed=17, checkpoints=range(n + 1), parallel=False
    )
    from_ds = end_convergence_stats(ds, config, y_threshold=5)
    streamed = reduced_chain_hit_statistics(
        config, n, 3, base_seed=17, y_threshold=5, parallel=False
    )
    assert from_ds.hit_count == streamed.hit_count
    assert from_ds.mean_z_at_hits == streamed.mean_z_at_hits
    assert from_ds.final_ys == streamed.final_ys
    assert from_ds.max_y == streamed.max_y
    assert from_ds.invariant_violations == streamed.invariant_violations == 0
    assert from_ds.theoretical_e == 0.25


def test_end_convergence_deterministic_up_chain():
    config = ReducedChainConfig(
        q=2, p_plus=Q(1), p_zero=Q(0), p_minus=Q(0), drift_free=False
    )
    report = reduced_chain_hit_statistics(
        config, 20, 2, base_seed=0, y_threshold=20, parallel=False
    )
    assert report.hit_count == 40  # every step of both runs is a hit
    assert report.mean_z_at_hits == 1.0
    assert report.theoretical_e == 0.5
    assert report.fraction_reaching_threshold == 1.0


def test_end_convergence_requires_reduced_dataset():
    ds = _translation_dataset(TREE, (1,), 3)
    with pytest.raises(ValueError, match="reduced"):
        end_convergence_stats(ds, ReducedChainConfig(q=2))
