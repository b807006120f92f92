"""Estimators and limit-theorem checkers for walk datasets.

The limit statements under test are almost-sure asymptotics, so desk-scale
verification uses CLT-width bands: the default tolerance per coordinate is
max(4 * standard error, 0.02).  Exact quantities (theoretical drifts, orbit
representatives) are kept as rationals; empirical ones are floats.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction as Q

import numpy as np

from .building import root_system_of
from .coxeter import RootSystem
from .walks import (
    ReducedChainConfig,
    SemiIsotropicKernel,
    WalkDataset,
    _worker_count,
    derive_rng,
    factor_kernel,
)

TOLERANCE_FLOOR = 0.02


def default_tolerance(standard_error: float) -> float:
    return max(4.0 * standard_error, TOLERANCE_FLOOR)


def _norm(rs: RootSystem, coords) -> float:
    """Euclidean norm of a coweight-coordinate vector (root-system metric)."""
    g = rs.coweight_gram
    total = 0.0
    for i, a in enumerate(coords):
        for j, b in enumerate(coords):
            total += float(g[i][j]) * float(a) * float(b)
    return math.sqrt(max(total, 0.0))


def max_step_norm_bound(rs: RootSystem) -> float:
    """Largest possible one-step change of d(o, X_n) for a nearest-neighbour
    walk: the dominant-projection is nonexpanding, so one step moves d(o, .)
    by at most max_i ||omega_i||."""
    return max(_norm(rs, [1 if j == i else 0 for j in range(rs.rank)]) for i in range(rs.rank))


# ---------------------------------------------------------------------------
# drift estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftEstimate:
    values: tuple[float, ...]
    std_errors: tuple[float, ...]
    n_steps: int
    n_traj: int


def _per_trajectory_rates(dataset: WalkDataset, field: str) -> tuple[np.ndarray, int]:
    finals = dataset.final_records()
    if not finals:
        raise ValueError("empty dataset")
    n = finals[0].n
    if n == 0:
        raise ValueError("dataset has zero steps")
    rows = np.array([getattr(r, field) for r in finals], dtype=float) / n
    return rows, n


def _estimate(rows: np.ndarray, n: int) -> DriftEstimate:
    mean = rows.mean(axis=0)
    if rows.shape[0] >= 2:
        se = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    else:
        se = np.zeros(rows.shape[1])
    return DriftEstimate(
        tuple(float(x) for x in mean), tuple(float(x) for x in se), n, rows.shape[0]
    )


def empirical_speed(dataset: WalkDataset) -> DriftEstimate:
    """d(o, X_N) / N averaged over trajectories (coweight coordinates)."""
    return _estimate(*_per_trajectory_rates(dataset, "lam"))


def empirical_busemann_drift(dataset: WalkDataset) -> DriftEstimate:
    """h(X_N) / N averaged over trajectories (coweight coordinates)."""
    return _estimate(*_per_trajectory_rates(dataset, "h"))


def theoretical_drift(kernel: SemiIsotropicKernel) -> tuple[tuple[Q, ...], tuple[Q, ...]]:
    """(mu, lambda): exact factor-walk drift and its dominant representative."""
    rank = kernel.params.rank
    fk = factor_kernel(kernel)
    mu = tuple(
        sum((p * Q(m[i]) for m, p in fk.items()), Q(0)) for i in range(rank)
    )
    rs = root_system_of(kernel.params)
    lam, _ = rs.dominant_representative(mu)
    return mu, tuple(lam)


# ---------------------------------------------------------------------------
# orbit relation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitCheck:
    passed: bool
    witness_word: tuple[int, ...]
    residual: float


def check_orbit_relation(rs: RootSystem, lam_hat, mu_hat, tol: float) -> OrbitCheck:
    """Pass iff some Weyl image of lam_hat is within tol of mu_hat; the
    witness is the minimizing group element."""
    best = None
    for w in rs.weyl:
        image = rs.apply(w, tuple(Q(x).limit_denominator(10**9) for x in lam_hat))
        r = _norm(rs, [float(b) - float(a) for a, b in zip(image, mu_hat)])
        if best is None or r < best[0] or (r == best[0] and len(w.word) < len(best[1].word)):
            best = (r, w)
    residual, witness = best
    return OrbitCheck(bool(residual <= float(tol)), witness.word, float(residual))


# ---------------------------------------------------------------------------
# regularity checkers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    field: str  # "lam" (vector-distance side) or "h" (Busemann side)
    target: tuple[float, ...]
    estimate: DriftEstimate
    tolerances: tuple[float, ...]
    residuals: tuple[tuple[int, float], ...]  # (checkpoint n, max norm residual)
    max_step: float
    step_bound: float
    step_ok: bool
    drift_ok: bool

    @property
    def passed(self) -> bool:
        return self.step_ok and self.drift_ok


def regularity_report(
    dataset: WalkDataset,
    target,
    field: str = "lam",
    tolerances=None,
) -> RegularityReport:
    """Residuals ||obs/n - target|| per checkpoint plus the consecutive-step
    probe: adjacent checkpoints (n, n+1) must differ by at most one
    nearest-neighbour step in the root-system norm."""
    if field not in ("lam", "h"):
        raise ValueError("field must be 'lam' or 'h'")
    rs = root_system_of_dataset(dataset)
    est = _estimate(*_per_trajectory_rates(dataset, field))
    if tolerances is None:
        tolerances = tuple(default_tolerance(se) for se in est.std_errors)
    drift_ok = all(
        abs(v - float(t)) <= tol
        for v, t, tol in zip(est.values, target, tolerances)
    )
    residuals = {}
    max_step = 0.0
    bound = max_step_norm_bound(rs)
    for traj in dataset.trajectories:
        recs = traj.records
        for a, b in zip(recs, recs[1:]):
            if b.n == a.n + 1:
                step = _norm(rs, [y - x for x, y in zip(getattr(a, field), getattr(b, field))])
                max_step = max(max_step, step)
        for r in recs:
            if r.n == 0:
                continue
            res = _norm(
                rs,
                [v / r.n - float(t) for v, t in zip(getattr(r, field), target)],
            )
            residuals[r.n] = max(residuals.get(r.n, 0.0), res)
    return RegularityReport(
        field=field,
        target=tuple(float(t) for t in target),
        estimate=est,
        tolerances=tuple(tolerances),
        residuals=tuple(sorted(residuals.items())),
        max_step=max_step,
        step_bound=bound,
        step_ok=max_step <= bound + 1e-9,
        drift_ok=drift_ok,
    )


def root_system_of_dataset(dataset: WalkDataset) -> RootSystem:
    from .coxeter import build_root_system

    return build_root_system("A", dataset.rank)


@dataclass(frozen=True)
class EquivalenceReport:
    cartan: RegularityReport
    busemann: RegularityReport
    orbit: OrbitCheck

    @property
    def agree(self) -> bool:
        return self.cartan.passed == self.busemann.passed


def theorem_equivalence_check(
    dataset: WalkDataset, kernel: SemiIsotropicKernel
) -> EquivalenceReport:
    """Run the vector-distance-side and Busemann-side regularity checkers
    against the exact drifts of the kernel and relate the two limits by a
    Weyl orbit witness.  The two checkers must agree (pass together or fail
    together) for semi-isotropic walks."""
    mu, lam = theoretical_drift(kernel)
    cartan = regularity_report(dataset, lam, field="lam")
    busemann = regularity_report(dataset, mu, field="h")
    rs = root_system_of_dataset(dataset)
    speed = empirical_speed(dataset)
    drift = empirical_busemann_drift(dataset)
    tol = max(
        default_tolerance(max(speed.std_errors, default=0.0)),
        default_tolerance(max(drift.std_errors, default=0.0)),
    )
    orbit = check_orbit_relation(rs, speed.values, drift.values, tol)
    return EquivalenceReport(cartan, busemann, orbit)


# ---------------------------------------------------------------------------
# reduced-chain end-convergence statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EndConvergenceReport:
    n_runs: int
    n_steps: int
    hit_count: int
    mean_z_at_hits: float
    theoretical_e: float
    invariant_violations: int
    max_y: int
    final_ys: tuple[int, ...]
    y_threshold: int
    fraction_reaching_threshold: float


def _theoretical_e(config: ReducedChainConfig) -> float:
    return float((1 - Q(1, config.q)) * Q(config.p_plus))


def end_convergence_stats(
    dataset: WalkDataset, config: ReducedChainConfig, y_threshold: int = 50
) -> EndConvergenceReport:
    """Hit statistics from a reduced-chain dataset.  Hits are read off
    consecutive checkpoint pairs (n, n+1) with Xbar_n == Y_n, so the dataset
    schedule determines how many hitting events are visible."""
    if dataset.kind != "reduced":
        raise ValueError("end-convergence statistics need a reduced-chain dataset")
    hits = 0
    z_sum = 0
    violations = 0
    max_y = 0
    finals = []
    for traj in dataset.trajectories:
        recs = traj.records
        for r in recs:
            if r.y < r.xbar:
                violations += 1
            max_y = max(max_y, r.y)
        for a, b in zip(recs, recs[1:]):
            if b.n == a.n + 1 and a.xbar == a.y:
                hits += 1
                z_sum += b.y - a.y
        finals.append(recs[-1])
    frac = sum(1 for r in finals if r.y >= y_threshold) / len(finals)
    return EndConvergenceReport(
        n_runs=len(dataset.trajectories),
        n_steps=finals[0].n,
        hit_count=hits,
        mean_z_at_hits=(z_sum / hits) if hits else float("nan"),
        theoretical_e=_theoretical_e(config),
        invariant_violations=violations,
        max_y=max_y,
        final_ys=tuple(r.y for r in finals),
        y_threshold=y_threshold,
        fraction_reaching_threshold=frac,
    )


def _hit_stats_run(args):
    config, n_steps, base_seed, index = args
    rng = derive_rng(base_seed, index)
    probs = [float(config.p_plus), float(config.p_zero), float(config.p_minus)]
    incs = rng.choice(np.array([1, 0, -1]), size=n_steps, p=probs).tolist()
    coins = (rng.random(n_steps) < 1.0 / config.q).tolist()
    xbar = y = 0
    hits = z_sum = violations = max_y = 0
    for step in range(n_steps):
        inc = incs[step]
        if xbar == y:
            hits += 1
            if inc == 1:
                y += 1
                z_sum += 1
            elif inc == -1 and coins[step]:
                y -= 1
                z_sum -= 1
        xbar += inc
        if y < xbar:
            violations += 1
        if y > max_y:
            max_y = y
    return hits, z_sum, violations, max_y, y


def reduced_chain_hit_statistics(
    config: ReducedChainConfig,
    n_steps: int,
    n_runs: int,
    base_seed: int,
    y_threshold: int = 50,
    parallel: bool = True,
) -> EndConvergenceReport:
    """Streaming version of end_convergence_stats for long chains: identical
    per-step semantics (cross-validated in the tests), but nothing except the
    aggregates is materialized, so 50 runs of 10^6 steps fit in memory."""
    tasks = [(config, n_steps, base_seed, j) for j in range(n_runs)]
    workers = _worker_count(n_runs) if parallel else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_hit_stats_run, tasks))
    else:
        results = [_hit_stats_run(t) for t in tasks]
    hits = sum(r[0] for r in results)
    z_sum = sum(r[1] for r in results)
    violations = sum(r[2] for r in results)
    max_y = max(r[3] for r in results)
    finals = tuple(r[4] for r in results)
    frac = sum(1 for v in finals if v >= y_threshold) / n_runs
    return EndConvergenceReport(
        n_runs=n_runs,
        n_steps=n_steps,
        hit_count=hits,
        mean_z_at_hits=(z_sum / hits) if hits else float("nan"),
        theoretical_e=_theoretical_e(config),
        invariant_violations=violations,
        max_y=max_y,
        final_ys=finals,
        y_threshold=y_threshold,
        fraction_reaching_threshold=frac,
    )
