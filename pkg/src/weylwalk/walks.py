"""Seeded walk simulations on the building and their lattice factor walks.

Three walk families share one trajectory harness:

* group walks — right multiplication by i.i.d. samples from a finitely
  supported generator measure, observables read off the accumulated product;
* semi-isotropic vertex walks — transition probability depends only on the
  vector distance and the Busemann offset of the step; sampling factorises
  as class-then-uniform, with fast exact engines for ranks 1 and 2;
* reduced chains — the one-coordinate (level, record) chain used to study
  convergence to the dominant end.

Determinism contract: trajectory j of a run with base seed s draws from a
counter-based stream seeded by (s, j), so datasets are reproducible and
disjoint seed ranges merge cleanly.
"""
from __future__ import annotations

import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction as Q

import numpy as np

from .building import (
    BuildingParams,
    Vertex,
    base_vertex,
    busemann,
    sphere,
    vector_distance,
)
from .engines import FrameWalkState, ProductTracker, TreeWalkState
from .matrices import (
    RationalFunctionMatrix,
    identity_matrix,
    iwasawa_valuations,
    smith_valuations,
)

# ---------------------------------------------------------------------------
# RNG plumbing
# ---------------------------------------------------------------------------


def derive_rng(base_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for trajectory `index` of a run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([base_seed, index])))


def _sample_index(rng: np.random.Generator, cumulative: list[float]) -> int:
    u = rng.random()
    for k, c in enumerate(cumulative):
        if u < c:
            return k
    return len(cumulative) - 1


def _cumulative(probs) -> list[float]:
    acc, out = 0.0, []
    for p in probs:
        acc += float(p)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# configs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupWalkConfig:
    """Right random walk X_n = g_1 ... g_n o with finitely supported step law."""

    params: BuildingParams
    generators: tuple[tuple[RationalFunctionMatrix, Q], ...]

    def __post_init__(self):
        n = self.params.rank + 1
        if not self.generators:
            raise ValueError("generator measure must be nonempty")
        total = Q(0)
        for g, p in self.generators:
            if g.shape != (n, n) or g.q != self.params.q:
                raise ValueError("generator has wrong shape or coefficient field")
            p = Q(p)
            if p <= 0:
                raise ValueError("generator probabilities must be positive")
            total += p
        if total != 1:
            raise ValueError("generator probabilities must sum to 1")


class SemiIsotropicKernel:
    """Step law p_{nu,mu} on classes (vector distance nu, Busemann offset mu).

    Support is restricted to nearest-neighbour classes nu in {omega_i} (plus
    the formal stay-put class nu = 0).  Total mass is validated against the
    exact class-size oracle: sum of p_{nu,mu} * c_{nu,mu} over the support
    must equal 1.
    """

    __slots__ = ("params", "entries", "label")

    def __init__(self, params: BuildingParams, entries, label: str = "custom"):
        self.params = params
        rank = params.rank
        zero = (0,) * rank
        fundamental = {
            tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)
        }
        table: dict[tuple[tuple[int, ...], tuple[int, ...]], Q] = {}
        for (nu, mu), p in dict(entries).items():
            nu, mu = tuple(nu), tuple(mu)
            p = Q(p)
            if p <= 0:
                raise ValueError("kernel probabilities must be positive")
            if nu != zero and nu not in fundamental:
                raise ValueError("kernel support must be nearest-neighbour classes")
            if nu == zero and mu != zero:
                raise ValueError("stay-put class must have zero offset")
            table[(nu, mu)] = p
        self.entries = table
        self.label = label
        mass = sum(
            (p * count_c(params, nu, mu) for (nu, mu), p in table.items()), Q(0)
        )
        if mass != 1:
            raise ValueError(f"kernel mass {mass} != 1 against the class-size oracle")

    # -- standard kernels --------------------------------------------------
    @classmethod
    def isotropic_nn(cls, params: BuildingParams) -> "SemiIsotropicKernel":
        """Uniform measure on all nearest neighbours of every type."""
        total = sum(
            count_c(params, nu, mu)
            for nu, mu in _nn_classes(params)
        )
        p = Q(1, total)
        return cls(
            params, {cl: p for cl in _nn_classes(params)}, label="isotropic_nn"
        )

    @classmethod
    def drift_free_tree(cls, params: BuildingParams) -> "SemiIsotropicKernel":
        """Rank-1 kernel whose factor walk is a symmetric +-1 walk."""
        if params.rank != 1:
            raise ValueError("drift-free tree kernel requires rank 1")
        q = params.q
        return cls(
            params,
            {((1,), (1,)): Q(1, 2), ((1,), (-1,)): Q(1, 2 * q)},
            label="drift_free_tree",
        )

    @classmethod
    def stay_put(cls, params: BuildingParams) -> "SemiIsotropicKernel":
        zero = (0,) * params.rank
        return cls(params, {(zero, zero): Q(1)}, label="stay_put")

    def items_text(self) -> str:
        parts = []
        for (nu, mu), p in sorted(self.entries.items()):
            nu_s = ",".join(str(c) for c in nu)
            mu_s = ",".join(str(c) for c in mu)
            parts.append(f"nu={nu_s} mu={mu_s} p={p}")
        return "; ".join(parts)


def kernel_from_lines(params: BuildingParams, lines) -> SemiIsotropicKernel:
    """Parse 'nu=<coords> mu=<coords> p=<rational>' lines into a kernel."""
    entries = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = dict(part.split("=", 1) for part in line.split())
        if set(fields) != {"nu", "mu", "p"}:
            raise ValueError(f"malformed kernel line: {raw!r}")
        nu = tuple(int(c) for c in fields["nu"].split(","))
        mu = tuple(int(c) for c in fields["mu"].split(","))
        entries[(nu, mu)] = Q(fields["p"])
    return SemiIsotropicKernel(params, entries, label="file")


@dataclass(frozen=True)
class SemiIsotropicWalkConfig:
    """Vertex walk driven by a semi-isotropic kernel.

    engine: 'auto' picks the exact fast engine for ranks 1 and 2 and the
    generic sphere-enumeration route otherwise; 'generic' forces the slow
    route (used for cross-validation).
    """

    params: BuildingParams
    kernel: SemiIsotropicKernel
    engine: str = "auto"

    def __post_init__(self):
        if self.engine not in ("auto", "generic"):
            raise ValueError("engine must be 'auto' or 'generic'")
        if self.kernel.params != self.params:
            raise ValueError("kernel built for different building parameters")


@dataclass(frozen=True)
class ReducedChainConfig:
    """One-coordinate (level, record) chain with i.i.d. level increments."""

    q: int
    p_plus: Q = Q(1, 2)
    p_zero: Q = Q(0)
    p_minus: Q = Q(1, 2)
    drift_free: bool = True

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("residue parameter must be at least 2")
        ps = (Q(self.p_plus), Q(self.p_zero), Q(self.p_minus))
        if any(p < 0 for p in ps) or sum(ps) != 1:
            raise ValueError("increment law must be a probability vector")
        if self.drift_free and ps[0] != ps[2]:
            raise ValueError("drift-free chain requires P[+1] == P[-1]")


# ---------------------------------------------------------------------------
# class-size oracle and the factor walk
# ---------------------------------------------------------------------------


def _nn_classes(params: BuildingParams):
    """All nearest-neighbour classes (nu, mu) with positive size, at base."""
    rank = params.rank
    base = base_vertex(params)
    out = []
    for i in range(rank):
        nu = tuple(1 if j == i else 0 for j in range(rank))
        offsets = sorted(
            {
                tuple(b - a for a, b in zip(busemann(params, base), busemann(params, y)))
                for y in sphere(params, base, nu)
            }
        )
        out.extend((nu, mu) for mu in offsets)
    return out


def count_c(params: BuildingParams, nu, mu, x: Vertex | None = None) -> int:
    """Exact size of the class {y : d(x,y) = nu, h(y) - h(x) = mu}.

    Computed by sphere enumeration around x; homogeneity (independence of x)
    is a tested property of the building, not an assumption of this function.
    """
    nu, mu = tuple(nu), tuple(mu)
    zero = (0,) * params.rank
    if nu == zero:
        return 1 if mu == zero else 0
    if x is None:
        x = base_vertex(params)
    here = busemann(params, x)
    count = 0
    for y in sphere(params, x, nu):
        offset = tuple(b - a for a, b in zip(here, busemann(params, y)))
        if offset == mu:
            count += 1
    return count


def factor_kernel(kernel: SemiIsotropicKernel) -> dict[tuple[int, ...], Q]:
    """Induced walk of the Busemann values: pbar(0, mu) = sum_nu p * c."""
    out: dict[tuple[int, ...], Q] = {}
    for (nu, mu), p in kernel.entries.items():
        c = count_c(kernel.params, nu, mu)
        if c:
            out[mu] = out.get(mu, Q(0)) + p * c
    assert sum(out.values()) == 1
    return out


def factor_probability(kernel: SemiIsotropicKernel, lam, mu) -> Q:
    """pbar(lam, mu); translation invariance holds by construction."""
    offset = tuple(m - l for l, m in zip(lam, mu))
    return factor_kernel(kernel).get(offset, Q(0))


# ---------------------------------------------------------------------------
# single-step operations
# ---------------------------------------------------------------------------


def step_group_walk(
    state: RationalFunctionMatrix, config: GroupWalkConfig, rng: np.random.Generator
) -> RationalFunctionMatrix:
    cum = _cumulative(p for _, p in config.generators)
    g, _ = config.generators[_sample_index(rng, cum)]
    return state @ g


def class_decomposition(
    kernel: SemiIsotropicKernel, x: Vertex
) -> list[tuple[tuple[int, ...], tuple[int, ...], Q, list[Vertex]]]:
    """(nu, mu, class probability p*|class|, sorted members) at the vertex x.

    Shared by the generic sampler and by the law cross-checks: the class
    weights must sum to 1 at every vertex (homogeneity of the building)."""
    params = kernel.params
    zero = (0,) * params.rank
    here = busemann(params, x)
    out = []
    for (nu, mu), p in sorted(kernel.entries.items()):
        members: list[Vertex]
        if nu == zero:
            members = [x]
        else:
            members = sorted(
                (
                    y
                    for y in sphere(params, x, nu)
                    if tuple(b - a for a, b in zip(here, busemann(params, y))) == mu
                ),
                key=lambda v: repr(v.matrix),
            )
        if members:
            out.append((nu, mu, p * len(members), members))
    total = sum((w for _, _, w, _ in out), Q(0))
    assert total == 1, "kernel mass must be 1 at every vertex (homogeneity)"
    return out


def step_semi_isotropic(
    x: Vertex, kernel: SemiIsotropicKernel, rng: np.random.Generator
) -> Vertex:
    """Generic route: choose a class with probability p*c, then a uniform
    member of the class by explicit sphere enumeration."""
    classes = class_decomposition(kernel, x)
    pick = _sample_index(rng, _cumulative(w for _, _, w, _ in classes))
    members = classes[pick][3]
    return members[rng.integers(0, len(members))]


def step_reduced_chain(
    state: tuple[int, int], config: ReducedChainConfig, rng: np.random.Generator
) -> tuple[int, int]:
    xbar, y = state
    if y < xbar:
        raise ValueError("reduced chain requires Y >= Xbar")
    cum = _cumulative((config.p_plus, config.p_zero, config.p_minus))
    inc = (1, 0, -1)[_sample_index(rng, cum)]
    z = 0
    if xbar == y:
        if inc == 1:
            z = 1
        elif inc == -1:
            z = -1 if rng.random() < 1.0 / config.q else 0
    return (xbar + inc, y + z)


# ---------------------------------------------------------------------------
# trajectory harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckpointRecord:
    traj: int
    n: int
    h: tuple[int, ...]
    lam: tuple[int, ...]
    xbar: int | None = None
    y: int | None = None


@dataclass(frozen=True)
class Trajectory:
    index: int
    records: tuple[CheckpointRecord, ...]


@dataclass(frozen=True)
class WalkDataset:
    kind: str  # group | iso | reduced
    rank: int
    config_text: str
    trajectories: tuple[Trajectory, ...]

    def records(self):
        for t in self.trajectories:
            yield from t.records

    def final_records(self) -> list[CheckpointRecord]:
        return [t.records[-1] for t in self.trajectories]

    # -- CSV serialization -------------------------------------------------
    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# weylwalk-walk v1\n")
        out.write(f"# config: kind={self.kind} rank={self.rank} {self.config_text}\n")
        if self.kind == "reduced":
            out.write("traj,n,xbar,y\n")
            for r in self.records():
                out.write(f"{r.traj},{r.n},{r.xbar},{r.y}\n")
        else:
            hs = ",".join(f"h_{i+1}" for i in range(self.rank))
            ls = ",".join(f"lam_{i+1}" for i in range(self.rank))
            out.write(f"traj,n,{hs},{ls}\n")
            for r in self.records():
                vals = [str(Q(v)) for v in (*r.h, *r.lam)]
                out.write(f"{r.traj},{r.n}," + ",".join(vals) + "\n")
        return out.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "WalkDataset":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "# weylwalk-walk v1":
            raise ValueError("not a weylwalk walk file")
        if not lines[1].startswith("# config: "):
            raise ValueError("missing config header")
        config_line = lines[1][len("# config: ") :]
        fields = dict(p.split("=", 1) for p in config_line.split() if "=" in p)
        kind = fields.get("kind", "iso")
        rank = int(fields.get("rank", "1"))
        header = lines[2].split(",")
        by_traj: dict[int, list[CheckpointRecord]] = {}
        for ln in lines[3:]:
            cells = ln.split(",")
            row = dict(zip(header, cells))
            traj, n = int(row["traj"]), int(row["n"])
            if kind == "reduced":
                rec = CheckpointRecord(
                    traj, n, (), (), xbar=int(row["xbar"]), y=int(row["y"])
                )
            else:
                h = tuple(int(Q(row[f"h_{i+1}"])) for i in range(rank))
                lam = tuple(int(Q(row[f"lam_{i+1}"])) for i in range(rank))
                rec = CheckpointRecord(traj, n, h, lam)
            by_traj.setdefault(traj, []).append(rec)
        trajs = tuple(
            Trajectory(i, tuple(by_traj[i])) for i in sorted(by_traj)
        )
        rest = " ".join(
            p for p in config_line.split() if not p.startswith(("kind=", "rank="))
        )
        return cls(kind, rank, rest, trajs)


def default_checkpoints(n_steps: int, every: int | None = None) -> tuple[int, ...]:
    """Checkpoint schedule including consecutive pairs for step-size probes."""
    if every is None:
        every = max(1, n_steps // 20)
    marks = set(range(0, n_steps + 1, every))
    marks.add(n_steps)
    for c in list(marks):
        if c + 1 <= n_steps:
            marks.add(c + 1)
    return tuple(sorted(marks))


# -- per-trajectory runners (picklable top-level functions) ------------------


def _run_group_traj(args):
    config, n_steps, base_seed, checkpoints, index = args
    rng = derive_rng(base_seed, index)
    n = config.params.rank + 1
    g = identity_matrix(config.params.q, n)
    marks = set(checkpoints)
    records = []

    def record(step):
        iw = iwasawa_valuations(g)
        sm = smith_valuations(g)
        h = tuple(iw[i] - iw[i + 1] for i in range(n - 1))
        lam = tuple(sm[i] - sm[i + 1] for i in range(n - 1))
        records.append(CheckpointRecord(index, step, h, lam))

    if 0 in marks:
        record(0)
    for step in range(1, n_steps + 1):
        g = step_group_walk(g, config, rng)
        if step in marks:
            record(step)
    return Trajectory(index, tuple(records))


def _run_iso_generic_traj(args):
    config, n_steps, base_seed, checkpoints, index = args
    rng = derive_rng(base_seed, index)
    params = config.params
    x = base_vertex(params)
    base = x
    marks = set(checkpoints)
    records = []

    def record(step):
        records.append(
            CheckpointRecord(
                index, step, busemann(params, x), vector_distance(params, base, x)
            )
        )

    if 0 in marks:
        record(0)
    for step in range(1, n_steps + 1):
        x = step_semi_isotropic(x, config.kernel, rng)
        if step in marks:
            record(step)
    return Trajectory(index, tuple(records))


def _run_iso_tree_traj(args):
    config, n_steps, base_seed, checkpoints, index = args
    rng = derive_rng(base_seed, index)
    q = config.params.q
    kernel = config.kernel
    p_up = kernel.entries.get(((1,), (1,)), Q(0))
    p_down = kernel.entries.get(((1,), (-1,)), Q(0))
    p_stay = kernel.entries.get(((0,), (0,)), Q(0))
    assert p_up + q * p_down + p_stay == 1
    cum = _cumulative((p_up, q * p_down, p_stay))
    state = TreeWalkState(q)
    marks = set(checkpoints)
    records = []

    def record(step):
        records.append(
            CheckpointRecord(index, step, (state.h(),), (state.dist(),))
        )

    if 0 in marks:
        record(0)
    for step in range(1, n_steps + 1):
        cls = _sample_index(rng, cum)
        if cls == 0:
            state.apply(state.up_move())
        elif cls == 1:
            up = state.up_move()
            k = int(rng.integers(0, q))
            downs = [m for m in range(q + 1) if m != up]
            state.apply(downs[k])
        if step in marks:
            record(step)
    return Trajectory(index, tuple(records))


def _run_iso_frame_traj(args):
    config, n_steps, base_seed, checkpoints, index = args
    rng = derive_rng(base_seed, index)
    params = config.params
    kernel = config.kernel
    state = FrameWalkState(params)
    tracker = ProductTracker(params.q, capacity=n_steps)
    p_stay = float(kernel.entries.get(((0, 0), (0, 0)), Q(0)))
    marks = set(checkpoints)
    records = []

    def record(step):
        records.append(
            CheckpointRecord(
                index, step, state.h_coords(), tracker.cartan_coords()
            )
        )

    if 0 in marks:
        record(0)
    nu_coords = {1: (1, 0), 2: (0, 1)}
    for step in range(1, n_steps + 1):
        table = state.classify()
        weights = [
            float(kernel.entries.get((nu_coords[nu], off), Q(0)))
            for _, nu, off in table
        ]
        total = sum(weights) + p_stay
        assert abs(total - 1.0) < 1e-9, "kernel mass must be 1 at every vertex"
        u = rng.random()
        acc = 0.0
        chosen = None
        for (idx, _, _), w in zip(table, weights):
            acc += w
            if u < acc:
                chosen = idx
                break
        if chosen is not None:
            state.apply(chosen)
            tracker.step(state.candidates[chosen])
        if step in marks:
            record(step)
    return Trajectory(index, tuple(records))


def _run_reduced_traj(args):
    config, n_steps, base_seed, checkpoints, index = args
    rng = derive_rng(base_seed, index)
    # pre-drawn increments and catch coins keep the sequential loop cheap
    probs = [float(config.p_plus), float(config.p_zero), float(config.p_minus)]
    incs = rng.choice(np.array([1, 0, -1]), size=n_steps, p=probs)
    coins = rng.random(n_steps) < 1.0 / config.q
    xbar = y = 0
    marks = set(checkpoints)
    records = []
    if 0 in marks:
        records.append(CheckpointRecord(index, 0, (), (), xbar=0, y=0))
    incs_l = incs.tolist()
    coins_l = coins.tolist()
    for step in range(1, n_steps + 1):
        inc = incs_l[step - 1]
        if xbar == y:
            if inc == 1:
                y += 1
            elif inc == -1 and coins_l[step - 1]:
                y -= 1
        xbar += inc
        if step in marks:
            records.append(CheckpointRecord(index, step, (), (), xbar=xbar, y=y))
    return Trajectory(index, tuple(records))


def _worker_count(n_tasks: int) -> int:
    cap = os.environ.get("WEYLWALK_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_tasks, limit))


def sample_trajectories(
    config,
    n_steps: int,
    n_traj: int,
    base_seed: int,
    checkpoints=None,
    parallel: bool = True,
) -> WalkDataset:
    """Run n_traj independent trajectories; deterministic given inputs."""
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    if checkpoints is None:
        checkpoints = default_checkpoints(n_steps)
    checkpoints = tuple(sorted(set(int(c) for c in checkpoints)))
    if checkpoints and checkpoints[-1] > n_steps:
        raise ValueError("checkpoint beyond the last step")

    if isinstance(config, GroupWalkConfig):
        kind, rank, runner = "group", config.params.rank, _run_group_traj
        desc = f"q={config.params.q} generators={len(config.generators)}"
    elif isinstance(config, SemiIsotropicWalkConfig):
        kind, rank = "iso", config.params.rank
        if config.engine == "generic":
            runner = _run_iso_generic_traj
        elif rank == 1:
            runner = _run_iso_tree_traj
        elif rank == 2:
            runner = _run_iso_frame_traj
        else:
            runner = _run_iso_generic_traj
        desc = f"q={config.params.q} kernel={config.kernel.label}"
    elif isinstance(config, ReducedChainConfig):
        kind, rank, runner = "reduced", 1, _run_reduced_traj
        desc = (
            f"q={config.q} p_plus={config.p_plus} p_zero={config.p_zero} "
            f"p_minus={config.p_minus}"
        )
    else:
        raise TypeError(f"unknown walk config: {type(config).__name__}")

    desc = f"steps={n_steps} trajectories={n_traj} seed={base_seed} {desc}"
    tasks = [(config, n_steps, base_seed, checkpoints, j) for j in range(n_traj)]
    workers = _worker_count(n_traj) if parallel else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajs = list(pool.map(runner, tasks))
    else:
        trajs = [runner(t) for t in tasks]
    trajs.sort(key=lambda t: t.index)
    return WalkDataset(kind, rank, desc, tuple(trajs))


# ---------------------------------------------------------------------------
# factor-walk sampling (lattice walk of the Busemann values)
# ---------------------------------------------------------------------------


def root_projection_returns(
    kernel: SemiIsotropicKernel,
    root_index: int,
    n_steps: int,
    n_runs: int,
    base_seed: int,
) -> list[int]:
    """For each run, how often the pairing of the factor walk with the given
    simple root returns to 0.  In coweight coordinates that pairing is just
    the root_index-th coordinate of the lattice position."""
    fk = sorted(factor_kernel(kernel).items())
    offsets = np.array([mu[root_index] for mu, _ in fk], dtype=np.int64)
    probs = [float(p) for _, p in fk]
    out = []
    for j in range(n_runs):
        rng = derive_rng(base_seed, j)
        idx = rng.choice(len(offsets), size=n_steps, p=probs)
        path = np.cumsum(offsets[idx])
        out.append(int(np.count_nonzero(path == 0)))
    return out
