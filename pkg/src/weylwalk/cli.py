"""Command-line surface: root-system tables, decomposition oracles,
building spheres, walk simulations, and dataset analysis.

Exit codes: 0 success, 1 input/validation error, 2 runtime failure.
Outputs are byte-deterministic for fixed flags (pass --stamp to add a
timestamp header to walk CSV files).
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction as Q

from .analysis import (
    check_orbit_relation,
    empirical_busemann_drift,
    empirical_speed,
    end_convergence_stats,
    regularity_report,
    theoretical_drift,
)
from .building import BuildingParams, base_vertex, sphere
from .coxeter import build_root_system
from .field import parse_rational_function
from .matrices import (
    RationalFunctionMatrix,
    iwasawa_decomposition,
    smith_decomposition,
)
from .walks import (
    GroupWalkConfig,
    ReducedChainConfig,
    SemiIsotropicKernel,
    SemiIsotropicWalkConfig,
    WalkDataset,
    count_c,
    kernel_from_lines,
    sample_trajectories,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on bad flags instead of argparse's 2
        raise _UsageError(message)


def _parse_matrix(q: int, text: str) -> RationalFunctionMatrix:
    rows = []
    for row in text.split(";"):
        cells = [parse_rational_function(q, cell.strip()) for cell in row.split(",")]
        rows.append(cells)
    return RationalFunctionMatrix(q, rows)


def _parse_nu(rank: int, text: str) -> tuple[int, ...]:
    """'w1' / 'w2' fundamental-coweight shorthand or comma coordinates."""
    text = text.strip()
    if text.startswith("w"):
        i = int(text[1:])
        if not 1 <= i <= rank:
            raise _UsageError(f"fundamental coweight index out of range: {text}")
        return tuple(1 if j == i - 1 else 0 for j in range(rank))
    return tuple(int(c) for c in text.split(","))


def _apply_config_file(argv: list[str]) -> list[str]:
    """Insert key=value pairs from --config FILE as flags right after the
    subcommand words, so explicit flags still win (argparse last-wins)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise _UsageError("--config needs a file argument")
    rest = argv[:i] + argv[i + 2 :]
    injected = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _UsageError(f"malformed config line: {raw.strip()!r}")
            key, value = line.split("=", 1)
            injected += [f"--{key.strip().replace('_', '-')}", value.strip()]
    split = 0
    while split < len(rest) and not rest[split].startswith("-"):
        split += 1
    return rest[:split] + injected + rest[split:]


def _build_parser() -> _Parser:
    p = _Parser(prog="weylwalk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    rootsys = sub.add_parser("rootsys", parents=[], description="root-system data")
    rs_sub = rootsys.add_subparsers(dest="action", required=True)
    show = rs_sub.add_parser("show")
    show.add_argument("--type", dest="kind", choices=("A", "C"), required=True)
    show.add_argument("--rank", type=int, required=True)

    oracle = sub.add_parser("oracle")
    or_sub = oracle.add_subparsers(dest="action", required=True)
    dec = or_sub.add_parser("decompose")
    dec.add_argument("--q", type=int, required=True)
    dec.add_argument("--matrix", required=True, help="rows ';'-separated, entries ','-separated")
    dec.add_argument("--mode", choices=("smith", "iwasawa"), default="smith")
    cc = or_sub.add_parser("c-count")
    cc.add_argument("--rank", type=int, required=True)
    cc.add_argument("--q", type=int, required=True)
    cc.add_argument("--nu", required=True)

    bld = sub.add_parser("building")
    bld_sub = bld.add_subparsers(dest="action", required=True)
    sph = bld_sub.add_parser("sphere")
    sph.add_argument("--rank", type=int, required=True)
    sph.add_argument("--q", type=int, required=True)
    sph.add_argument("--nu", required=True)
    sph.add_argument("--list", action="store_true", help="print canonical matrices")

    walk = sub.add_parser("walk")
    walk_sub = walk.add_subparsers(dest="action", required=True)

    def _common(wp, with_rank=True):
        if with_rank:
            wp.add_argument("--rank", type=int, required=True)
        wp.add_argument("--q", type=int, required=True)
        wp.add_argument("--steps", type=int, required=True)
        wp.add_argument("--trajectories", type=int, default=1)
        wp.add_argument("--seed", type=int, default=0)
        wp.add_argument("--checkpoint-every", type=int, default=None)
        wp.add_argument("--out", default=None, help="CSV path (default stdout)")
        wp.add_argument("--stamp", action="store_true")
        wp.add_argument("--serial", action="store_true", help="disable worker pool")

    group = walk_sub.add_parser("group")
    _common(group)
    group.add_argument(
        "--generators",
        required=True,
        help="file of lines '<prob>|<matrix>' defining the step measure",
    )
    iso = walk_sub.add_parser("iso")
    _common(iso)
    iso.add_argument(
        "--kernel",
        default="isotropic",
        help="'isotropic', 'drift-free', or a kernel file of 'nu=.. mu=.. p=..' lines",
    )
    iso.add_argument("--engine", choices=("auto", "generic"), default="auto")
    reduced = walk_sub.add_parser("reduced")
    _common(reduced, with_rank=False)
    reduced.add_argument("--p-plus", default="1/2")
    reduced.add_argument("--p-zero", default="0")
    reduced.add_argument("--p-minus", default="1/2")

    an = sub.add_parser("analyze")
    an.add_argument("--in", dest="infile", required=True)
    an.add_argument("--report", default=None, help="JSON path (default stdout)")
    an.add_argument("--kernel", default=None, help="kernel supplying exact drift targets")
    an.add_argument("--y-threshold", type=int, default=50)

    return p


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_rootsys_show(args) -> int:
    rs = build_root_system(args.kind, args.rank)
    print(json.dumps(rs.summary(), indent=2, sort_keys=True))
    return 0


def _cmd_oracle_decompose(args) -> int:
    m = _parse_matrix(args.q, args.matrix)
    if args.mode == "smith":
        dec = smith_decomposition(m)
        print("mode: smith")
        print("exponents:", ",".join(str(e) for e in dec.exponents))
        print("k1:", repr(dec.k1))
        print("k2:", repr(dec.k2))
    else:
        dec = iwasawa_decomposition(m)
        print("mode: iwasawa")
        print("exponents:", ",".join(str(e) for e in dec.exponents))
        print("u:", repr(dec.u))
        print("k:", repr(dec.k))
    print("reassembly: ok" if dec.assemble() == m else "reassembly: FAILED")
    return 0


def _kernel_for(params: BuildingParams, name: str) -> SemiIsotropicKernel:
    if name == "isotropic":
        return SemiIsotropicKernel.isotropic_nn(params)
    if name == "drift-free":
        return SemiIsotropicKernel.drift_free_tree(params)
    with open(name) as fh:
        return kernel_from_lines(params, fh)


def _cmd_oracle_ccount(args) -> int:
    params = BuildingParams(args.rank, args.q)
    nu = _parse_nu(args.rank, args.nu)
    base = base_vertex(params)
    from .building import busemann

    offsets = sorted(
        {
            tuple(
                b - a
                for a, b in zip(busemann(params, base), busemann(params, y))
            )
            for y in sphere(params, base, nu)
        }
    )
    print("nu:", ",".join(str(c) for c in nu))
    total = 0
    for mu in offsets:
        c = count_c(params, nu, mu)
        total += c
        print(f"mu={','.join(str(x) for x in mu)} count={c}")
    print("total:", total)
    return 0


def _cmd_building_sphere(args) -> int:
    params = BuildingParams(args.rank, args.q)
    nu = _parse_nu(args.rank, args.nu)
    verts = sphere(params, base_vertex(params), nu)
    print("nu:", ",".join(str(c) for c in nu))
    print("count:", len(verts))
    if args.list:
        for v in sorted(repr(v.matrix) for v in verts):
            print(v)
    return 0


def _read_generators(params: BuildingParams, path: str):
    gens = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            prob, matrix = line.split("|", 1)
            gens.append((_parse_matrix(params.q, matrix), Q(prob)))
    return tuple(gens)


def _emit_dataset(ds: WalkDataset, args) -> None:
    text = ds.to_csv()
    if args.stamp:
        head, rest = text.split("\n", 1)
        now = datetime.now(timezone.utc).isoformat()
        text = f"{head}\n# generated: {now}\n{rest}"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _checkpoints(args):
    from .walks import default_checkpoints

    return default_checkpoints(args.steps, args.checkpoint_every)


def _cmd_walk_group(args) -> int:
    params = BuildingParams(args.rank, args.q)
    config = GroupWalkConfig(params, _read_generators(params, args.generators))
    ds = sample_trajectories(
        config,
        args.steps,
        args.trajectories,
        args.seed,
        checkpoints=_checkpoints(args),
        parallel=not args.serial,
    )
    _emit_dataset(ds, args)
    return 0


def _cmd_walk_iso(args) -> int:
    params = BuildingParams(args.rank, args.q)
    kernel = _kernel_for(params, args.kernel)
    config = SemiIsotropicWalkConfig(params, kernel, engine=args.engine)
    ds = sample_trajectories(
        config,
        args.steps,
        args.trajectories,
        args.seed,
        checkpoints=_checkpoints(args),
        parallel=not args.serial,
    )
    _emit_dataset(ds, args)
    return 0


def _cmd_walk_reduced(args) -> int:
    config = ReducedChainConfig(
        q=args.q,
        p_plus=Q(args.p_plus),
        p_zero=Q(args.p_zero),
        p_minus=Q(args.p_minus),
        drift_free=Q(args.p_plus) == Q(args.p_minus),
    )
    ds = sample_trajectories(
        config,
        args.steps,
        args.trajectories,
        args.seed,
        checkpoints=_checkpoints(args),
        parallel=not args.serial,
    )
    _emit_dataset(ds, args)
    return 0


def _reduced_config_from_header(ds: WalkDataset) -> ReducedChainConfig:
    fields = dict(p.split("=", 1) for p in ds.config_text.split() if "=" in p)
    return ReducedChainConfig(
        q=int(fields["q"]),
        p_plus=Q(fields["p_plus"]),
        p_zero=Q(fields["p_zero"]),
        p_minus=Q(fields["p_minus"]),
        drift_free=Q(fields["p_plus"]) == Q(fields["p_minus"]),
    )


def _cmd_analyze(args) -> int:
    with open(args.infile) as fh:
        ds = WalkDataset.from_csv(fh.read())
    report: dict = {
        "schema": "weylwalk-report v1",
        "kind": ds.kind,
        "rank": ds.rank,
        "n_traj": len(ds.trajectories),
    }
    if ds.kind == "reduced":
        config = _reduced_config_from_header(ds)
        stats = end_convergence_stats(ds, config, y_threshold=args.y_threshold)
        report.update(
            hit_count=stats.hit_count,
            mean_z_at_hits=stats.mean_z_at_hits,
            theoretical_e=stats.theoretical_e,
            invariant_violations=stats.invariant_violations,
            max_y=stats.max_y,
            y_threshold=stats.y_threshold,
            fraction_reaching_threshold=stats.fraction_reaching_threshold,
        )
    else:
        speed = empirical_speed(ds)
        drift = empirical_busemann_drift(ds)
        rs = build_root_system("A", ds.rank)
        tol = max(
            0.02, *(4 * se for se in speed.std_errors + drift.std_errors)
        )
        orbit = check_orbit_relation(rs, speed.values, drift.values, tol)
        report.update(
            n_steps=speed.n_steps,
            lambda_hat=list(speed.values),
            lambda_se=list(speed.std_errors),
            mu_hat=list(drift.values),
            mu_se=list(drift.std_errors),
            orbit_witness_word=list(orbit.witness_word),
            orbit_residual=orbit.residual,
            orbit_pass=orbit.passed,
        )
        if args.kernel:
            fields = dict(p.split("=", 1) for p in ds.config_text.split() if "=" in p)
            params = BuildingParams(ds.rank, int(fields["q"]))
            kernel = _kernel_for(params, args.kernel)
            mu, lam = theoretical_drift(kernel)
            cartan = regularity_report(ds, lam, field="lam")
            busemann_side = regularity_report(ds, mu, field="h")
            report.update(
                theory_mu=[str(x) for x in mu],
                theory_lambda=[str(x) for x in lam],
                residuals=[[n, r] for n, r in cartan.residuals],
                max_step=cartan.max_step,
                step_bound=cartan.step_bound,
                step_ok=cartan.step_ok,
                cartan_pass=cartan.passed,
                busemann_pass=busemann_side.passed,
                checkers_agree=cartan.passed == busemann_side.passed,
            )
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


_DISPATCH = {
    ("rootsys", "show"): _cmd_rootsys_show,
    ("oracle", "decompose"): _cmd_oracle_decompose,
    ("oracle", "c-count"): _cmd_oracle_ccount,
    ("building", "sphere"): _cmd_building_sphere,
    ("walk", "group"): _cmd_walk_group,
    ("walk", "iso"): _cmd_walk_iso,
    ("walk", "reduced"): _cmd_walk_reduced,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
        args = _build_parser().parse_args(argv)
        if args.command == "analyze":
            handler = _cmd_analyze
        else:
            handler = _DISPATCH[(args.command, args.action)]
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        return handler(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # genuine runtime failure
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
