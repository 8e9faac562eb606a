"""Command-line interface.

    dualarm-mintime solve <scenario> --method mbd|cem|random --seed S --out DIR
    dualarm-mintime validate <scenario>
    dualarm-mintime bench <scenario>... --seeds K --out DIR

Exit codes: 0 success, 1 scenario validation error, 2 I/O error.
`--threads` caps worker parallelism for independent bench jobs; results
never depend on it (each job is fully isolated and deterministic, and
`solve` itself is a single job).
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .output import emit, fmt
from .runner import METHODS, run
from .scenario import ScenarioError, load_scenario

BENCH_HEADER = "scenario,method,seeds,V_mean,V_best,E_mean,feasibility_rate,wall_s_mean"


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(
        f"OK: {scenario.name} (n={scenario.n_joints}, d={scenario.basis.d}, "
        f"N={scenario.basis.N}, path samples={len(scenario.path)})"
    )
    return 0


def _cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    bundle = run(scenario, method=args.method, seed=args.seed)
    print(
        f"{scenario.name} [{args.method}] seed={bundle.seed}: "
        f"V={bundle.final.V:.6g} s, E={bundle.final.E:.6g}, R={bundle.final.R:.6g}, "
        f"feasible={bundle.final.feasible}, wall={bundle.wall_s:.2f} s"
    )
    if args.out is not None:
        paths = emit(bundle, args.out)
        print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return 0


def _cmd_bench(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenario]
    jobs = [
        (scenario, method, seed)
        for scenario in scenarios
        for method in METHODS
        for seed in range(args.seeds)
    ]

    def one(job):
        scenario, method, seed = job
        return run(scenario, method=method, seed=seed)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            bundles = list(pool.map(one, jobs))
    else:
        bundles = [one(job) for job in jobs]

    by_key = {}
    for bundle in bundles:
        by_key.setdefault((bundle.scenario_name, bundle.method), []).append(bundle)

    lines = [BENCH_HEADER]
    for scenario in scenarios:
        for method in METHODS:
            group = by_key[(scenario.name, method)]
            V = np.array([b.final.V for b in group])
            E = np.array([b.final.E for b in group])
            feas = np.array([b.final.feasible for b in group])
            wall = np.array([b.wall_s for b in group])
            lines.append(
                ",".join(
                    [
                        scenario.name,
                        method,
                        str(len(group)),
                        fmt(V.mean()),
                        fmt(V.min()),
                        fmt(E.mean()),
                        fmt(feas.mean()),
                        fmt(wall.mean()),
                    ]
                )
            )
            print(
                f"{scenario.name:>20} {method:>8}: V_mean={V.mean():.4g} "
                f"E_mean={E.mean():.4g} feasible={int(feas.sum())}/{len(group)} "
                f"wall_mean={wall.mean():.2f} s"
            )

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = out / "bench_summary.csv"
        summary.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing bench summary under {out}: {exc}") from exc
    if args.emit_runs:
        for bundle in bundles:
            emit(bundle, out / f"{bundle.scenario_name}_{bundle.method}_seed{bundle.seed}")
    print(f"wrote {summary}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualarm-mintime",
        description="Minimum-time dual-arm trajectory optimization over a desired relative Cartesian path.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario file against all invariants")
    p_validate.add_argument("scenario")
    p_validate.set_defaults(func=_cmd_validate)

    p_solve = sub.add_parser("solve", help="optimize one scenario with one method")
    p_solve.add_argument("scenario")
    p_solve.add_argument("--method", choices=METHODS, default="mbd")
    p_solve.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_solve.add_argument("--out", default=None, help="directory for result files")
    p_solve.add_argument("--threads", type=int, default=1, help="worker cap (no effect on results)")
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser("bench", help="run all methods over K seeds and summarize")
    p_bench.add_argument("scenario", nargs="+")
    p_bench.add_argument("--seeds", type=int, default=5)
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--threads", type=int, default=1, help="parallel independent jobs")
    p_bench.add_argument(
        "--emit-runs", action="store_true", help="also write per-run result directories"
    )
    p_bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
