"""Command-line driver: reproducible K-profiles, flows and theorem checks.

Subcommands
-----------
k-profile   CSV of t -> K(x, t)/t for an operator couple
evolve      trajectory CSV/JSON of the semigroup flow
verify      run one theorem check (or `all`); exit 0 iff every chain passes
qlaplace    the q-Laplace regularity experiment
hardy-norm  lower estimate of the Hardy operator norm on a space

Identical configuration and seed produce byte-identical artifacts.  A JSON
config file (--config) provides defaults that explicit flags override; the
output directory defaults to $INTERPLAB_OUT or ./interplab_out.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import theorems
from .couples import KEvaluator
from .grids import LogGrid
from .operators import (
    MatrixLinear,
    PreconditionError,
    QLaplaceOperator,
    ScalarLinear,
    SolverError,
    from_config,
    indicator_box_operator,
    perturb,
    quadratic_energy_operator,
    reciprocal_energy_operator,
    soft_abs_operator,
)
from .semigroup import evolve
from .spaces import (
    SpaceSpec,
    UnsupportedSpaceError,
    hardy_norm_estimate,
    l1_cap_linf_space,
    l1_space,
    linf_space,
    weighted_lp,
)

THEOREM_IDS = ("th41", "cor42", "domain-chain", "holder", "perturbation",
               "regularizing", "thp1", "qlaplace")


# ----------------------------------------------------------------------
# flag parsing helpers
# ----------------------------------------------------------------------

def parse_operator(text: str):
    """Mini-grammar: kind[:k=v,...], e.g. scalar:a=1 or qlaplace:q=3,n=64."""
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            if "=" in item:
                k, v = item.split("=", 1)
                params[k] = v
            else:
                params["energy"] = item
    cfg = {"kind": kind}
    for k, v in params.items():
        if k in ("csv", "energy"):
            cfg[k] = v
        elif k == "shift":
            cfg["shift_omega"] = float(v)
        elif k == "plus_h":
            cfg["plus_identity_h"] = float(v)
        elif k in ("n",):
            cfg[k] = int(v)
        elif k in ("lo", "hi"):
            cfg[k] = [float(v)]
        else:
            cfg[k] = float(v)
    return from_config(cfg)


def parse_space(text: str) -> SpaceSpec:
    if text == "l1":
        return l1_space()
    if text == "linf":
        return linf_space()
    if text in ("l1capinf", "l1_cap_linf"):
        return l1_cap_linf_space()
    params = dict(item.split("=", 1) for item in text.split(","))
    return weighted_lp(float(params["theta"]), float(params.get("p", 2.0)))


def parse_vector(text: str, op=None) -> np.ndarray:
    named = {"sin": lambda g: np.sin(math.pi * g),
             "hat": lambda g: 1.0 - 2.0 * np.abs(g - 0.5)}
    if text in named:
        if not isinstance(op, QLaplaceOperator):
            raise ValueError(f"named data {text!r} requires a qlaplace operator")
        return named[text](op.grid_x())
    return np.array([float(v) for v in text.split(",")])


def parse_grid(text: str | None) -> LogGrid:
    if not text:
        return theorems.DEFAULT_GRID
    t_min, t_max, n = text.split(",")
    return LogGrid(float(t_min), float(t_max), int(n))


def out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("INTERPLAB_OUT", "interplab_out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in text)


# ----------------------------------------------------------------------
# default verification jobs per theorem id
# ----------------------------------------------------------------------

def default_jobs(theorem_id: str, seed: int, grid: LogGrid):
    """The built-in instance suite behind `verify <id>` without --op."""
    E = weighted_lp(0.5, 2.0)
    E25 = weighted_lp(0.25, 2.0)
    jobs = []
    if theorem_id == "th41":
        jobs.append(lambda: theorems.check_th41(
            ScalarLinear(1.0), [1.0], 1.0, grid=grid, seed=seed))
        op = QLaplaceOperator(64, 3.0)
        x = np.sin(math.pi * op.grid_x())
        jobs.append(lambda: theorems.check_th41(op, x, 0.5, grid=grid,
                                                seed=seed))
    elif theorem_id == "cor42":
        jobs.append(lambda: theorems.check_cor42(
            ScalarLinear(1.0), [1.0], E, 0.5, grid=grid, seed=seed))
        op = QLaplaceOperator(64, 2.0)
        x = np.sin(math.pi * op.grid_x())
        jobs.append(lambda: theorems.check_cor42(op, x, E, 0.5, grid=grid,
                                                 seed=seed))
    elif theorem_id == "domain-chain":
        jobs.append(lambda: theorems.check_domain_chain(
            reciprocal_energy_operator(), 0.1, E, 0.4,
            [[2.0], [0.0], [-1.0]], seed=seed, h_alt=0.5))
        jobs.append(lambda: theorems.check_domain_chain(
            indicator_box_operator([-1.0, -1.0], [1.0, 1.0]), 0.1, E, 0.4,
            [[0.5, 0.0], [2.0, 2.0]], seed=seed, h_alt=0.5))
    elif theorem_id == "holder":
        jobs.append(lambda: theorems.check_holder(
            ScalarLinear(1.0), [1.0], E, 0.5, 1.0, grid=grid, seed=seed))
        op = QLaplaceOperator(64, 2.0)
        hat = 1.0 - 2.0 * np.abs(op.grid_x() - 0.5)
        jobs.append(lambda: theorems.check_holder(
            op, hat, E25, 0.5, 0.5, grid=grid, min_exponent=0.2, seed=seed))
    elif theorem_id == "perturbation":
        base = ScalarLinear(1.0)
        zero_pert = perturb(base, lambda v: 0.0 * v, 0.0, 0.5, lambda r: 0.0)
        jobs.append(lambda: theorems.check_perturbation(
            zero_pert, E, 0.5, [[0.7], [2.5]], seed=seed))
        sin_pert = perturb(base, lambda v: 0.3 * np.sin(v), 0.3, 0.5,
                           lambda r: 0.3)
        jobs.append(lambda: theorems.check_perturbation(
            sin_pert, E, 0.5, [[0.7], [-1.3], [2.5]], seed=seed))
    elif theorem_id == "regularizing":
        jobs.append(lambda: theorems.check_regularizing(
            MatrixLinear(np.diag([0.5, 2.0, 10.0]), name="diag3"),
            [1.0, -0.5, 0.3], E, 4.0, grid=grid, seed=seed))
        op = QLaplaceOperator(48, 3.0)
        x = np.sin(math.pi * op.grid_x())
        jobs.append(lambda: theorems.check_regularizing(op, x, E, 0.5,
                                                        grid=grid, seed=seed))
    elif theorem_id == "thp1":
        jobs.append(lambda: theorems.check_thp1(
            quadratic_energy_operator(1.0), [1.0], E25, 0.5, seed=seed))
        op = QLaplaceOperator(32, 2.0)
        x = np.sin(math.pi * op.grid_x())
        jobs.append(lambda: theorems.check_thp1(op, x, E25, 0.5, seed=seed))
    elif theorem_id == "qlaplace":
        jobs.append(lambda: theorems.qlaplace_regularity_experiment(
            4.0, 0.25, 2.0, T=0.5, seed=seed))
    else:
        raise ValueError(f"unknown theorem id {theorem_id!r}")
    return jobs


def _single_job(theorem_id: str, op, x, space, tau, T, seed, grid):
    if theorem_id == "th41":
        return lambda: theorems.check_th41(op, x, tau, grid=grid, seed=seed)
    if theorem_id == "cor42":
        return lambda: theorems.check_cor42(op, x, space, tau, grid=grid,
                                            seed=seed)
    if theorem_id == "holder":
        return lambda: theorems.check_holder(op, x, space, tau, T, grid=grid,
                                             seed=seed)
    if theorem_id == "regularizing":
        return lambda: theorems.check_regularizing(op, x, space, tau,
                                                   grid=grid, seed=seed)
    if theorem_id == "thp1":
        return lambda: theorems.check_thp1(op, x, space, tau, seed=seed)
    if theorem_id == "domain-chain":
        return lambda: theorems.check_domain_chain(op, 0.1, space, tau,
                                                   [x], seed=seed)
    raise ValueError(
        f"--op override not supported for {theorem_id!r}; use the built-in "
        "suite")


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------

def cmd_k_profile(args) -> int:
    op = parse_operator(args.op)
    x = parse_vector(args.x, op)
    grid = parse_grid(args.grid)
    tau = args.tau
    if tau is not None and tau * op.omega >= 1.0:
        raise PreconditionError("requires tau*omega < 1")
    ev = KEvaluator(op.couple(), x, seed=args.seed)
    profile = ev.profile(grid, tau=tau)
    d = out_dir(args)
    path = d / f"k_profile_{_slug(op.name)}.csv"
    profile.to_csv(path)
    print(f"wrote {path}")
    return 0


def cmd_evolve(args) -> int:
    op = parse_operator(args.op)
    x0 = parse_vector(args.x0, op)
    traj = evolve(op, x0, args.t, args.steps)
    d = out_dir(args)
    base = d / f"trajectory_{_slug(op.name)}"
    traj.to_csv(base.with_suffix(".csv"))
    with open(base.with_suffix(".json"), "w") as fh:
        fh.write(traj.summary_json())
    print(f"wrote {base.with_suffix('.csv')} and {base.with_suffix('.json')}")
    return 0


def cmd_verify(args) -> int:
    if args.list:
        for tid in THEOREM_IDS:
            print(tid)
        return 0
    if args.theorem is None:
        print("verify: theorem id required (or --list)", file=sys.stderr)
        return 2
    grid = parse_grid(args.grid)
    ids = THEOREM_IDS if args.theorem == "all" else (args.theorem,)
    for tid in ids:
        if tid not in THEOREM_IDS:
            print(f"verify: unknown theorem id {tid!r}", file=sys.stderr)
            return 2

    jobs = []
    if args.op:
        op = parse_operator(args.op)
        space = parse_space(args.space)
        x = parse_vector(args.x, op) if args.x else _default_data(op)
        for tid in ids:
            jobs.append((tid, _single_job(tid, op, x, space, args.tau,
                                          args.T, args.seed, grid)))
    else:
        for tid in ids:
            for job in default_jobs(tid, args.seed, grid):
                jobs.append((tid, job))

    reports = []
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [(tid, pool.submit(job)) for tid, job in jobs]
            reports = [(tid, f.result()) for tid, f in futures]
    else:
        reports = [(tid, job()) for tid, job in jobs]
    reports.sort(key=lambda r: (r[0], r[1].instance))

    d = out_dir(args)
    all_pass = True
    csv_rows = []
    for tid, rep in reports:
        print(rep.summary())
        all_pass = all_pass and rep.passed
        path = d / f"report_{_slug(tid)}_{_slug(rep.instance)}.json"
        with open(path, "w") as fh:
            fh.write(json.dumps({"schema": 1, **rep.to_dict()},
                                sort_keys=True, default=float))
        csv_rows.extend(rep.csv_rows())
    csv_path = d / f"verify_{_slug(args.theorem)}.csv"
    with open(csv_path, "w") as fh:
        fh.write("theorem,instance,chain,node_t,lhs,rhs,residual\n")
        for row in csv_rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    print(f"wrote {csv_path} and {len(reports)} JSON reports")
    return 0 if all_pass else 1


def _default_data(op):
    if isinstance(op, QLaplaceOperator):
        return np.sin(math.pi * op.grid_x())
    return np.ones(op.space.dim)


def cmd_qlaplace(args) -> int:
    rep = theorems.qlaplace_regularity_experiment(
        args.q, args.theta, args.p, T=args.t, n_interior=args.n,
        seed=args.seed)
    print(rep.summary())
    alpha, r = rep.constants["alpha"], rep.constants["r"]
    print(f"exponent map: alpha={alpha:.6g}, r={r:.6g}")
    d = out_dir(args)
    path = d / "qlaplace_regularity.json"
    with open(path, "w") as fh:
        fh.write(rep.to_json())
    print(f"wrote {path}")
    return 0 if rep.passed else 1


def cmd_hardy_norm(args) -> int:
    space = parse_space(args.space)
    est = hardy_norm_estimate(space, trial_count=args.trials)
    payload = {"space": json.loads(space.to_json()), "estimate": est}
    print(json.dumps(payload, sort_keys=True))
    d = out_dir(args)
    with open(d / "hardy_norm.json", "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True))
    return 0


# ----------------------------------------------------------------------
# argument parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interplab",
        description=("Numerical laboratory for real interpolation and "
                     "nonlinear semigroups of m-accretive operators."))
    parser.add_argument("--config", help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=None,
                       help="artifact directory (default $INTERPLAB_OUT "
                            "or ./interplab_out)")
        p.add_argument("--grid", default=None,
                       help="t_min,t_max,n_nodes (default 1e-6,1e2,2048)")

    p = sub.add_parser("k-profile", help="CSV of t -> K(x,t)/t")
    common(p)
    p.add_argument("--op", required=True, help="e.g. scalar:a=1")
    p.add_argument("--x", required=True, help="comma vector or sin|hat")
    p.add_argument("--space", default="theta=0.5,p=2")
    p.add_argument("--tau", type=float, default=None)

    p = sub.add_parser("evolve", help="semigroup trajectory CSV/JSON")
    common(p)
    p.add_argument("--op", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, default=1024)

    p = sub.add_parser("verify", help="run theorem checks")
    common(p)
    p.add_argument("theorem", nargs="?", default=None,
                   help="|".join(THEOREM_IDS) + "|all")
    p.add_argument("--list", action="store_true",
                   help="enumerate theorem ids")
    p.add_argument("--op", default=None, help="override instance")
    p.add_argument("--x", default=None)
    p.add_argument("--space", default="theta=0.5,p=2")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("qlaplace", help="q-Laplace regularity experiment")
    common(p)
    p.add_argument("--q", type=float, default=4.0)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--n", type=int, default=64)

    p = sub.add_parser("hardy-norm", help="Hardy operator norm estimate")
    common(p)
    p.add_argument("--space", default="theta=0.5,p=2")
    p.add_argument("--trials", type=int, default=12)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = json.load(fh)
        for k, v in defaults.items():
            key = k.replace("-", "_")
            if getattr(args, key, None) in (None, parser.get_default(key)):
                setattr(args, key, v)
    if args.command is None:
        parser.print_help()
        return 2
    handler = {
        "k-profile": cmd_k_profile,
        "evolve": cmd_evolve,
        "verify": cmd_verify,
        "qlaplace": cmd_qlaplace,
        "hardy-norm": cmd_hardy_norm,
    }[args.command]
    try:
        return handler(args)
    except (PreconditionError, UnsupportedSpaceError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"{args.command}: solver failure: {exc} "
              f"(residual {exc.residual})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
