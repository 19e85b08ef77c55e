"""Command line front end.

Subcommands: solve (fine-scale Dirichlet problem at one eps), cell
(periodic cell problem at one loading), tabulate (effective operator
table to CSV), sweep (scale sweep to CSV), check (invariant suites).
Exit codes: 0 success, 1 numerical failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cell as cellmod
from . import fem, harness, msolve, opcat

USAGE_EXIT = 2
FAIL_EXIT = 1


def _build_parser():
    ap = argparse.ArgumentParser(prog="mohom",
                                 description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None,
                       help="config file (sectioned key=value)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory override")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--cell-n", type=int, default=None,
                       help="cell mesh resolution override")
        p.add_argument("--tol", type=float, default=None,
                       help="solver residual tolerance override")

    p = sub.add_parser("solve", help="fine-scale Dirichlet solve at one eps")
    common(p)
    p.add_argument("--eps", type=str, default="1/8",
                   help="scale, a reciprocal integer like 1/8")

    p = sub.add_parser("cell", help="periodic cell solve at one loading")
    common(p)
    p.add_argument("--xi", type=str, default="1.0",
                   help="loading, comma separated per dimension")

    p = sub.add_parser("tabulate", help="effective operator table to CSV")
    common(p)

    p = sub.add_parser("sweep", help="scale sweep to CSV")
    common(p)
    p.add_argument("--eps", type=str, default=None,
                   help="override eps list, e.g. 1/4,1/8,1/16")
    p.add_argument("--nested", action="store_true",
                   help="exact nested cell solves in the effective problem")

    p = sub.add_parser("check", help="run the invariant suites")
    common(p)
    return ap


def _load_cfg(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.load_config(args.config)
    else:
        cfg = harness.ExperimentConfig().validate()
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "cell_n", None):
        cfg.cell_n = args.cell_n
    if args.tol is not None:
        cfg.settings.residual_tol = args.tol
    if getattr(args, "eps", None):
        cfg.eps_list = tuple(harness._parse_fraction(t)
                             for t in args.eps.split(","))
    if getattr(args, "nested", False):
        cfg.nested = True
    return cfg.validate()


def _outdir(cfg):
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cmd_solve(cfg, args):
    eps = Fraction(args.eps) if "/" in args.eps else Fraction(float(args.eps))
    if eps.numerator != 1:
        raise harness.ConfigError("eps must be a reciprocal integer")
    op = opcat.make_operator(cfg.operator, dim=cfg.dim)
    F = harness.make_F(cfg.F_spec)
    n = eps.denominator * cfg.r
    mesh = fem.build_mesh(1, n, "dirichlet_zero")
    res = msolve.solve_dirichlet(op, op.nfunction, mesh, F, eps=float(eps),
                                 settings=cfg.settings)
    out = _outdir(cfg) / f"solution_eps_{eps.denominator}.txt"
    vals = res.u.nodal_values()
    np.savetxt(out, np.column_stack([mesh.vertices[:, 0], vals]),
               fmt="%.17g", header="x u", comments="")
    print(f"solve eps={eps}: {res.iterations} iterations, "
          f"residual {res.final_residual:.3e}, wrote {out}")
    return 0


def _cmd_cell(cfg, args):
    xi = np.array([float(t) for t in args.xi.split(",")], dtype=float)
    op = opcat.make_operator(cfg.operator, dim=cfg.dim)
    if xi.size != op.dim:
        raise harness.ConfigError(f"xi must have {op.dim} components")
    mesh = fem.build_mesh(op.dim, cfg.cell_n, "periodic",
                          interfaces=op.interfaces)
    sol = cellmod.solve_cell(op, mesh, xi, cfg.settings)
    ahat = ", ".join(f"{v:.10g}" for v in np.atleast_1d(sol.Ahat))
    print(f"cell xi=({args.xi}): Ahat = [{ahat}], "
          f"orthogonality {sol.orthogonality:.3e}")
    return 0


def _cmd_tabulate(cfg, args):
    op = opcat.make_operator(cfg.operator, dim=cfg.dim)
    mesh = fem.build_mesh(op.dim, cfg.cell_n, "periodic",
                          interfaces=op.interfaces)
    axis = np.linspace(cfg.xi_min, cfg.xi_max, cfg.xi_n)
    table = cellmod.tabulate_Ahat(op, mesh, axis, cfg.settings,
                                  workers=harness.worker_count())
    out = _outdir(cfg) / "ahat_table.csv"
    cellmod.save_table(table, out)
    tag = " (partial)" if table.partial else ""
    print(f"tabulate: {cfg.xi_n} points, wrote {out}{tag}")
    return FAIL_EXIT if table.partial else 0


def _cmd_sweep(cfg, args):
    report = harness.run_sweep(cfg)
    out = _outdir(cfg) / "sweep.csv"
    report.to_csv(out)
    tout = _outdir(cfg) / "ahat_table.csv"
    cellmod.save_table(report.table, tout)
    failed = [r for r in report.rows if r.status != "ok"]
    print(f"sweep: {len(report.rows)} rows ({len(failed)} failed), "
          f"wrote {out} and {tout}")
    return FAIL_EXIT if failed else 0


def _cmd_check(cfg, args):
    report, ok = harness.run_checks(cfg, seed=cfg.seed)
    out = _outdir(cfg) / "checks.json"
    out.write_text(json.dumps(report, indent=2, default=float) + "\n")
    n_fail = sum(1 for v in report.values() if not v.get("ok", False))
    print(f"check: {len(report)} checks, {n_fail} failed, wrote {out}")
    return 0 if ok else FAIL_EXIT


_DISPATCH = {
    "solve": _cmd_solve,
    "cell": _cmd_cell,
    "tabulate": _cmd_tabulate,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
}


def cli_main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0,) else 0
    try:
        cfg = _load_cfg(args)
    except (harness.ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return _DISPATCH[args.command](cfg, args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (msolve.SolveError, opcat.InversionError, fem.MeshError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return FAIL_EXIT


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
