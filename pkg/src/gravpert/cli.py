"""Command-line entry point: ``gravpert solve --config run.ini [overrides]``.

Exit status: 0 on success, 2 for configuration/input errors, 3 for
numerical failures (the message names the failing stage).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .harmonics import RankDeficientFit
from .perturbation import CascadeError
from .reports import ConfigError, RunConfig, config_to_text, load_config, run
from .sphere_geom import DegenerateVertexError, MeshFormatError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gravpert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run the perturbation cascade and write reports")
    solve.add_argument("--config", help="INI-style run configuration")
    solve.add_argument("--model", help="degree1, degree4 or external:<csv of phi,theta,h_re,h_im>")
    solve.add_argument("--epsilon", type=float)
    solve.add_argument("--radius", type=float)
    solve.add_argument("--mesh", help="ico, uv:NxM or tri:<path>")
    solve.add_argument("--order", type=int, choices=(1, 2, 3))
    solve.add_argument("--n-gauss", type=int, dest="n_gauss_zeta")
    solve.add_argument("--tol", type=float, dest="inner_rel_tol",
                       help="relative tolerance of the inner adaptive quadrature")
    solve.add_argument("--basis-lmax", type=int)
    solve.add_argument("--out", dest="out_dir")
    solve.add_argument("--reports", help="comma separated subset of error_table,field,sweep")
    solve.add_argument("--print-config", action="store_true",
                       help="print the effective configuration and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in
                 ("model", "epsilon", "radius", "mesh", "order", "n_gauss_zeta",
                  "inner_rel_tol", "basis_lmax", "out_dir")}
    if args.reports:
        overrides["outputs"] = tuple(t.strip() for t in args.reports.split(",") if t.strip())
    try:
        cfg = load_config(args.config, **overrides)
    except ConfigError as exc:
        print(f"gravpert: config error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        print(config_to_text(cfg), end="")
        return 0
    try:
        result = run(cfg)
    except (ConfigError, MeshFormatError, DegenerateVertexError, FileNotFoundError) as exc:
        print(f"gravpert: input error: {exc}", file=sys.stderr)
        return 2
    except CascadeError as exc:
        print(f"gravpert: numerical failure in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return 3
    except (ArithmeticError, RankDeficientFit, np.linalg.LinAlgError) as exc:
        print(f"gravpert: numerical failure: {exc}", file=sys.stderr)
        return 3
    print(result.summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
