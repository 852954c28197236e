"""Command-line entry point: ``orliczsketch <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from .. import __version__
from ..lowrank import lp_lowrank_best, pca_baseline
from ..orlicz import make_orlicz, orlicz_norm
from ..randgen import SeedSpec
from ..regression import (CombinedTerm, NumericalFailure, combined_regress, lasso,
                          orlicz_regress)
from .experiments import ExperimentConfig, rows_csv, run_experiment, results_json, write_results
from .io import FORMATS, load_matrix, load_vector, save_matrix, save_vector
from .oracle import oracle_solve
from .simulate import NoiseSpec, simulate_lowrank, simulate_regression

log = logging.getLogger("orliczsketch")


# used when --param is omitted
DEFAULT_PARAMS = {"power": 2.0, "huber": 0.75, "fair": 1.0, "l15": 0.25, "l1l2": None}


def _family(args):
    if args.family not in DEFAULT_PARAMS:
        raise ValueError(f"unknown family {args.family!r}; choose from {sorted(DEFAULT_PARAMS)}")
    param = DEFAULT_PARAMS[args.family] if args.param is None else args.param
    return make_orlicz(args.family, param)


def _add_family(p):
    p.add_argument("--family", default="huber",
                   help="power, huber, l1l2, fair or l15 (default huber)")
    p.add_argument("--param", type=float, default=None,
                   help="family parameter: p, delta or c (defaults: power 2, huber 0.75, fair 1, l15 0.25)")


def _add_system(p):
    p.add_argument("--matrix", required=True, help="matrix file")
    p.add_argument("--matrix-format", choices=FORMATS, default="dense_csv")
    p.add_argument("--rhs", required=True, help="right-hand side, one value per line")


def _parse_values(text):
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ValueError(f"cannot parse --values {text!r}") from None


def cmd_norm(args):
    g = _family(args)
    if (args.values is None) == (args.vector is None):
        raise ValueError("give exactly one of --values or --vector")
    x = _parse_values(args.values) if args.values is not None else load_vector(args.vector)
    return {"family": g.kind, "param": g.param, "norm": orlicz_norm(g, x)}


def _regression_doc(out):
    return {"solution": [float(v) for v in out.solution], "loss": out.loss,
            "sketch_dims": [list(d) if isinstance(d, tuple) else d for d in out.sketch_dims],
            "seed": out.seed.as_dict(), "reseeded": out.reseeded}


def cmd_regress(args):
    A = load_matrix(args.matrix, args.matrix_format)
    b = load_vector(args.rhs)
    out = orlicz_regress(_family(args), A, b, seed=SeedSpec(args.seed), mode=args.mode)
    return _regression_doc(out)


def _parse_term(spec, fmt):
    parts = spec.split(":")
    if len(parts) != 4:
        raise ValueError(f"--term expects family:param:matrix:rhs, got {spec!r}")
    family, param, mpath, bpath = parts
    try:
        value = float(param) if param else DEFAULT_PARAMS.get(family)
    except ValueError:
        raise ValueError(f"bad parameter {param!r} in --term") from None
    g = make_orlicz(family, value)
    return CombinedTerm(g, load_matrix(mpath, fmt), load_vector(bpath))


def cmd_combined(args):
    terms = [_parse_term(t, args.matrix_format) for t in args.term]
    return _regression_doc(combined_regress(terms, seed=SeedSpec(args.seed), mode=args.mode))


def cmd_lasso(args):
    A = load_matrix(args.matrix, args.matrix_format)
    b = load_vector(args.rhs)
    return _regression_doc(lasso(A, b, args.lam, seed=SeedSpec(args.seed), mode=args.mode))


def cmd_lowrank(args):
    A = load_matrix(args.matrix, args.matrix_format)
    if args.method == "pca":
        fac = pca_baseline(A, args.k, args.p)
    else:
        fac = lp_lowrank_best(A, args.k, args.p, args.variant, seed=SeedSpec(args.seed),
                              restarts=args.restarts, threads=args.threads)
    if args.factors:
        save_matrix(fac.U, args.factors + ".U.csv")
        save_matrix(fac.V, args.factors + ".V.csv")
    return {"k": fac.k, "p": fac.p, "loss_p": fac.loss_p, "method": args.method}


def cmd_simulate(args):
    rng = SeedSpec(args.seed).generator(0)
    prefix = args.prefix
    if args.kind == "regression":
        noise = NoiseSpec(args.noise_kind, args.sigma, args.fraction, args.scale)
        A, b, x_star = simulate_regression(args.n, args.d, noise, rng)
        save_matrix(A, prefix + ".A.csv")
        save_vector(b, prefix + ".b.csv")
        save_vector(x_star, prefix + ".xstar.csv")
        files = [prefix + ".A.csv", prefix + ".b.csv", prefix + ".xstar.csv"]
    else:
        A, planted = simulate_lowrank(args.n, args.d, args.k, args.outliers,
                                      args.outlier_scale, rng)
        save_matrix(A, prefix + ".A.csv")
        save_matrix(planted, prefix + ".planted.csv")
        files = [prefix + ".A.csv", prefix + ".planted.csv"]
    return {"kind": args.kind, "files": files}


def cmd_oracle(args):
    A = load_matrix(args.matrix, args.matrix_format)
    b = load_vector(args.rhs)
    res = oracle_solve(_family(args), A, b, lr=args.lr, stop=args.stop, max_iter=args.max_iter)
    return {"solution": [float(v) for v in res.x], "loss": res.loss,
            "iterations": res.iterations, "converged": res.converged}


def read_config(path):
    """JSON object, or flat ``key = value`` lines with ``#`` comments."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: bad JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be an object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        data[key.strip()] = value.strip()
    return data


def cmd_experiment(args):
    data = read_config(args.config) if args.config else {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        data[key.strip()] = value.strip()
    if args.seed_given:
        data["seed"] = args.seed
    data.setdefault("threads", args.threads)
    cfg = ExperimentConfig.from_mapping(data)
    return run_experiment(cfg)


COMMANDS = {
    "norm": cmd_norm, "regress": cmd_regress, "combined": cmd_combined, "lasso": cmd_lasso,
    "lowrank": cmd_lowrank, "simulate": cmd_simulate, "oracle": cmd_oracle,
    "experiment": cmd_experiment,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="orliczsketch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--out", default=None, help="write results here instead of stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="Orlicz norm of a vector")
    _add_family(p)
    p.add_argument("--values", help="comma-separated entries")
    p.add_argument("--vector", help="vector file")

    for name, helptext in (("regress", "sketched Orlicz regression"),
                           ("oracle", "gradient-descent reference solution")):
        p = sub.add_parser(name, help=helptext)
        _add_family(p)
        _add_system(p)
        if name == "regress":
            p.add_argument("--mode", choices=("auto", "diag", "full"), default="auto")
        else:
            p.add_argument("--lr", type=float, default=1e-3)
            p.add_argument("--stop", type=float, default=1e-7)
            p.add_argument("--max-iter", type=int, default=100_000)

    p = sub.add_parser("combined", help="sum of Orlicz-norm terms")
    p.add_argument("--term", action="append", required=True,
                   help="family:param:matrix:rhs (repeat per term; empty param = default)")
    p.add_argument("--matrix-format", choices=FORMATS, default="dense_csv")
    p.add_argument("--mode", choices=("auto", "diag", "full"), default="auto")

    p = sub.add_parser("lasso", help="||Ax-b||_2 + lam ||x||_1")
    _add_system(p)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--mode", choices=("auto", "diag", "full"), default="auto")

    p = sub.add_parser("lowrank", help="entrywise-lp rank-k approximation")
    p.add_argument("--matrix", required=True)
    p.add_argument("--matrix-format", choices=FORMATS, default="dense_csv")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--method", choices=("sketch", "pca"), default="sketch")
    p.add_argument("--variant", choices=("theoretical", "experimental"), default="theoretical")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--factors", help="save U and V as <prefix>.U.csv / <prefix>.V.csv")

    p = sub.add_parser("simulate", help="write a synthetic problem to disk")
    p.add_argument("kind", choices=("regression", "lowrank"))
    p.add_argument("--prefix", required=True, help="output file prefix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--noise-kind", choices=("gaussian", "sparse", "mixed"), default="gaussian")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--fraction", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=0.0)
    p.add_argument("--outliers", type=int, default=0)
    p.add_argument("--outlier-scale", type=float, default=100.0)

    p = sub.add_parser("experiment", help="run an experiment from a config file")
    p.add_argument("--config", help="JSON or flat key = value file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    return parser


def _render(doc, fmt):
    if fmt == "json":
        return results_json(doc)
    rows = doc.get("rows") if "rows" in doc else [
        {k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in doc.items()}]
    return rows_csv(rows)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        if args.seed < 0 or args.threads < 1:
            raise ValueError("--seed must be >= 0 and --threads >= 1")
        doc = COMMANDS[args.command](args)
        if args.out and args.command == "experiment":
            write_results(doc, args.out, args.format)
        elif args.out:
            with open(args.out, "w") as fh:
                fh.write(_render(doc, args.format))
        else:
            sys.stdout.write(_render(doc, args.format))
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
