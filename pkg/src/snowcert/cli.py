"""Command-line entry point.

Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error,
3 ``check`` found a witness.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import DEFAULT_EPSILONS, DEFAULT_KS, compare_transform, scan, triple_audit
from .chains import (
    Chain,
    SearchBudget,
    SraQuery,
    best_alpha,
    default_node_cap,
    sra_check,
    witness_diagnostics,
)
from .errors import NoAdmissibleChain, SnowcertError
from .generators import KINDS, GeneratorSpec, generate
from .io import canonical_dumps, read_matrix, write_json, write_matrix
from .metric import DEFAULT_TOL_REL, product, rescale, snowflake_transform, validate

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_WITNESS = 3


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_io(p, output=True):
    p.add_argument("-i", "--input", default="-", help="matrix file or - for stdin")
    p.add_argument("--format", choices=["json", "csv"], default=None,
                   help="matrix format (default: from file extension, else json)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL_REL,
                   help="relative tolerance for metric validation")
    if output:
        p.add_argument("-o", "--output", default="-")


def _add_budget(p):
    p.add_argument("--mode", choices=["exact", "beam"], default="exact")
    p.add_argument("--beam-width", type=int, default=256)
    p.add_argument("--node-cap", type=int, default=None,
                   help="search node limit (default: $SNOWCERT_NODE_CAP or 1e10)")
    p.add_argument("--time-cap", type=float, default=float("inf"), help="seconds")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: number of CPUs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snowcert",
        description="Certify or refute rough-angle conditions on finite metric spaces.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an example space")
    p.add_argument("--spec", help="GeneratorSpec JSON file (overrides the flags below)")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--m", type=int, help="grid resolution")
    p.add_argument("--alpha-s", type=float, help="snowflake exponent")
    p.add_argument("--n", type=int, help="Tyson-Wu dimension or random metric size")
    p.add_argument("--cap", type=int, default=500, help="Tyson-Wu point cap")
    p.add_argument("--levels", type=int, help="gamma_product coordinates")
    p.add_argument("--c", type=float, help="gamma schedule constant")
    p.add_argument("--model", default="uniform_perturbed",
                   choices=["uniform_perturbed", "random_points_lp"])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--format", choices=["json", "csv"], default=None)

    p = sub.add_parser("validate", help="check the metric axioms")
    _add_io(p)
    p.add_argument("--triangle", choices=["auto", "exact", "sampled"], default="auto")
    p.add_argument("--report", action="store_true",
                   help="print a summary instead of the canonical matrix")

    p = sub.add_parser("transform", help="snowflake and/or rescale a matrix")
    _add_io(p)
    p.add_argument("--alpha", type=float, default=None, help="snowflake exponent in (0, 1]")
    p.add_argument("--scale", type=float, default=None, help="multiply all distances")

    p = sub.add_parser("product", help="product of two matrices")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=["l2", "sup"], default="l2")
    p.add_argument("--max-points", type=int, default=4096)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL_REL)
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.add_argument("-o", "--output", default="-")

    for name, helptext in (("check", "certify or refute for one (k, epsilon, alpha)"),
                           ("best-alpha", "optimal alpha for (k, epsilon)")):
        p = sub.add_parser(name, help=helptext)
        _add_io(p)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--epsilon", type=float, default=None,
                       help="spacing tolerance (best-alpha: default 1/k with --line-fitting)")
        if name == "check":
            p.add_argument("--alpha", type=float, required=True)
        else:
            p.add_argument("--line-fitting", action="store_true",
                           help="use epsilon = 1/k (line-fitting defect)")
        p.add_argument("--distinct", action="store_true",
                       help="require pairwise distinct chain points")
        _add_budget(p)

    p = sub.add_parser("scan", help="alpha_star over a (k, epsilon) grid")
    _add_io(p)
    p.add_argument("--ks", type=_ints, default=list(DEFAULT_KS))
    p.add_argument("--epsilons", type=_floats, default=list(DEFAULT_EPSILONS))
    p.add_argument("--alpha-probe", type=float, default=None)
    p.add_argument("--report-format", choices=["json", "csv"], default="json")
    p.add_argument("--no-timing", action="store_true", help="omit wall_time fields")
    _add_budget(p)

    p = sub.add_parser("compare", help="alpha_star after snowflaking with several exponents")
    _add_io(p)
    p.add_argument("--alphas", type=_floats, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    _add_budget(p)

    p = sub.add_parser("audit", help="fraction of triples with small rough angle")
    _add_io(p)
    p.add_argument("--alpha-probe", type=float, required=True)

    p = sub.add_parser("diagnose", help="near-geodesic bounds on a chain")
    _add_io(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--chain", type=_ints, help="comma-separated indices")
    src.add_argument("--witness", help="verdict JSON produced by check")
    return parser


def _budget(args) -> SearchBudget:
    node_cap = args.node_cap if args.node_cap is not None else default_node_cap()
    return SearchBudget(args.mode, args.beam_width, node_cap, args.time_cap)


def _load(args):
    if args.input != "-" and not Path(args.input).exists():
        raise UsageError(f"input file not found: {args.input}")
    return read_matrix(args.input, args.format, args.tol)


def _gen_spec(args) -> GeneratorSpec:
    if args.spec:
        if not Path(args.spec).exists():
            raise UsageError(f"spec file not found: {args.spec}")
        return GeneratorSpec.from_dict(json.loads(Path(args.spec).read_text()))
    if not args.kind:
        raise UsageError("gen needs --kind or --spec")
    kind = args.kind
    if kind == "euclidean_grid":
        params = {"m": args.m}
    elif kind == "snowflaked_interval":
        params = {"m": args.m, "alpha_s": args.alpha_s}
    elif kind == "tyson_wu_block":
        params = {"n": args.n, "cap": args.cap, "seed": args.seed}
    elif kind == "gamma_product":
        params = {"levels": args.levels, "m": args.m, "c": args.c}
    elif kind == "random_metric":
        params = {"n": args.n, "seed": args.seed, "model": args.model,
                  "dim": args.dim, "p": args.p}
    else:
        raise UsageError("product_of needs --spec with a 'factors' list")
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise UsageError(f"{kind} needs --{missing[0].replace('_', '-')}")
    return GeneratorSpec(kind, params)


def _cmd_gen(args):
    m = generate(_gen_spec(args))
    write_matrix(m, args.output, args.format)
    return EXIT_OK


def _cmd_validate(args):
    if args.input != "-" and not Path(args.input).exists():
        raise UsageError(f"input file not found: {args.input}")
    m = read_matrix(args.input, args.format, args.tol)
    if args.triangle != "auto":
        m = validate(m.d, args.tol, m.labels, args.triangle, meta=m.meta)
    if args.report:
        write_json({"valid": True, "n": m.n, "max_entry": m.max_entry,
                    "triangle_slack": m.triangle_slack}, args.output)
    else:
        write_matrix(m, args.output, args.format)
    return EXIT_OK


def _cmd_transform(args):
    m = _load(args)
    if args.alpha is not None:
        m = snowflake_transform(m, args.alpha)
    if args.scale is not None:
        m = rescale(m, args.scale)
    write_matrix(m, args.output, args.format)
    return EXIT_OK


def _cmd_product(args):
    for path in (args.left, args.right):
        if not Path(path).exists():
            raise UsageError(f"input file not found: {path}")
    a = read_matrix(args.left, None, args.tol)
    b = read_matrix(args.right, None, args.tol)
    write_matrix(product(a, b, args.mode, args.max_points), args.output, args.format)
    return EXIT_OK


def _cmd_check(args):
    m = _load(args)
    eps = 0.0 if args.epsilon is None else args.epsilon
    query = SraQuery(args.k, eps, args.alpha)
    try:
        verdict = sra_check(m, query, _budget(args), args.threads, args.distinct)
    except NoAdmissibleChain as exc:
        write_json({"verdict": "vacuous_certificate", "query": query.to_dict(),
                    "reason": str(exc), "mode": args.mode}, args.output)
        return EXIT_OK
    write_json(verdict.to_dict(), args.output)
    return EXIT_WITNESS if verdict.verdict == "witness" else EXIT_OK


def _cmd_best_alpha(args):
    m = _load(args)
    if args.line_fitting:
        eps = 1.0 / args.k
    else:
        eps = 0.0 if args.epsilon is None else args.epsilon
    res = best_alpha(m, args.k, eps, _budget(args), args.threads, args.distinct)
    out = {"k": args.k, "epsilon": eps, "alpha_star": res.alpha_star,
           "certified": res.certified, "mode": res.mode,
           "chains_examined": res.chains_examined}
    out.update(res.chain.to_dict())
    write_json(out, args.output)
    return EXIT_OK


def _cmd_scan(args):
    m = _load(args)
    rep = scan(m, args.ks, args.epsilons, _budget(args), args.threads, args.alpha_probe)
    timing = not args.no_timing
    if args.report_format == "csv":
        text = rep.to_csv(timing)
    else:
        text = canonical_dumps(rep.to_dict(timing))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


def _cmd_compare(args):
    m = _load(args)
    rows = compare_transform(m, args.alphas, args.k, args.epsilon, _budget(args), args.threads)
    write_json({"k": args.k, "epsilon": args.epsilon,
                "rows": [r.to_dict() for r in rows]}, args.output)
    return EXIT_OK


def _cmd_audit(args):
    m = _load(args)
    frac = triple_audit(m, args.alpha_probe)
    write_json({"alpha_probe": args.alpha_probe, "beta": 2.0**args.alpha_probe - 1.0,
                "fraction": frac, "n": m.n}, args.output)
    return EXIT_OK


def _cmd_diagnose(args):
    m = _load(args)
    if args.witness:
        if not Path(args.witness).exists():
            raise UsageError(f"witness file not found: {args.witness}")
        indices = json.loads(Path(args.witness).read_text())["chain"]
    else:
        indices = args.chain
    rec = witness_diagnostics(Chain.from_indices(m, indices), m)
    write_json(rec.to_dict(), args.output)
    return EXIT_OK if rec.passed else EXIT_DOMAIN


COMMANDS = {
    "gen": _cmd_gen,
    "validate": _cmd_validate,
    "transform": _cmd_transform,
    "product": _cmd_product,
    "check": _cmd_check,
    "best-alpha": _cmd_best_alpha,
    "scan": _cmd_scan,
    "compare": _cmd_compare,
    "audit": _cmd_audit,
    "diagnose": _cmd_diagnose,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write("snowcert: error: --threads must be >= 1\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"snowcert: error: {exc}\n")
        return EXIT_USAGE
    except SnowcertError as exc:
        sys.stderr.write(canonical_dumps(exc.to_dict()))
        return EXIT_DOMAIN
    except BrokenPipeError:
        # reader went away (e.g. ``| head``); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(canonical_dumps({"error": "io_error", "message": str(exc), "details": {}}))
        return EXIT_DOMAIN


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
