"""Command-line front end: ``sspkit {check,solve,eval,decompose,gen}``.

Exit codes: 0 success, 1 assumption failure, 2 unreadable or malformed
input, 3 negative costs given to the primal-dual method, 4 any other solver
error, 5 generation failure.  ``SSPKIT_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import evaluate, generate, io, lp_core, solvers
from .errors import (
    AssumptionViolated,
    GenerationFailure,
    ImproperPolicy,
    InvalidInstance,
    NegativeCosts,
    SspError,
)
from .model import validate, validate_policy

EXIT_OK, EXIT_ASSUMPTION, EXIT_PARSE, EXIT_NEGATIVE, EXIT_SOLVER, EXIT_GEN = range(6)


def _emit(doc, out):
    text = io.dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    inst = io.read_instance(path)
    problems = validate(inst)
    if problems:
        raise InvalidInstance("; ".join(problems))
    return inst


def _source(value):
    return "all" if value is None else int(value)


def cmd_check(args) -> int:
    inst = _load(args.path)
    report = lp_core.validate_assumptions(inst)
    _emit({"valid": True, **report.as_dict()}, args.out)
    return EXIT_OK if report.ok else EXIT_ASSUMPTION


def cmd_solve(args) -> int:
    inst = _load(args.path)
    kw = {}
    if args.method == "vi":
        if args.tol is not None:
            kw["stop_tol"] = args.tol
        if args.max_iter is not None:
            kw["max_iter"] = args.max_iter
    elif args.method == "pi":
        if args.tol is not None:
            kw["strict_tol"] = args.tol
        if args.max_iter is not None:
            kw["max_iter"] = args.max_iter
    elif args.method == "pd":
        if args.tol is not None:
            kw["tight_tol"] = args.tol
        if args.max_iter is not None:
            kw["max_iter"] = args.max_iter
    elif args.method == "lp":
        kw["warm_start"] = args.warm_start
    res = solvers.solve(inst, args.method, **kw)
    doc = res.as_dict()
    doc["seed"] = args.seed
    _emit(doc, args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _load(args.path)
    policy = io.policy_from_dict(io.read_json(args.policy))
    problems = validate_policy(inst, policy)
    if problems:
        raise InvalidInstance("; ".join(problems))
    source = _source(args.source)
    doc = {"proper": evaluate.is_proper(inst, policy, source)}
    if doc["proper"]:
        doc["flux"] = io.vector_to_dict(evaluate.evaluate_policy_flux(inst, policy, "ones" if source == "all" else source))
        if evaluate.is_proper(inst, policy, "all"):
            doc["values"] = io.vector_to_dict(evaluate.evaluate_policy_values(inst, policy))
    _emit(doc, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    inst = _load(args.path)
    x = io.vector_from_dict(io.read_json(args.flux), inst.m)
    source = _source(args.source)
    try:
        dec = evaluate.decompose_flux(inst, x, "ones" if source == "all" else source)
    except ValueError as exc:
        raise InvalidInstance(str(exc)) from exc
    _emit(io.decomposition_to_dict(dec), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = generate.random_instance(
        args.n,
        actions_per_state=args.actions_per_state,
        density=args.density,
        cost_range=(args.cost_min, args.cost_max),
        nonneg=args.nonneg,
        ensure_assumption1=args.ensure_assumption1,
        deterministic=args.deterministic,
        seed=args.seed,
    )
    _emit(io.instance_to_dict(inst), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sspkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate an instance and its standing assumptions")
    p.add_argument("path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("path")
    p.add_argument("--method", choices=sorted(solvers.METHODS), default="lp")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--warm-start", action="store_true", help="lp only: start from a proper policy basis")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate a stationary policy")
    p.add_argument("path")
    p.add_argument("--policy", required=True)
    p.add_argument("--source", help="start state (default: every state, unscaled)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("decompose", help="decompose a feasible flux into policy fluxes and a cycle")
    p.add_argument("path")
    p.add_argument("--flux", required=True)
    p.add_argument("--source")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--actions-per-state", type=int, default=2)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--cost-min", type=float, default=-10.0)
    p.add_argument("--cost-max", type=float, default=10.0)
    p.add_argument("--nonneg", action="store_true")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--no-ensure-assumption1", dest="ensure_assumption1", action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SSPKIT_LOG", "WARNING").upper(), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", None) is not None and args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_PARSE
    if getattr(args, "n", None) is not None and args.n < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except (io.ParseError, InvalidInstance, ImproperPolicy) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AssumptionViolated as exc:
        if exc.report is not None:
            _emit({"error": str(exc), **exc.report.as_dict()}, None)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NegativeCosts as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except GenerationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEN
    except SspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
