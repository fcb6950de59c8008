"""Command-line interface.

Every command prints one JSON report on stdout::

    {"command": ..., "inputs": ..., "result": ..., "seed": ...,
     "tolerances": ..., "wall_time": ...}

Exit status: 0 on success (including ``NotFalsified`` and
``VerifiedExact``), 2 when a candidate or convexity claim is falsified or a
reproduction fact fails, 1 on usage or parse errors.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import specfile
from .exceptions import MatSubdiffError
from .expr import evaluate
from .oracle import check_subgradient, falsify_convexity
from .repro import EXAMPLE_NAMES, build_example
from .subgrad import SMOOTH_TOL, clarke_sample, subdiff_interval_1d, subgradient
from .symmat import DEFAULT_TOL

EXIT_OK, EXIT_USAGE, EXIT_FALSIFIED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_vector(text):
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}; expected comma-separated decimals") from None
    if not vals or not np.all(np.isfinite(vals)):
        raise UsageError(f"cannot parse vector {text!r}; expected finite comma-separated decimals")
    return np.array(vals)


def _matrix(m):
    return np.asarray(m).tolist()


def _cmd_eval(args, F):
    x = parse_vector(args.x)
    return {"x": x.tolist()}, {"value": _matrix(evaluate(F, x))}, EXIT_OK


def _cmd_subgrad(args, F):
    x = parse_vector(args.x)
    cert = subgradient(F, x, policy=args.policy)
    return ({"x": x.tolist(), "policy": args.policy},
            {"V": cert.value.tolist(), "provenance": cert.provenance.to_dict()}, EXIT_OK)


def _cmd_interval(args, F):
    if F.input_dim != 1:
        raise UsageError(f"interval needs a univariate function; spec has d={F.input_dim}")
    x = parse_vector(args.x)
    iv = subdiff_interval_1d(F, x)
    return {"x": x.tolist()}, {"left": _matrix(iv.left), "right": _matrix(iv.right)}, EXIT_OK


def _cmd_check(args, F):
    x = parse_vector(args.x)
    try:
        with open(args.V, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.V}: invalid JSON: {exc}") from None
    V = specfile.candidate_from_json(doc)
    verdict = check_subgradient(F, x, V, budget=args.budget, seed=args.seed, tol=args.tol,
                                method=args.method)
    code = EXIT_FALSIFIED if verdict.falsified else EXIT_OK
    inputs = {"x": x.tolist(), "V": V.tolist(), "budget": args.budget, "method": args.method}
    return inputs, verdict.to_dict(), code


def _cmd_clarke(args, F):
    x = parse_vector(args.x)
    gens = clarke_sample(F, x, n=args.n, radius=args.r, seed=args.seed, tol=args.smooth_tol)
    inputs = {"x": x.tolist(), "n": args.n, "radius": args.r}
    return inputs, {"count": len(gens), "generators": [g.tolist() for g in gens]}, EXIT_OK


def _cmd_falsify(args, F):
    w = falsify_convexity(F, budget=args.budget, seed=args.seed, tol=args.tol)
    result = {"witness": None if w is None else w.to_dict()}
    return {"budget": args.budget}, result, EXIT_OK if w is None else EXIT_FALSIFIED


def _cmd_repro(args):
    names = EXAMPLE_NAMES if args.name == "all" else [args.name]
    results = {}
    ok = True
    for name in names:
        ex = build_example(name)
        facts = [{"fact": desc, "passed": passed} for desc, passed in ex.run()]
        ok &= all(f["passed"] for f in facts)
        results[name] = facts
    return {"name": args.name}, {"examples": results, "all_passed": ok}, EXIT_OK if ok else EXIT_FALSIFIED


COMMANDS = {
    "eval": _cmd_eval,
    "subgrad": _cmd_subgrad,
    "interval": _cmd_interval,
    "check": _cmd_check,
    "clarke": _cmd_clarke,
    "falsify-convexity": _cmd_falsify,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="relative PSD tolerance (default %(default)g)")
    common.add_argument("--smooth-tol", type=float, default=SMOOTH_TOL,
                        help="differentiability tolerance (default %(default)g)")
    common.add_argument("--pretty", action="store_true", help="human-readable output")

    spec = argparse.ArgumentParser(add_help=False)
    spec.add_argument("-f", "--file", required=True, help="function spec (JSON)")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("-x", required=True, help="point as comma-separated decimals")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="matsubdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("eval", parents=[common, spec, point], help="evaluate F(x)")
    p = sub.add_parser("subgrad", parents=[common, spec, point], help="certified subgradient")
    p.add_argument("--policy", choices=["rules", "right-derivative"], default="rules")
    sub.add_parser("interval", parents=[common, spec, point],
                   help="exact subdifferential of a univariate F")
    p = sub.add_parser("check", parents=[common, spec, point, seeded],
                       help="verify or falsify a subgradient candidate")
    p.add_argument("-V", required=True, help="candidate file (JSON)")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--method", choices=["auto", "raw"], default="auto")
    p = sub.add_parser("clarke", parents=[common, spec, point, seeded],
                       help="sample Clarke generators near x")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("-r", type=float, default=1e-3)
    p = sub.add_parser("falsify-convexity", parents=[common, spec, seeded],
                       help="search for a convexity violation")
    p.add_argument("--budget", type=int, default=10_000)
    p = sub.add_parser("repro", parents=[common], help="check the worked examples")
    p.add_argument("--name", required=True, choices=list(EXAMPLE_NAMES) + ["all"])
    return parser


def render_pretty(report):
    lines = [f"command: {report['command']}"]
    for key, val in report["inputs"].items():
        lines.append(f"  {key} = {json.dumps(val)}")
    lines.append("result:")
    for key, val in report["result"].items():
        if key == "examples":
            for name, facts in val.items():
                lines.append(f"  {name}")
                for f in facts:
                    lines.append(f"    [{'PASS' if f['passed'] else 'FAIL'}] {f['fact']}")
        else:
            lines.append(f"  {key}: {json.dumps(val)}")
    lines.append(f"wall time: {report['wall_time']:.3f} s")
    return "\n".join(lines)


def run(argv=None, stdout=None):
    """Run one command; returns the exit code and writes the report to ``stdout``."""
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "repro":
            inputs, result, code = _cmd_repro(args)
        else:
            F = specfile.load(args.file)
            inputs, result, code = COMMANDS[args.command](args, F)
            inputs = {"file": args.file, **inputs}
    except (UsageError, MatSubdiffError, OSError) as exc:
        print(f"matsubdiff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {
        "command": args.command,
        "inputs": inputs,
        "result": result,
        "seed": getattr(args, "seed", None),
        "tolerances": {"psd": args.tol, "smooth": args.smooth_tol},
        "wall_time": time.perf_counter() - start,
    }
    if args.pretty:
        print(render_pretty(report), file=stdout)
    else:
        print(json.dumps(report, sort_keys=True), file=stdout)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
