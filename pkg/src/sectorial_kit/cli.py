"""``sectorial-kit`` command line: check an instance, run a suite, generate an instance.

Exit codes: 0 all checks pass, 1 a verification failure, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import SUITES, VerificationReport, check_instance, run_suite
from .instance import InstanceError, parse_instance, random_instance, serialize_instance, tolerance_of

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sectorial-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="run every applicable check on an instance file")
    check.add_argument("file")
    check.add_argument("--tol", type=float, help="override subspace_eq_tol")
    check.add_argument("--json", metavar="OUT", help="write the JSON report here ('-' for stdout)")
    check.add_argument("--timing", action="store_true", help="keep elapsed_ms in the JSON report")

    suite = sub.add_parser("suite", help="run a seeded verification suite")
    suite.add_argument("--name", required=True, choices=SUITES)
    suite.add_argument("--trials", type=int, required=True)
    suite.add_argument("--max-dim", type=int, required=True)
    suite.add_argument("--seed", type=int, required=True)
    suite.add_argument("--json", metavar="OUT", help="write the JSON report here ('-' for stdout)")
    suite.add_argument("--timing", action="store_true", help="keep elapsed_ms in the JSON report")

    gen = sub.add_parser("gen", help="print a random instance document")
    gen.add_argument("--kind", required=True, choices=("tbt", "sum"))
    gen.add_argument("--dim-h", type=int, required=True, help="dim H (the space dimension n for 'sum')")
    gen.add_argument("--dim-k", type=int, help="dim K (tbt only; default dim H)")
    gen.add_argument("--graph-dim", type=int, help="dimension of the graph of T (tbt only; default dim H)")
    gen.add_argument("--norm-cap", type=float, default=10.0, help="norm of B (tbt only)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", help="write here instead of stdout")
    return parser


def _write(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _summarise(report: VerificationReport) -> None:
    for c in report.checks:
        mark = "ok  " if c.passed else "FAIL"
        print(f"{mark} {c.name:<32} residual={c.residual:.3e} threshold={c.threshold:.1e}", file=sys.stderr)
    verdict = "pass" if report.verdict else "fail"
    print(f"verdict: {verdict} ({report.elapsed_ms:.0f} ms)", file=sys.stderr)


def _finish(report: VerificationReport, args) -> int:
    _summarise(report)
    _write(args.json, report.to_json(normalize_timing=not args.timing))
    return EXIT_OK if report.verdict else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            with open(args.file, encoding="utf-8") as fh:
                doc = parse_instance(fh.read())
            tol = tolerance_of(doc).replace(subspace_eq_tol=args.tol) if args.tol is not None else None
            return _finish(check_instance(doc, tol), args)
        if args.command == "suite":
            return _finish(run_suite(args.name, args.trials, args.max_dim, args.seed), args)
        if args.kind == "tbt":
            dims = (args.dim_h, args.dim_k if args.dim_k is not None else args.dim_h)
            doc = random_instance("tbt", dims, args.graph_dim, args.norm_cap, args.seed)
        else:
            doc = random_instance("sum", args.dim_h, seed=args.seed)
        text = serialize_instance(doc)
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (InstanceError, ValueError, OSError) as exc:
        print(f"sectorial-kit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
