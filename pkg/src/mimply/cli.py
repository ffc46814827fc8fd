"""Command-line front end.

Exit codes: 0 success (or CorrectTautology for ``verify``), 1 no proof / invalid
derivation / CorrectDerivation, 2 Incorrect certificate, 64 malformed input or
usage.
"""

from __future__ import annotations

import argparse
import sys

from . import checker, nd, oracle, rdag, redundancy
from .formula import parse_formula

EX_OK, EX_FAIL, EX_INCORRECT, EX_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EX_USAGE)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _load_derivation(path: str) -> nd.Derivation:
    try:
        return nd.loads_derivation(_read(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _formula(text: str):
    try:
        return parse_formula(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# --- commands ------------------------------------------------------------------

def cmd_parse(args) -> int:
    print(_formula(args.formula).text())
    return EX_OK


def cmd_prove(args) -> int:
    f = _formula(args.formula)
    if args.max_depth is not None and args.max_depth < 1:
        raise UsageError("--max-depth must be at least 1")
    d = nd.proof_search(f, args.max_depth)
    if d is None:
        print(f"no proof of {f.text()} found", file=sys.stderr)
        return EX_FAIL
    _write(args.output, nd.dumps_derivation(d))
    return EX_OK


def cmd_check_nd(args) -> int:
    d = _load_derivation(args.file)
    try:
        nd.validate_derivation(d)
    except nd.DerivationError as exc:
        print(f"invalid: {exc}")
        return EX_FAIL
    yes = {True: "yes", False: "no"}
    print("valid")
    print(f"conclusion: {nd.conclusion(d).text()}")
    print(f"open assumptions: {sorted(f.text() for f in nd.open_assumptions(d))}")
    print(f"normal: {yes[nd.is_normal(d)]}")
    print(f"expanded: {yes[nd.is_expanded(d)]}")
    return EX_OK


def cmd_compress(args) -> int:
    d = _load_derivation(args.file)
    try:
        nd.validate_derivation(d)
        params = rdag.CompressParams(redundancy.RedundancyParams(args.min_count, args.min_size))
    except ValueError as exc:
        print(f"cannot compress: {exc}", file=sys.stderr)
        return EX_FAIL if isinstance(exc, nd.DerivationError) else EX_USAGE
    dag = rdag.compress(d, params)
    _write(args.output, rdag.dumps_rdag(dag))
    out = sys.stdout if args.output not in (None, "-") else sys.stderr
    print(f"tree size: {len(d)}", file=out)
    print(f"dag size: {len(dag)}", file=out)
    print(f"ratio: {len(dag) / len(d):.4f}", file=out)
    return EX_OK


def _verify_one(path: str, steps: bool) -> int:
    try:
        c = rdag.loads_rdag(_read(path))
    except (ValueError, UsageError) as exc:
        print(f"{path}: malformed: {exc}", file=sys.stderr)
        return EX_USAGE
    v = checker.check(c)
    if v.correct:
        print(f"{path}: {v.outcome.value} {v.root_entailment.render(c.order)}")
    else:
        layer = "structure" if v.reason.startswith("Structure") else "entailment"
        print(f"{path}: Incorrect ({layer}) {v.reason}")
    if steps:
        print(f"{path}: steps {v.steps} bound {v.bound} "
              f"(h={v.height + 1}, n_v={v.n_v}, n_A={v.n_a})")
    return {
        checker.Outcome.CORRECT_TAUTOLOGY: EX_OK,
        checker.Outcome.CORRECT_DERIVATION: EX_FAIL,
        checker.Outcome.INCORRECT: EX_INCORRECT,
    }[v.outcome]


def cmd_verify(args) -> int:
    codes = [_verify_one(p, args.steps) for p in args.files]
    worst = (EX_USAGE, EX_INCORRECT, EX_FAIL, EX_OK)
    return next(c for c in worst if c in codes)


def cmd_stats(args) -> int:
    d = _load_derivation(args.file)
    try:
        nd.validate_derivation(d)
    except nd.DerivationError as exc:
        print(f"invalid: {exc}")
        return EX_FAIL
    lev = d.levels()
    counts = [0] * (d.height() + 1)
    for l in lev:
        counts[l] += 1
    params = redundancy.RedundancyParams(args.min_count, args.min_size)
    groups = redundancy.lri(d, params)
    print(f"nodes: {len(d)}")
    print(f"height: {d.height()}")
    print(f"nodes per level: {' '.join(map(str, counts))}")
    print(f"branches: {len(nd.branches(d))}")
    print(f"lri groups: {len(groups)}")
    for g in groups:
        print(f"  level {g.level}: {len(g.roots)} instances of size {g.size} "
              f"({d.formulas[g.matrix].text()})")
    return EX_OK


def cmd_gen_fib(args) -> int:
    if args.n < 2:
        raise UsageError("-n must be at least 2")
    inst = (oracle.fib_closed if args.closed else oracle.fib_family)(args.n)
    _write(args.output, nd.dumps_derivation(inst.derivation))
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mimply", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="print a formula in canonical form")
    s.add_argument("-f", "--formula", required=True)
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("prove", help="search for a normal expanded proof")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("--max-depth", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("check-nd", help="validate a tree derivation")
    s.add_argument("file", nargs="?", default="-")
    s.set_defaults(func=cmd_check_nd)

    s = sub.add_parser("compress", help="compress a derivation into an r-DAG")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("-o", "--output")
    s.add_argument("--min-count", type=int, default=2)
    s.add_argument("--min-size", type=int, default=2)
    s.set_defaults(func=cmd_compress)

    s = sub.add_parser("verify", help="check r-DAG certificates")
    s.add_argument("files", nargs="*", default=["-"])
    s.add_argument("--steps", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", help="levels, branches and repeated sub-derivations")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("--min-count", type=int, default=2)
    s.add_argument("--min-size", type=int, default=2)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("gen-fib", help="write a Fibonacci-family derivation")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--closed", action="store_true", help="discharge every assumption")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen_fib)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mimply: {exc}", file=sys.stderr)
        return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
