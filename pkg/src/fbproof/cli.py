"""Command-line entry point: fbproof {check,extract,metrics,reach,reverse,powergen}.

Exit codes: 0 success (accepted / certified / safe up to the bound),
1 negative or inconclusive outcome, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import powergen
from .backends import make_backend
from .backends.model import DEFAULT_BOUND, Bounds
from .backends.reach import DEFAULT_MAX_STATES, BudgetExceeded, ErrorTrace, bounded_reach
from .extract import ExtractionError, certify, extract
from .proof import check
from .report import metrics_rows, proof_json, report
from .syntax import ParseError, format_formula, format_problem, parse_file
from .system import ProblemError, herbrandize_safety, reverse

log = logging.getLogger("fbproof")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_bounds(specs: Optional[list[str]]) -> Bounds:
    """`SORT=N` entries set one sort; a bare `N` sets the default."""
    sizes: dict[str, int] = {}
    default = DEFAULT_BOUND
    for s in specs or []:
        sort, eq, num = s.partition("=")
        try:
            if eq:
                sizes[sort.strip()] = int(num)
            else:
                default = int(sort)
        except ValueError:
            raise UsageError(f"bad --bound {s!r}; expected SORT=N or N") from None
    if default < 1 or any(n < 1 for n in sizes.values()):
        raise UsageError("bounds must be positive")
    return Bounds.of(sizes, default)


def _load(args):
    spec = parse_file(args.spec)
    problem = spec.problem()
    if getattr(args, "herbrandize", False):
        problem = herbrandize_safety(problem)
    return spec, problem


def _backend(args):
    return make_backend(
        args.backend,
        bounds=parse_bounds(args.bound),
        solver_cmd=args.solver_cmd,
        timeout_s=args.timeout_s,
        dump_dir=args.dump_smt,
    )


def _selected_proofs(spec, name: Optional[str]):
    proofs = spec.proofs
    if not proofs:
        raise UsageError("the input file contains no proof")
    if name is None:
        return list(proofs.items())
    if name not in proofs:
        raise UsageError(f"no proof named {name!r}; available: {', '.join(proofs)}")
    return [(name, proofs[name])]


def _emit(args, data: dict, text: str) -> None:
    if args.json:
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _obligation_lines(results) -> list[str]:
    lines = []
    for r in results:
        mark = "ok  " if r.ok else "FAIL"
        lines.append(f"  {mark} {r.obligation.name}  ({r.seconds:.2f}s)")
        if not r.ok:
            lines += ["       " + ln for ln in r.verdict.describe().splitlines()]
    return lines


def cmd_check(args) -> int:
    spec, problem = _load(args)
    backend = _backend(args)
    out, text, ok = [], [], True
    for name, script in _selected_proofs(spec, args.proof):
        res = check(problem, script, backend, jobs=args.jobs)
        ok &= res.accepted
        out.append(proof_json(name, res))
        text.append(f"proof {name}: {res.status}" + (f" ({res.error})" if res.error else ""))
        text += _obligation_lines(res.results)
    status = "accepted" if ok else "rejected"
    if not ok and all(p["status"] != "rejected" for p in out):
        status = "inconclusive"
    _emit(args, report("check", args.spec, backend.name, out, status), "\n".join(text))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_extract(args) -> int:
    spec, problem = _load(args)
    backend = _backend(args)
    out, text, ok = [], [], True
    for name, script in _selected_proofs(spec, args.proof):
        res = check(problem, script, backend, jobs=args.jobs)
        if not res.accepted:
            ok = False
            out.append(proof_json(name, res))
            text.append(f"proof {name}: {res.status}, nothing to extract")
            text += _obligation_lines(res.failures())
            continue
        inv = extract(res.tree, problem).simplified
        cert = certify(problem, inv, backend, jobs=args.jobs)
        ok &= cert.ok
        out.append(proof_json(name, res, invariant=inv, certification=cert))
        text.append(f"proof {name}: {format_formula(inv)}")
        text.append(f"  certification: {cert.status}")
        text += _obligation_lines(cert.results)
    status = "certified" if ok else "rejected"
    _emit(args, report("extract", args.spec, backend.name, out, status), "\n".join(text))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_metrics(args) -> int:
    spec, _ = _load(args)
    proofs = spec.proofs
    if args.proof is not None:
        proofs = dict(_selected_proofs(spec, args.proof))
    out, text = [], []
    for name, script in proofs.items():
        rows = metrics_rows(script)
        out.append({"name": name, "status": "unchecked", "error": None, "obligations": [], "metrics": [r.to_json() for r in rows]})
        text.append(f"proof {name}:")
        text += ["  " + r.describe() for r in rows] or ["  (no steps)"]
    _emit(args, report("metrics", args.spec, None, out, "ok"), "\n".join(text))
    return EXIT_OK


def cmd_reach(args) -> int:
    _, problem = _load(args)
    bounds = parse_bounds(args.bound)
    res = bounded_reach(problem, bounds, max_states=args.max_states, strategy=args.strategy)
    data = {"version": 1, "command": "reach", "spec": args.spec, "explored": res.explored}
    if isinstance(res, ErrorTrace):
        data.update(status="unsafe", trace=res.trace.to_json())
        text = f"error trace of length {len(res.trace)} ({res.explored} states explored)\n" + res.trace.describe()
        code = EXIT_FAIL
    elif isinstance(res, BudgetExceeded):
        data.update(status="budget-exceeded")
        text = f"state budget exhausted after {res.explored} states"
        code = EXIT_FAIL
    else:
        data.update(status="safe-up-to-bound", bounds=bounds.to_json())
        text = f"safe up to bound ({res.explored} states explored)"
        code = EXIT_OK
    _emit(args, data, text)
    return code


def cmd_reverse(args) -> int:
    _, problem = _load(args)
    rev = reverse(problem)
    text = format_problem(rev)
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_powergen(args) -> int:
    if args.n < 1:
        raise UsageError("n must be at least 1")
    text = powergen.source(args.n, args.family)
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fbproof", description="Incremental forward-backward safety proofs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_cmd(name, fn, help_text, backend=True, proof=True):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("spec", help="path to a .fbp file")
        sp.add_argument("--json", action="store_true", help="print a JSON report")
        sp.add_argument("--herbrandize", action="store_true", help="replace outer universals of safety by fresh constants")
        if proof:
            sp.add_argument("--proof", help="name of the proof to use (default: all)")
        if backend:
            sp.add_argument("--backend", choices=("smt", "enum"), default="smt")
            sp.add_argument("--solver-cmd", help="SMT solver command reading SMT-LIB2 on stdin")
            sp.add_argument("--timeout-s", type=float, default=30.0)
            sp.add_argument("--jobs", type=int, default=1)
            sp.add_argument("--dump-smt", metavar="DIR", help="write each SMT query to DIR")
        if backend or name == "reach":
            sp.add_argument("--bound", action="append", metavar="SORT=N", help="domain bound (repeatable)")
        sp.set_defaults(fn=fn)
        return sp

    spec_cmd("check", cmd_check, "check proofs")
    spec_cmd("extract", cmd_extract, "extract and certify an inductive invariant")
    spec_cmd("metrics", cmd_metrics, "per-step predicate metrics", backend=False)
    r = spec_cmd("reach", cmd_reach, "bounded explicit-state reachability", backend=False, proof=False)
    r.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    r.add_argument("--strategy", choices=("sat", "explicit"), default="sat")
    rv = spec_cmd("reverse", cmd_reverse, "print the time-reversed problem", backend=False, proof=False)
    rv.add_argument("-o", "--output")

    g = sub.add_parser("powergen", help="generate a proof-power family member")
    g.add_argument("n", type=int)
    g.add_argument("--family", choices=powergen.FAMILIES, default="fbpi")
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_powergen)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except ParseError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ProblemError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ExtractionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
