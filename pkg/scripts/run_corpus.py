"""Check, extract and certify every proof in the corpus; one line per proof.

    python3 scripts/run_corpus.py [--backend smt|enum] [--bound N] [--corpus DIR]
"""
import argparse
import sys
import time
from pathlib import Path

from fbproof.backends import make_backend
from fbproof.backends.model import Bounds
from fbproof.extract import certify, extract
from fbproof.proof import check
from fbproof.syntax import format_formula, parse_file

# proofs that are expected to be rejected
EXPECTED_REJECTED = {("dealer-bad-proof.fbp", "main")}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--backend", choices=("smt", "enum"), default="smt")
    ap.add_argument("--bound", type=int, default=2)
    ap.add_argument("--corpus", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    ap.add_argument("--show-invariants", action="store_true")
    args = ap.parse_args()
    backend = make_backend(args.backend, bounds=Bounds(default=args.bound))
    surprises = 0
    for path in sorted(Path(args.corpus).glob("*.fbp")):
        if path.is_symlink():
            continue
        spec = parse_file(path)
        problem = spec.problem()
        for name, script in spec.proofs.items():
            t0 = time.perf_counter()
            res = check(problem, script, backend)
            cert = "-"
            if res.accepted:
                inv = extract(res.tree, problem).simplified
                cert = certify(problem, inv, backend).status
            dt = time.perf_counter() - t0
            expected = "rejected" if (path.name, name) in EXPECTED_REJECTED else "accepted"
            flag = "" if res.status == expected else "  <-- unexpected"
            surprises += bool(flag)
            print(f"{path.name:<24} {name:<6} {res.status:<12} {cert:<10} {len(res.results):>3} obligations {dt:6.2f}s{flag}")
            if args.show_invariants and res.accepted:
                print("    " + format_formula(inv))
    return 1 if surprises else 0


if __name__ == "__main__":
    sys.exit(main())
