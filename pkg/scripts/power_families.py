"""Generate the proof-power families, check the shipped proofs, and report
the quantifier depth of the extracted invariants.

    python3 scripts/power_families.py [--max-n 3] [--backend smt|enum]
"""
import argparse
import time

from fbproof import powergen
from fbproof.backends import make_backend
from fbproof.backends.model import Bounds
from fbproof.backends.reach import bounded_reach
from fbproof.extract import certify, extract
from fbproof.logic import quantifier_depth
from fbproof.proof import check


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--backend", choices=("smt", "enum"), default="smt")
    args = ap.parse_args()
    backend = make_backend(args.backend, bounds=Bounds(default=2))
    for family in powergen.FAMILIES:
        for n in range(1, args.max_n + 1):
            spec = powergen.generate(n, family)
            problem = spec.problem()
            (_, script), = spec.proofs.items()
            t0 = time.perf_counter()
            res = check(problem, script, backend)
            depth, cert = "-", "-"
            if res.accepted:
                inv = extract(res.tree, problem).simplified
                depth = quantifier_depth(inv)
                cert = certify(problem, inv, backend).status
            reach = type(bounded_reach(problem, Bounds(default=2))).__name__
            print(f"{family:<5} n={n}  {res.status:<10} depth={depth}  {cert:<10} reach@2={reach}  {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
