"""Per-step predicate metrics for every corpus proof, in the sequential
F/B/FP row format: "F: Q=2,A=1,B=2 / B: ... ".

    python3 scripts/metrics_table.py [--corpus DIR]
"""
import argparse
from pathlib import Path

from fbproof.report import metrics_rows
from fbproof.syntax import parse_file


def row_string(rows) -> str:
    parts = []
    for r in rows:
        p = f",p={r.witnesses}" if r.witnesses else ""
        parts.append(f"{r.tag}: Q={r.quantifiers},A={r.alternations},B={r.connectives}{p}")
    return " / ".join(parts)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    args = ap.parse_args()
    for path in sorted(Path(args.corpus).glob("*.fbp")):
        spec = parse_file(path)
        for name, script in spec.proofs.items():
            print(f"{path.stem + ':' + name:<28} {row_string(metrics_rows(script))}")


if __name__ == "__main__":
    main()
