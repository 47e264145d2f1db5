"""JSON reports for the command-line tool. The shape is pinned by
schemas/report.schema.json."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from .backends.model import verdict_json
from .logic import step_metrics
from .proof import ProofScript, ProphecyStep, QedStep, step_tag
from .syntax import format_formula

REPORT_VERSION = 1


@dataclass(frozen=True)
class MetricsRow:
    step: int
    tag: str
    quantifiers: int
    alternations: int
    connectives: int
    clausal: bool
    witnesses: int

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "tag": self.tag,
            "Q": self.quantifiers,
            "A": self.alternations,
            "B": self.connectives,
            "clausal": self.clausal,
            "p": self.witnesses,
        }

    def describe(self) -> str:
        cl = "clausal" if self.clausal else "non-clausal"
        return f"{self.step:>3}  {self.tag:<2}  Q={self.quantifiers},A={self.alternations},B={self.connectives}  p={self.witnesses}  {cl}"


def metrics_rows(script: ProofScript) -> list[MetricsRow]:
    """One row per user predicate; QED carries none and gets no row."""
    rows = []
    for i, s in enumerate(script.steps, start=1):
        if isinstance(s, QedStep):
            continue
        p = len(s.witnesses) if isinstance(s, ProphecyStep) else 0
        m = step_metrics(s.formula, p)
        rows.append(MetricsRow(i, step_tag(s), m.Q, m.A, m.B, m.clausal, p))
    return rows


def obligation_json(result) -> dict:
    ob = result.obligation
    pv = ob.provenance
    return {
        "name": ob.name,
        "provenance": {
            "rule": pv.rule,
            "label": pv.label,
            # 1-based, like obligation names and metrics rows
            "step": None if pv.step is None else pv.step + 1,
            "path": list(pv.path),
            "transition": pv.transition,
        },
        "verdict": verdict_json(result.verdict),
        "seconds": round(result.seconds, 6),
    }


def proof_json(
    name: str,
    check_result,
    invariant=None,
    certification=None,
    metrics: Optional[list[MetricsRow]] = None,
) -> dict:
    out: dict[str, Any] = {
        "name": name,
        "status": check_result.status,
        "error": check_result.error,
        "obligations": [obligation_json(r) for r in check_result.results],
    }
    if invariant is not None:
        out["invariant"] = format_formula(invariant)
    if certification is not None:
        out["certification"] = {
            "status": certification.status,
            "obligations": [obligation_json(r) for r in certification.results],
        }
    if metrics is not None:
        out["metrics"] = [r.to_json() for r in metrics]
    return out


def report(command: str, spec: str, backend: Optional[str], proofs: list[dict], status: str) -> dict:
    return {
        "version": REPORT_VERSION,
        "command": command,
        "spec": spec,
        "backend": backend,
        "status": status,
        "proofs": proofs,
    }
