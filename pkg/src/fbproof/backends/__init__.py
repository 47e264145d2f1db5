"""Validity backends behind one small interface.

A backend turns an obligation (anything with .name, .claim, .axioms and
.vocab) into a verdict. `discharge` runs a batch, optionally in parallel,
and returns results in input order.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .enum import EnumConfig, check_validity as _enum_check
from .model import Bounds, Verdict
from .smt import SmtConfig, check_validity as _smt_check


@dataclass
class EnumBackend:
    bounds: Bounds = field(default_factory=Bounds)
    strategy: str = "sat"
    max_conflicts: Optional[int] = 200_000
    name = "enum"

    def check(self, obligation) -> Verdict:
        cfg = EnumConfig(self.bounds, self.strategy, self.max_conflicts)
        return _enum_check(obligation.claim, obligation.axioms, obligation.vocab, cfg)


@dataclass
class SmtBackend:
    config: SmtConfig = field(default_factory=SmtConfig)
    name = "smt"

    def check(self, obligation) -> Verdict:
        return _smt_check(obligation.claim, obligation.axioms, obligation.vocab, self.config, obligation.name)


def make_backend(
    name: str,
    bounds: Optional[Bounds] = None,
    solver_cmd: Optional[str] = None,
    timeout_s: float = 30.0,
    dump_dir: Optional[str] = None,
):
    if name == "enum":
        return EnumBackend(bounds or Bounds())
    if name == "smt":
        cfg = SmtConfig(timeout_s=timeout_s, dump_dir=dump_dir)
        if solver_cmd:
            cfg.solver_cmd = solver_cmd
        return SmtBackend(cfg)
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class Discharged:
    verdict: Verdict
    seconds: float


def discharge(obligations: Sequence, backend, jobs: int = 1) -> list[Discharged]:
    def one(ob) -> Discharged:
        t0 = time.perf_counter()
        v = backend.check(ob)
        return Discharged(v, time.perf_counter() - t0)

    if jobs <= 1 or len(obligations) <= 1:
        return [one(ob) for ob in obligations]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, obligations))
