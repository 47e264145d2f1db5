"""Direct evaluation of formulas in finite models.

This is the reference semantics: counterexamples from every backend are
re-checked here, and the explicit-state oracles use it for bad-state and
prophecy tests."""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Any, Callable, Mapping

from ..logic import (
    And,
    Apply,
    Bottom,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    Term,
    Top,
    Var,
)
from .model import FiniteModel

Env = Mapping[str, int]
Compiled = Callable[[FiniteModel, Env], bool]


def _term(t: Term) -> Callable[[FiniteModel, Env], int]:
    if isinstance(t, Var):
        name = t.name
        return lambda m, env: env[name]
    key = (t.name, t.primed)
    if isinstance(t, Const):
        return lambda m, env: m.values[key]
    args = [_term(a) for a in t.args]
    return lambda m, env: m.values[key][tuple(a(m, env) for a in args)]


@lru_cache(maxsize=4096)
def compile_formula(f: Formula) -> Compiled:
    if isinstance(f, Top):
        return lambda m, env: True
    if isinstance(f, Bottom):
        return lambda m, env: False
    if isinstance(f, Eq):
        a, b = _term(f.left), _term(f.right)
        return lambda m, env: a(m, env) == b(m, env)
    if isinstance(f, Rel):
        key = (f.name, f.primed)
        args = [_term(t) for t in f.args]
        if not args:
            return lambda m, env: () in m.values[key]
        return lambda m, env: tuple(a(m, env) for a in args) in m.values[key]
    if isinstance(f, Not):
        b = compile_formula(f.body)
        return lambda m, env: not b(m, env)
    if isinstance(f, And):
        parts = [compile_formula(a) for a in f.args]
        return lambda m, env: all(p(m, env) for p in parts)
    if isinstance(f, Or):
        parts = [compile_formula(a) for a in f.args]
        return lambda m, env: any(p(m, env) for p in parts)
    if isinstance(f, Implies):
        a, b = compile_formula(f.left), compile_formula(f.right)
        return lambda m, env: (not a(m, env)) or b(m, env)
    if isinstance(f, Iff):
        a, b = compile_formula(f.left), compile_formula(f.right)
        return lambda m, env: a(m, env) == b(m, env)
    if isinstance(f, (Forall, Exists)):
        names = [v.name for v in f.binders]
        sorts = [v.sort for v in f.binders]
        body = compile_formula(f.body)
        want_all = isinstance(f, Forall)

        def quant(m: FiniteModel, env: Env) -> bool:
            ranges = [range(m.sizes[s]) for s in sorts]
            for combo in itertools.product(*ranges):
                inner = dict(env)
                inner.update(zip(names, combo))
                if body(m, inner) != want_all:
                    return not want_all
            return want_all

        return quant
    raise TypeError(f"cannot evaluate {f!r}")


def evaluate(f: Formula, model: FiniteModel, env: Env | None = None) -> bool:
    return compile_formula(f)(model, env or {})
