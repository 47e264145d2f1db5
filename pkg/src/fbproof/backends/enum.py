"""Exhaustive finite-model validity checking.

Validity of `axioms -> claim` is decided for every combination of domain
sizes 1..bound over the sorts the obligation uses. Two strategies cover the
same model space: "sat" grounds the negated claim and searches it with the
bundled CDCL solver (complete, so UNSAT means no model exists); "explicit"
literally walks every interpretation and evaluates the claim, which is only
practical for tiny vocabularies and serves as a cross-check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from ..logic import (
    ConstDecl,
    Formula,
    FuncDecl,
    Not,
    RelDecl,
    Vocabulary,
    all_terms,
    conj,
    has_primed,
    subformulas,
    symbols,
)
from ..logic import Exists, Forall, Var
from .evaluate import evaluate
from .ground import Grounder
from .model import Bounds, Counterexample, FiniteModel, Unknown, Valid, ValidUpToBound, Verdict, full_model


class InternalError(Exception):
    pass


def used_sorts(vocab: Vocabulary, formulas: Iterable[Formula]) -> list[str]:
    found: set[str] = set()
    for f in formulas:
        for name, _ in symbols(f):
            decl = vocab.get(name)
            if isinstance(decl, ConstDecl):
                found.add(decl.sort)
            elif isinstance(decl, FuncDecl):
                found.update(decl.arg_sorts + (decl.result,))
            elif isinstance(decl, RelDecl):
                found.update(decl.arg_sorts)
        for sub in subformulas(f):
            if isinstance(sub, (Forall, Exists)):
                found.update(v.sort for v in sub.binders)
        for t in all_terms(f):
            if isinstance(t, Var):
                found.add(t.sort)
    return [s for s in vocab.sorts if s in found]


def size_combinations(vocab: Vocabulary, formulas: Sequence[Formula], bounds: Bounds) -> Iterator[dict[str, int]]:
    sorts = used_sorts(vocab, formulas)
    for combo in bounds.combinations(sorts):
        yield {s: combo.get(s, 1) for s in vocab.sorts}


@dataclass
class EnumConfig:
    bounds: Bounds = Bounds()
    strategy: str = "sat"
    max_conflicts: Optional[int] = 200_000
    max_models: int = 1_000_000


def check_validity(
    claim: Formula,
    axioms: Sequence[Formula],
    vocab: Vocabulary,
    config: EnumConfig = EnumConfig(),
) -> Verdict:
    formulas = [claim, *axioms]
    two_state = any(has_primed(f) for f in formulas)
    sorts = used_sorts(vocab, formulas)
    examined = 0
    for sizes in size_combinations(vocab, formulas, config.bounds):
        if config.strategy == "explicit":
            result, n = _explicit(claim, axioms, vocab, sizes, two_state, config.max_models - examined)
            examined += n
        elif config.strategy == "sat":
            result = _sat(claim, axioms, vocab, sizes, two_state, config.max_conflicts)
            examined += 1
        else:
            raise ValueError(f"unknown strategy {config.strategy!r}")
        if isinstance(result, FiniteModel):
            _revalidate(claim, axioms, result)
            return Counterexample(result)
        if result is None:
            return Unknown("enumeration budget exceeded", examined)
    if not sorts:
        return Valid()
    return ValidUpToBound(config.bounds)


def enum_check_valid(obligation, axioms=None, bounds: Bounds | None = None, **kw) -> Verdict:
    """Check an obligation (anything with .claim, .axioms, .vocab)."""
    cfg = EnumConfig(bounds=bounds or Bounds(), **kw)
    ax = obligation.axioms if axioms is None else axioms
    return check_validity(obligation.claim, ax, obligation.vocab, cfg)


def _revalidate(claim: Formula, axioms: Sequence[Formula], model: FiniteModel) -> None:
    if evaluate(claim, model):
        raise InternalError("counterexample satisfies the claim")
    for a in axioms:
        if not evaluate(a, model):
            raise InternalError("counterexample violates an axiom")


def _sat(claim, axioms, vocab, sizes, two_state, max_conflicts):
    g = Grounder(vocab, sizes)
    for a in axioms:
        if not g.assert_formula(a):
            return False
    if not g.assert_formula(Not(claim)):
        return False
    res = g.solver.solve(max_conflicts=max_conflicts)
    if res is None:
        return None
    if not res:
        return False
    return g.decode(two_state)


def interpretations(vocab: Vocabulary, sizes: dict[str, int], keys: Sequence[tuple[str, bool]]) -> Iterator[dict]:
    """All interpretations of the listed (symbol, primed) keys."""
    choices = []
    for name, _ in keys:
        decl = vocab.get(name)
        if isinstance(decl, ConstDecl):
            choices.append(list(range(sizes[decl.sort])))
        elif isinstance(decl, FuncDecl):
            points = list(itertools.product(*(range(sizes[s]) for s in decl.arg_sorts)))
            tables = itertools.product(range(sizes[decl.result]), repeat=len(points))
            choices.append([dict(zip(points, t)) for t in tables])
        else:
            points = list(itertools.product(*(range(sizes[s]) for s in decl.arg_sorts)))
            subsets = []
            for bits in itertools.product((False, True), repeat=len(points)):
                subsets.append(frozenset(p for p, b in zip(points, bits) if b))
            choices.append(subsets)
    for combo in itertools.product(*choices):
        yield dict(zip(keys, combo))


def _explicit(claim, axioms, vocab, sizes, two_state, budget):
    keys = sorted({(n, p) for f in [claim, *axioms] for n, p in symbols(f)})
    n = 0
    for values in interpretations(vocab, sizes, keys):
        if n >= budget:
            return None, n
        n += 1
        model = full_model(vocab, sizes, values, two_state)
        if all(evaluate(a, model) for a in axioms) and not evaluate(claim, model):
            return model, n
    return False, n
