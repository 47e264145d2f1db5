"""Many-sorted first-order syntax over one-state and two-state vocabularies.

Terms and formulas are frozen dataclasses, so they hash, compare
structurally, and can be shared freely. Primed-ness is a flag on each
symbol occurrence; the primed vocabulary is never materialized.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union


class LogicError(Exception):
    pass


# ---------------------------------------------------------------------------
# vocabulary


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: str
    mutable: bool = False


@dataclass(frozen=True)
class FuncDecl:
    name: str
    arg_sorts: tuple[str, ...]
    result: str
    mutable: bool = False


@dataclass(frozen=True)
class RelDecl:
    name: str
    arg_sorts: tuple[str, ...]
    mutable: bool = False


Decl = Union[ConstDecl, FuncDecl, RelDecl]


@dataclass(frozen=True)
class Vocabulary:
    sorts: tuple[str, ...] = ()
    constants: tuple[ConstDecl, ...] = ()
    functions: tuple[FuncDecl, ...] = ()
    relations: tuple[RelDecl, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.sorts)) != len(self.sorts):
            raise LogicError(f"duplicate sort in {self.sorts}")
        seen: set[str] = set()
        for decl in self.decls():
            if decl.name in seen:
                raise LogicError(f"symbol {decl.name!r} declared twice")
            if decl.name in self.sorts:
                raise LogicError(f"symbol {decl.name!r} clashes with a sort name")
            seen.add(decl.name)
            for s in _decl_sorts(decl):
                if s not in self.sorts:
                    raise LogicError(f"symbol {decl.name!r} uses undeclared sort {s!r}")

    def decls(self) -> Iterator[Decl]:
        yield from self.constants
        yield from self.functions
        yield from self.relations

    @cached_property
    def table(self) -> dict[str, Decl]:
        return {d.name: d for d in self.decls()}

    def get(self, name: str) -> Optional[Decl]:
        return self.table.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.table

    def is_mutable(self, name: str) -> bool:
        decl = self.table.get(name)
        return decl is not None and decl.mutable

    @cached_property
    def mutable_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls() if d.mutable)

    @cached_property
    def names(self) -> frozenset[str]:
        return frozenset(self.table) | frozenset(self.sorts)

    def is_propositional(self) -> bool:
        return not self.sorts

    def extend(self, *decls: Decl, sorts: Sequence[str] = ()) -> "Vocabulary":
        consts = list(self.constants)
        funcs = list(self.functions)
        rels = list(self.relations)
        for d in decls:
            if isinstance(d, ConstDecl):
                consts.append(d)
            elif isinstance(d, FuncDecl):
                funcs.append(d)
            else:
                rels.append(d)
        return Vocabulary(self.sorts + tuple(sorts), tuple(consts), tuple(funcs), tuple(rels))

    def fresh(self, base: str, avoid: Iterable[str] = ()) -> str:
        return fresh_name(base, self.names | set(avoid))


def _decl_sorts(decl: Decl) -> tuple[str, ...]:
    if isinstance(decl, ConstDecl):
        return (decl.sort,)
    if isinstance(decl, FuncDecl):
        return decl.arg_sorts + (decl.result,)
    return decl.arg_sorts


_SUFFIX = re.compile(r"^(.*?)(\d+)$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """Smallest `base` + integer suffix not in `avoid` (deterministic)."""
    avoid = set(avoid)
    if base not in avoid:
        return base
    for i in itertools.count():
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str
    primed: bool = False

    def __str__(self) -> str:
        return self.name + ("'" if self.primed else "")


@dataclass(frozen=True)
class Apply:
    name: str
    args: tuple["Term", ...]
    primed: bool = False

    def __str__(self) -> str:
        return f"{self.name}{_tick(self.primed)}({', '.join(map(str, self.args))})"


Term = Union[Var, Const, Apply]


def _tick(primed: bool) -> str:
    return "'" if primed else ""


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "false"


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[Term, ...] = ()
    primed: bool = False


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    binders: tuple[Var, ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    binders: tuple[Var, ...]
    body: "Formula"


Formula = Union[Top, Bottom, Eq, Rel, Not, And, Or, Implies, Iff, Forall, Exists]
Quantifier = (Forall, Exists)


def _formula_str(self) -> str:
    from .syntax import format_formula

    return format_formula(self)


for _cls in (Eq, Rel, Not, And, Or, Implies, Iff, Forall, Exists):
    _cls.__str__ = _formula_str  # type: ignore[assignment]


# smart constructors ---------------------------------------------------------


def conj(*parts: Formula | Iterable[Formula]) -> Formula:
    """n-ary conjunction that drops `true`, flattens nested conjunctions, and
    collapses to a single conjunct or `true`."""
    items: list[Formula] = []
    for p in _flatten_args(parts):
        if isinstance(p, Top):
            continue
        if isinstance(p, And):
            items.extend(p.args)
        else:
            items.append(p)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(*parts: Formula | Iterable[Formula]) -> Formula:
    items: list[Formula] = []
    for p in _flatten_args(parts):
        if isinstance(p, Bottom):
            continue
        if isinstance(p, Or):
            items.extend(p.args)
        else:
            items.append(p)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def _flatten_args(parts) -> Iterator[Formula]:
    for p in parts:
        if isinstance(p, (list, tuple)) and not isinstance(p, (And, Or)):
            yield from p
        else:
            yield p


def forall(binders: Sequence[Var], body: Formula) -> Formula:
    return Forall(tuple(binders), body) if binders else body


def exists(binders: Sequence[Var], body: Formula) -> Formula:
    return Exists(tuple(binders), body) if binders else body


def neq(a: Term, b: Term) -> Formula:
    return Not(Eq(a, b))


# ---------------------------------------------------------------------------
# generic traversal


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, (Forall, Exists)):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def term_subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Apply):
        for a in t.args:
            yield from term_subterms(a)


def atom_terms(f: Formula) -> tuple[Term, ...]:
    if isinstance(f, Eq):
        return (f.left, f.right)
    if isinstance(f, Rel):
        return f.args
    return ()


def all_terms(f: Formula) -> Iterator[Term]:
    for sub in subformulas(f):
        for t in atom_terms(sub):
            yield from term_subterms(t)


def symbols(f: Formula) -> set[tuple[str, bool]]:
    """Every (symbol name, primed) occurrence in f."""
    out: set[tuple[str, bool]] = set()
    for sub in subformulas(f):
        if isinstance(sub, Rel):
            out.add((sub.name, sub.primed))
    for t in all_terms(f):
        if isinstance(t, (Const, Apply)):
            out.add((t.name, t.primed))
    return out


def symbol_names(f: Formula) -> set[str]:
    return {name for name, _ in symbols(f)}


def has_primed(f: Formula) -> bool:
    return any(p for _, p in symbols(f))


def bound_names(f: Formula) -> set[str]:
    out: set[str] = set()
    for sub in subformulas(f):
        if isinstance(sub, (Forall, Exists)):
            out.update(v.name for v in sub.binders)
    return out


@lru_cache(maxsize=65536)
def free_vars(f: Formula) -> frozenset[Var]:
    if isinstance(f, (Eq, Rel)):
        out: set[Var] = set()
        for t in atom_terms(f):
            out |= term_vars(t)
        return frozenset(out)
    if isinstance(f, (Forall, Exists)):
        bound = {v.name for v in f.binders}
        return frozenset(v for v in free_vars(f.body) if v.name not in bound)
    out = set()
    for c in children(f):
        out |= free_vars(c)
    return frozenset(out)


def term_vars(t: Term) -> frozenset[Var]:
    if isinstance(t, Var):
        return frozenset((t,))
    if isinstance(t, Apply):
        out: set[Var] = set()
        for a in t.args:
            out |= term_vars(a)
        return frozenset(out)
    return frozenset()


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def _rebuild(f: Formula, kids: Sequence[Formula]) -> Formula:
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, And):
        return And(tuple(kids))
    if isinstance(f, Or):
        return Or(tuple(kids))
    if isinstance(f, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(f, Iff):
        return Iff(kids[0], kids[1])
    if isinstance(f, Forall):
        return Forall(f.binders, kids[0])
    if isinstance(f, Exists):
        return Exists(f.binders, kids[0])
    return f


def map_atoms(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild f with every atom (Eq/Rel) replaced by fn(atom). Binders are
    left alone, so fn must not introduce free variables that could be
    captured."""
    if isinstance(f, (Eq, Rel)):
        return fn(f)
    if isinstance(f, (Top, Bottom)):
        return f
    return _rebuild(f, [map_atoms(c, fn) for c in children(f)])


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    def atom(a: Formula) -> Formula:
        if isinstance(a, Eq):
            return Eq(fn(a.left), fn(a.right))
        assert isinstance(a, Rel)
        return Rel(a.name, tuple(fn(t) for t in a.args), a.primed)

    return map_atoms(f, atom)


# ---------------------------------------------------------------------------
# two-state operations


def _set_prime_term(t: Term, mutable: frozenset[str], mode: str) -> Term:
    if isinstance(t, Var):
        return t
    args = tuple(_set_prime_term(a, mutable, mode) for a in t.args) if isinstance(t, Apply) else ()
    primed = _flag(t.name, t.primed, mutable, mode)
    if isinstance(t, Const):
        return Const(t.name, primed)
    return Apply(t.name, args, primed)


def _flag(name: str, primed: bool, mutable: frozenset[str], mode: str) -> bool:
    if name not in mutable:
        return False
    if mode == "prime":
        return True
    if mode == "unprime":
        return False
    return not primed


def _set_prime(f: Formula, mutable: frozenset[str], mode: str) -> Formula:
    def atom(a: Formula) -> Formula:
        if isinstance(a, Eq):
            return Eq(_set_prime_term(a.left, mutable, mode), _set_prime_term(a.right, mutable, mode))
        assert isinstance(a, Rel)
        args = tuple(_set_prime_term(t, mutable, mode) for t in a.args)
        return Rel(a.name, args, _flag(a.name, a.primed, mutable, mode))

    return map_atoms(f, atom)


def prime(f: Formula, vocab: Vocabulary) -> Formula:
    """phi' : every mutable occurrence gets the primed flag."""
    if has_primed(f):
        raise LogicError(f"prime() expects a one-state formula, got {f}")
    return _set_prime(f, vocab.mutable_names, "prime")


def swap_state(f: Formula, vocab: Vocabulary) -> Formula:
    """Toggle the primed flag on every mutable occurrence (time reversal)."""
    return _set_prime(f, vocab.mutable_names, "swap")


def unprime(f: Formula, vocab: Vocabulary) -> Formula:
    return _set_prime(f, vocab.mutable_names, "unprime")


# ---------------------------------------------------------------------------
# substitution


def _subst_in_term(t: Term, var_map: Mapping[str, Term], const_map: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return var_map.get(t.name, t)
    if isinstance(t, Const):
        if not t.primed and t.name in const_map:
            return const_map[t.name]
        return t
    return Apply(t.name, tuple(_subst_in_term(a, var_map, const_map) for a in t.args), t.primed)


def _substitute(
    f: Formula,
    var_map: Mapping[str, Term],
    const_map: Mapping[str, Term],
    danger: frozenset[str],
    taken: frozenset[str],
) -> Formula:
    """Simultaneous capture-avoiding replacement of free variables (by name)
    and unprimed constants. `danger` holds variable names free in the
    replacement terms; binders with these names get renamed."""
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Eq):
        return Eq(_subst_in_term(f.left, var_map, const_map), _subst_in_term(f.right, var_map, const_map))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(_subst_in_term(t, var_map, const_map) for t in f.args), f.primed)
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in var_map.items() if k not in {b.name for b in f.binders}}
        if not inner and not const_map:
            return f
        new_binders = []
        used = set(taken) | {v.name for v in free_vars(f.body)} | bound_names(f.body)
        for b in f.binders:
            if b.name in danger:
                fresh = fresh_name(b.name, used | danger)
                used.add(fresh)
                inner[b.name] = Var(fresh, b.sort)
                new_binders.append(Var(fresh, b.sort))
            else:
                new_binders.append(b)
        body = _substitute(f.body, inner, const_map, danger, frozenset(used))
        return type(f)(tuple(new_binders), body)
    return _rebuild(f, [_substitute(c, var_map, const_map, danger, taken) for c in children(f)])


def _danger(terms: Iterable[Term]) -> frozenset[str]:
    out: set[str] = set()
    for t in terms:
        out.update(v.name for v in term_vars(t))
    return frozenset(out)


def subst_vars(f: Formula, mapping: Mapping[Var, Term] | Mapping[str, Term]) -> Formula:
    """Simultaneously replace free variables; capture-avoiding."""
    var_map = {(k.name if isinstance(k, Var) else k): v for k, v in mapping.items()}
    return _substitute(f, var_map, {}, _danger(var_map.values()), frozenset())


def subst_terms(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Simultaneously replace unprimed occurrences of constant symbols."""
    return _substitute(f, {}, dict(mapping), _danger(mapping.values()), frozenset())


def subst_term(f: Formula, target: str, replacement: Term, vocab: Optional[Vocabulary] = None) -> Formula:
    """f[replacement/target] for a constant symbol `target`."""
    if vocab is not None:
        decl = vocab.get(target)
        if not isinstance(decl, ConstDecl):
            raise LogicError(f"{target!r} is not a constant")
        rs = term_sort(replacement, vocab)
        if rs != decl.sort:
            raise LogicError(f"cannot substitute {replacement} of sort {rs} for {target}:{decl.sort}")
    return subst_terms(f, {target: replacement})


def rename_bound_apart(f: Formula, avoid: Iterable[str]) -> Formula:
    """Rename every binder of f whose name is in `avoid`."""
    avoid = frozenset(avoid)

    def go(g: Formula, ren: dict[str, Term], used: set[str]) -> Formula:
        if isinstance(g, (Eq, Rel)):
            return _substitute(g, ren, {}, frozenset(), frozenset())
        if isinstance(g, (Forall, Exists)):
            inner = dict(ren)
            new_binders = []
            for b in g.binders:
                if b.name in avoid:
                    fresh = fresh_name(b.name, used | avoid)
                    used.add(fresh)
                    inner[b.name] = Var(fresh, b.sort)
                    new_binders.append(Var(fresh, b.sort))
                else:
                    inner.pop(b.name, None)
                    new_binders.append(b)
            return type(g)(tuple(new_binders), go(g.body, inner, used))
        if isinstance(g, (Top, Bottom)):
            return g
        return _rebuild(g, [go(c, ren, used) for c in children(g)])

    used = bound_names(f) | {v.name for v in free_vars(f)} | set(avoid)
    return go(f, {}, set(used))


def subst_relation(
    host: Formula,
    target: str,
    body: Formula,
    witnesses: str | Sequence[str],
    vocab: Optional[Vocabulary] = None,
) -> Formula:
    """host[body/target]: each application target(t1..tk) becomes
    body[t1/w1, ..., tk/wk]. Binders of `body` are first renamed apart from
    those of `host`. Primed applications are replaced by the primed
    instance, which needs `vocab`."""
    if isinstance(witnesses, str):
        witnesses = (witnesses,)
    witnesses = tuple(witnesses)
    body = rename_bound_apart(body, bound_names(host) | {v.name for v in free_vars(host)})

    def atom(a: Formula) -> Formula:
        if isinstance(a, Rel) and a.name == target:
            if len(a.args) != len(witnesses):
                raise LogicError(f"{target} applied to {len(a.args)} arguments, expected {len(witnesses)}")
            inst = subst_terms(body, dict(zip(witnesses, a.args)))
            if a.primed:
                if vocab is None:
                    raise LogicError("primed tracker occurrence needs a vocabulary")
                inst = prime(inst, vocab)
            return inst
        return a

    return map_atoms(host, atom)


# ---------------------------------------------------------------------------
# sorting


@dataclass(frozen=True)
class SortError:
    path: tuple
    message: str

    def __str__(self) -> str:
        where = "/".join(map(str, self.path)) or "<root>"
        return f"{where}: {self.message}"


@dataclass
class SortReport:
    errors: list[SortError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def term_sort(t: Term, vocab: Vocabulary) -> str:
    if isinstance(t, Var):
        return t.sort
    decl = vocab.get(t.name)
    if isinstance(decl, ConstDecl):
        return decl.sort
    if isinstance(decl, FuncDecl):
        return decl.result
    raise LogicError(f"unknown term symbol {t.name!r}")


def well_sorted(
    f: Formula,
    vocab: Vocabulary,
    two_state: bool = False,
    env: Optional[Mapping[str, str]] = None,
) -> SortReport:
    """Check symbol declarations, arities, sorts, and prime placement.

    Free variables are accepted when they appear in `env` (name -> sort) or
    when env is None (each free variable then carries its own sort)."""
    report = SortReport()

    def err(path, msg):
        report.errors.append(SortError(tuple(path), msg))

    def check_prime(name, primed, path):
        if primed and not vocab.is_mutable(name):
            err(path, f"primed occurrence of immutable symbol {name}")
        if primed and not two_state:
            err(path, f"primed occurrence of {name} in one-state position")

    def term(t: Term, scope: dict[str, str], path) -> Optional[str]:
        if isinstance(t, Var):
            if t.name in scope:
                if scope[t.name] != t.sort:
                    err(path, f"variable {t.name} used at sort {t.sort}, bound at {scope[t.name]}")
                return t.sort
            if env is not None and t.name not in env:
                err(path, f"unbound variable {t.name}")
            elif env is not None and env[t.name] != t.sort:
                err(path, f"variable {t.name} used at sort {t.sort}, declared {env[t.name]}")
            if t.sort not in vocab.sorts:
                err(path, f"variable {t.name} has undeclared sort {t.sort}")
            return t.sort
        decl = vocab.get(t.name)
        if decl is None:
            err(path, f"unknown symbol {t.name}")
            return None
        check_prime(t.name, t.primed, path)
        if isinstance(t, Const):
            if not isinstance(decl, ConstDecl):
                err(path, f"{t.name} is not a constant")
                return None
            return decl.sort
        if not isinstance(decl, FuncDecl):
            err(path, f"{t.name} is not a function")
            return None
        args(t.name, decl.arg_sorts, t.args, scope, path)
        return decl.result

    def args(name, sorts, actuals, scope, path):
        if len(sorts) != len(actuals):
            err(path, f"{name} expects {len(sorts)} arguments, got {len(actuals)}")
            return
        for i, (s, a) in enumerate(zip(sorts, actuals)):
            got = term(a, scope, path + [i])
            if got is not None and got != s:
                err(path + [i], f"argument {i} of {name} has sort {got}, expected {s}")

    def form(g: Formula, scope: dict[str, str], path):
        if isinstance(g, (Top, Bottom)):
            return
        if isinstance(g, Eq):
            a = term(g.left, scope, path + ["lhs"])
            b = term(g.right, scope, path + ["rhs"])
            if a is not None and b is not None and a != b:
                err(path, f"equality between sorts {a} and {b}")
            return
        if isinstance(g, Rel):
            decl = vocab.get(g.name)
            if decl is None:
                err(path, f"unknown symbol {g.name}")
                return
            if not isinstance(decl, RelDecl):
                err(path, f"{g.name} is not a relation")
                return
            check_prime(g.name, g.primed, path)
            args(g.name, decl.arg_sorts, g.args, scope, path)
            return
        if isinstance(g, (Forall, Exists)):
            inner = dict(scope)
            for b in g.binders:
                if b.sort not in vocab.sorts:
                    err(path, f"binder {b.name} has undeclared sort {b.sort}")
                inner[b.name] = b.sort
            form(g.body, inner, path + ["body"])
            return
        for i, c in enumerate(children(g)):
            form(c, scope, path + [i])

    form(f, {}, [])
    return report


def require_well_sorted(f: Formula, vocab: Vocabulary, two_state: bool = False, what: str = "formula") -> None:
    rep = well_sorted(f, vocab, two_state)
    if not rep.ok:
        raise LogicError(f"{what} is not well-sorted: " + "; ".join(map(str, rep.errors)))


# ---------------------------------------------------------------------------
# normal forms and metrics


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; implications and biconditionals are expanded."""
    if isinstance(f, Top):
        return FALSE if negate else TRUE
    if isinstance(f, Bottom):
        return TRUE if negate else FALSE
    if isinstance(f, (Eq, Rel)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, And):
        parts = tuple(nnf(a, negate) for a in f.args)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(a, negate) for a in f.args)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Implies):
        if negate:
            return And((nnf(f.left), nnf(f.right, True)))
        return Or((nnf(f.left, True), nnf(f.right)))
    if isinstance(f, Iff):
        pos = And((nnf(f.left), nnf(f.right)))
        neg = And((nnf(f.left, True), nnf(f.right, True)))
        if negate:
            return Or((And((nnf(f.left), nnf(f.right, True))), And((nnf(f.left, True), nnf(f.right)))))
        return Or((pos, neg))
    if isinstance(f, Forall):
        return Exists(f.binders, nnf(f.body, True)) if negate else Forall(f.binders, nnf(f.body))
    if isinstance(f, Exists):
        return Forall(f.binders, nnf(f.body, True)) if negate else Exists(f.binders, nnf(f.body))
    raise TypeError(f)


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Eq, Rel, Top, Bottom)) or (isinstance(f, Not) and isinstance(f.body, (Eq, Rel)))


@dataclass(frozen=True)
class ComplexityMetrics:
    quantifiers: int
    alternations: int
    connectives: int
    clausal: bool
    prophecy_symbols: int = 0

    @property
    def Q(self) -> int:
        return self.quantifiers

    @property
    def A(self) -> int:
        return self.alternations

    @property
    def B(self) -> int:
        return self.connectives

    @property
    def p(self) -> int:
        return self.prophecy_symbols

    def row(self) -> str:
        s = f"Q={self.Q}, A={self.A}, B={self.B}"
        if self.p:
            s += f", p={self.p}"
        return s


def quantifier_count(f: Formula) -> int:
    return sum(len(s.binders) for s in subformulas(f) if isinstance(s, (Forall, Exists)))


def connective_count(f: Formula) -> int:
    n = 0
    for s in subformulas(f):
        if isinstance(s, (And, Or)):
            n += len(s.args) - 1
        elif isinstance(s, (Implies, Iff)):
            n += 1
    return n


def alternation_count(f: Formula) -> int:
    def go(g: Formula, last: Optional[type], switches: int) -> int:
        if isinstance(g, (Forall, Exists)):
            kind = type(g)
            if last is not None and kind is not last:
                switches += 1
            return go(g.body, kind, switches)
        kids = children(g)
        if not kids:
            return switches
        return max(go(c, last, switches) for c in kids)

    return go(nnf(f), None, 0)


def quantifier_depth(f: Formula) -> int:
    """Maximum number of bound variables along a root-to-leaf path."""
    if isinstance(f, (Forall, Exists)):
        return len(f.binders) + quantifier_depth(f.body)
    kids = children(f)
    return max((quantifier_depth(c) for c in kids), default=0)


def _clause_form(f: Formula) -> Optional[tuple[list[tuple[type, Var]], list[Formula]]]:
    """Try to write an NNF formula as prefix + clause. Returns None when the
    formula needs a conjunction below the prefix."""
    if is_literal(f):
        return [], [f]
    if isinstance(f, (Forall, Exists)):
        inner = _clause_form(f.body)
        if inner is None:
            return None
        prefix, lits = inner
        return [(type(f), v) for v in f.binders] + prefix, lits
    if isinstance(f, Or):
        prefix: list[tuple[type, Var]] = []
        lits: list[Formula] = []
        for a in f.args:
            inner = _clause_form(a)
            if inner is None:
                return None
            prefix += inner[0]
            lits += inner[1]
        return prefix, lits
    if isinstance(f, And) and len(f.args) == 1:
        return _clause_form(f.args[0])
    return None


def is_clausal(f: Formula) -> bool:
    """NNF can be prenexed into a quantifier prefix over one disjunction of
    literals. Variables are assumed distinct across siblings, which holds
    after renaming apart, so the check is purely shape-based."""
    return _clause_form(nnf(f)) is not None


def metrics(f: Formula, prophecy_symbols: int = 0) -> ComplexityMetrics:
    return ComplexityMetrics(
        quantifiers=quantifier_count(f),
        alternations=alternation_count(f),
        connectives=connective_count(f),
        clausal=is_clausal(f),
        prophecy_symbols=prophecy_symbols,
    )


def top_conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        out: list[Formula] = []
        for a in f.args:
            out += top_conjuncts(a)
        return out
    return [f]


def step_metrics(f: Formula, prophecy_symbols: int = 0) -> ComplexityMetrics:
    """Metrics of a user predicate in a class closed under conjunction: the
    component-wise maximum over its top-level conjuncts, clausal when every
    conjunct is."""
    parts = [metrics(c) for c in top_conjuncts(f)] or [metrics(TRUE)]
    return ComplexityMetrics(
        quantifiers=max(m.Q for m in parts),
        alternations=max(m.A for m in parts),
        connectives=max(m.B for m in parts),
        clausal=all(m.clausal for m in parts),
        prophecy_symbols=prophecy_symbols,
    )


# ---------------------------------------------------------------------------
# syntactic cleanup


def simplify(f: Formula) -> Formula:
    """Flatten nested conjunctions/disjunctions, drop neutral constants,
    fold absorbing constants, and remove double negations. Purely
    syntactic, so the result is logically equivalent to f."""
    if isinstance(f, Not):
        b = simplify(f.body)
        if isinstance(b, Not):
            return b.body
        if isinstance(b, Top):
            return FALSE
        if isinstance(b, Bottom):
            return TRUE
        return Not(b)
    if isinstance(f, And):
        parts = [simplify(a) for a in f.args]
        if any(isinstance(p, Bottom) for p in parts):
            return FALSE
        return conj(parts)
    if isinstance(f, Or):
        parts = [simplify(a) for a in f.args]
        if any(isinstance(p, Top) for p in parts):
            return TRUE
        return disj(parts)
    if isinstance(f, Implies):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(a, Top):
            return b
        if isinstance(a, Bottom) or isinstance(b, Top):
            return TRUE
        return Implies(a, b)
    if isinstance(f, Iff):
        return Iff(simplify(f.left), simplify(f.right))
    if isinstance(f, (Forall, Exists)):
        b = simplify(f.body)
        if isinstance(b, (Top, Bottom)):
            return b
        return type(f)(f.binders, b)
    return f
