"""Grounding of first-order formulas over fixed finite carriers into CNF.

Every relation point is one propositional variable. Constants and function
points are one-hot over their result sort with exactly-one constraints, so
each satisfying assignment is exactly one total finite interpretation.
Quantifiers expand to finite conjunctions and disjunctions. Internal nodes
are Tseitin-encoded with full equivalences and hash-consed.
"""
from __future__ import annotations

import itertools
from typing import Mapping, Optional, Sequence, Union

from ..logic import (
    And,
    Apply,
    Bottom,
    Const,
    ConstDecl,
    Eq,
    Exists,
    Forall,
    Formula,
    FuncDecl,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    RelDecl,
    Term,
    Top,
    Var,
    Vocabulary,
)
from .model import FiniteModel, full_model
from .sat import Solver

Prop = Union[bool, int]


class Grounder:
    def __init__(self, vocab: Vocabulary, sizes: Mapping[str, int], solver: Optional[Solver] = None):
        self.vocab = vocab
        self.sizes = dict(sizes)
        self.solver = solver or Solver()
        self.rel_atoms: dict[tuple[str, bool, tuple[int, ...]], int] = {}
        self.onehot: dict[tuple[str, bool, tuple[int, ...]], list[int]] = {}
        self._and_cache: dict[frozenset[int], int] = {}
        self._or_cache: dict[frozenset[int], int] = {}

    # -- atoms --------------------------------------------------------------

    def rel_var(self, name: str, primed: bool, args: tuple[int, ...]) -> int:
        key = (name, primed, args)
        v = self.rel_atoms.get(key)
        if v is None:
            v = self.solver.new_var()
            self.rel_atoms[key] = v
        return v

    def value_vars(self, name: str, primed: bool, args: tuple[int, ...] = ()) -> list[int]:
        """One-hot variables for a constant or a function point."""
        key = (name, primed, args)
        vs = self.onehot.get(key)
        if vs is None:
            decl = self.vocab.get(name)
            sort = decl.sort if isinstance(decl, ConstDecl) else decl.result
            vs = [self.solver.new_var() for _ in range(self.sizes[sort])]
            self.solver.add_clause(vs)
            for a, b in itertools.combinations(vs, 2):
                self.solver.add_clause([-a, -b])
            self.onehot[key] = vs
        return vs

    # -- propositional connectives ----------------------------------------

    def and_(self, items) -> Prop:
        lits: set[int] = set()
        for x in items:
            if x is False:
                return False
            if x is True:
                continue
            if -x in lits:
                return False
            lits.add(x)
        if not lits:
            return True
        if len(lits) == 1:
            return next(iter(lits))
        key = frozenset(lits)
        v = self._and_cache.get(key)
        if v is None:
            v = self.solver.new_var()
            for lit in lits:
                self.solver.add_clause([-v, lit])
            self.solver.add_clause([v] + [-lit for lit in lits])
            self._and_cache[key] = v
        return v

    def or_(self, items) -> Prop:
        neg = []
        for x in items:
            if x is True:
                return True
            if x is False:
                continue
            neg.append(-x)
        r = self.and_(neg)
        return self.not_(r)

    @staticmethod
    def not_(x: Prop) -> Prop:
        if x is True:
            return False
        if x is False:
            return True
        return -x

    def iff_(self, a: Prop, b: Prop) -> Prop:
        return self.or_([self.and_([a, b]), self.and_([self.not_(a), self.not_(b)])])

    # -- terms and formulas ------------------------------------------------

    def term(self, t: Term, env: Mapping[str, int], sort_size: Optional[int] = None) -> list[Prop]:
        """Props t=e for each element e of t's sort."""
        if isinstance(t, Var):
            n = self.sizes[t.sort]
            val = env[t.name]
            return [i == val for i in range(n)]
        if isinstance(t, Const):
            return list(self.value_vars(t.name, t.primed))
        decl = self.vocab.get(t.name)
        assert isinstance(decl, FuncDecl)
        arg_tables = [self.term(a, env) for a in t.args]
        n = self.sizes[decl.result]
        fixed = [_fixed(tab) for tab in arg_tables]
        if all(f is not None for f in fixed):
            return list(self.value_vars(t.name, t.primed, tuple(fixed)))
        out: list[list[Prop]] = [[] for _ in range(n)]
        for combo in itertools.product(*(range(len(tab)) for tab in arg_tables)):
            guard = self.and_([tab[a] for tab, a in zip(arg_tables, combo)])
            if guard is False:
                continue
            vs = self.value_vars(t.name, t.primed, tuple(combo))
            for e in range(n):
                out[e].append(self.and_([guard, vs[e]]))
        return [self.or_(parts) for parts in out]

    def formula(self, f: Formula, env: Optional[Mapping[str, int]] = None) -> Prop:
        env = env or {}
        if isinstance(f, Top):
            return True
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Eq):
            a = self.term(f.left, env)
            b = self.term(f.right, env)
            return self.or_([self.and_([x, y]) for x, y in zip(a, b)])
        if isinstance(f, Rel):
            tables = [self.term(a, env) for a in f.args]
            fixed = [_fixed(tab) for tab in tables]
            if all(x is not None for x in fixed):
                return self.rel_var(f.name, f.primed, tuple(fixed))
            parts = []
            for combo in itertools.product(*(range(len(tab)) for tab in tables)):
                guard = self.and_([tab[a] for tab, a in zip(tables, combo)])
                if guard is False:
                    continue
                parts.append(self.and_([guard, self.rel_var(f.name, f.primed, tuple(combo))]))
            return self.or_(parts)
        if isinstance(f, Not):
            return self.not_(self.formula(f.body, env))
        if isinstance(f, And):
            out = []
            for a in f.args:
                x = self.formula(a, env)
                if x is False:
                    return False
                out.append(x)
            return self.and_(out)
        if isinstance(f, Or):
            out = []
            for a in f.args:
                x = self.formula(a, env)
                if x is True:
                    return True
                out.append(x)
            return self.or_(out)
        if isinstance(f, Implies):
            a = self.formula(f.left, env)
            if a is False:
                return True
            return self.or_([self.not_(a), self.formula(f.right, env)])
        if isinstance(f, Iff):
            return self.iff_(self.formula(f.left, env), self.formula(f.right, env))
        if isinstance(f, (Forall, Exists)):
            names = [v.name for v in f.binders]
            ranges = [range(self.sizes[v.sort]) for v in f.binders]
            parts = []
            for combo in itertools.product(*ranges):
                inner = dict(env)
                inner.update(zip(names, combo))
                x = self.formula(f.body, inner)
                if isinstance(f, Forall) and x is False:
                    return False
                if isinstance(f, Exists) and x is True:
                    return True
                parts.append(x)
            return self.and_(parts) if isinstance(f, Forall) else self.or_(parts)
        raise TypeError(f)

    def assert_formula(self, f: Formula) -> bool:
        """Add f as a hard constraint; False if it is trivially unsatisfiable."""
        x = self.formula(f)
        if x is True:
            return True
        if x is False:
            self.solver.add_clause([])
            return False
        return self.solver.add_clause([x])

    # -- decoding ---------------------------------------------------------

    def decode(self, two_state: bool) -> FiniteModel:
        """Read the solver's current model back as a total FiniteModel."""
        model = self.solver.model()
        values: dict = {}
        for decl in self.vocab.decls():
            copies = [False, True] if (two_state and decl.mutable) else [False]
            for p in copies:
                if isinstance(decl, RelDecl):
                    tuples = set()
                    for (name, primed, args), v in self.rel_atoms.items():
                        if name == decl.name and primed == p and model[v]:
                            tuples.add(args)
                    values[(decl.name, p)] = frozenset(tuples)
                elif isinstance(decl, ConstDecl):
                    vs = self.onehot.get((decl.name, p, ()))
                    values[(decl.name, p)] = _onehot_value(vs, model) if vs else 0
                else:
                    table = {}
                    for args in itertools.product(*(range(self.sizes[s]) for s in decl.arg_sorts)):
                        vs = self.onehot.get((decl.name, p, args))
                        table[args] = _onehot_value(vs, model) if vs else 0
                    values[(decl.name, p)] = table
        return full_model(self.vocab, self.sizes, values, two_state)


def _fixed(table: Sequence[Prop]) -> Optional[int]:
    """Index of the single True entry when the table is fully constant."""
    idx = None
    for i, x in enumerate(table):
        if x is True:
            if idx is not None:
                return None
            idx = i
        elif x is not False:
            return None
    return idx


def _onehot_value(vs: list[int], model: list[bool]) -> int:
    for i, v in enumerate(vs):
        if model[v]:
            return i
    return 0
