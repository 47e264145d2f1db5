"""Concrete syntax for .fbp spec files: lexer, parser, and printer.

The grammar is documented in docs/grammar.md. Both ASCII and Unicode
spellings of the connectives are accepted; the printer emits ASCII. Binder
sorts may be omitted and are then inferred from their uses in the same
formula. Printing always annotates binders, so print/parse round-trips on
the abstract syntax.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .logic import (
    FALSE,
    TRUE,
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
    conj,
    free_vars,
)
from .proof import BackwardStep, ForwardStep, ProofScript, ProphecyStep, QedStep, Step
from .system import FrameSugar, ProblemError, SafetyProblem, desugar_frame

# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: Sequence[Diagnostic], source: str = "<input>"):
        self.diagnostics = list(diagnostics)
        self.source = source
        super().__init__("\n".join(f"{source}:{d}" for d in self.diagnostics))


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {
    "sort", "immutable", "mutable", "constant", "function", "relation", "axiom", "init",
    "transition", "safety", "proof", "forall", "exists", "true", "false", "modifies",
    "as", "select",
}

_UNICODE = {
    "¬": "!", "∧": "&", "∨": "|", "→": "->", "↔": "<->", "∀": "forall", "∃": "exists",
    "≠": "!=", "⊤": "true", "⊥": "false", "′": "'",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|!=|[!&|()=,.:;\[\]{}'])
  | (?P<uni>[¬∧∨→↔∀∃≠⊤⊥′])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError([Diagnostic(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind == "ident":
            out.append(Token("kw" if s in KEYWORDS else "ident", s, line, col))
        elif kind == "op":
            out.append(Token("op", s, line, col))
        elif kind == "uni":
            canon = _UNICODE[s]
            out.append(Token("kw" if canon in KEYWORDS else "op", canon, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# abstract syntax of a spec file


@dataclass(frozen=True)
class SortItem:
    name: str


@dataclass(frozen=True)
class SymbolItem:
    decl: Union[ConstDecl, FuncDecl, RelDecl]


@dataclass(frozen=True)
class AxiomItem:
    formula: Formula


@dataclass(frozen=True)
class InitItem:
    formula: Formula


@dataclass(frozen=True)
class TransitionItem:
    name: str
    body: Union[Formula, FrameSugar]


@dataclass(frozen=True)
class SafetyItem:
    formula: Formula


@dataclass(frozen=True)
class ProofItem:
    name: str
    script: ProofScript


Item = Union[SortItem, SymbolItem, AxiomItem, InitItem, TransitionItem, SafetyItem, ProofItem]


@dataclass(frozen=True)
class SpecFile:
    items: tuple[Item, ...]

    @property
    def vocab(self) -> Vocabulary:
        sorts = tuple(i.name for i in self.items if isinstance(i, SortItem))
        decls = [i.decl for i in self.items if isinstance(i, SymbolItem)]
        return Vocabulary(
            sorts,
            tuple(d for d in decls if isinstance(d, ConstDecl)),
            tuple(d for d in decls if isinstance(d, FuncDecl)),
            tuple(d for d in decls if isinstance(d, RelDecl)),
        )

    @property
    def safety(self) -> Formula:
        return conj([i.formula for i in self.items if isinstance(i, SafetyItem)])

    def problem(self) -> SafetyProblem:
        v = self.vocab
        trans = []
        for i in self.items:
            if isinstance(i, TransitionItem):
                body = desugar_frame(i.body, v) if isinstance(i.body, FrameSugar) else i.body
                trans.append((i.name, body))
        return SafetyProblem(
            vocab=v,
            init=conj([i.formula for i in self.items if isinstance(i, InitItem)]),
            transitions=tuple(trans),
            bad=Not(self.safety),
            axioms=tuple(i.formula for i in self.items if isinstance(i, AxiomItem)),
        ).validate()

    @property
    def proofs(self) -> dict[str, ProofScript]:
        return {i.name: i.script for i in self.items if isinstance(i, ProofItem)}

    def transition_count(self) -> int:
        return sum(isinstance(i, TransitionItem) for i in self.items)


# ---------------------------------------------------------------------------
# parser


class _Sorts:
    """Union-find over sort placeholders ("?0", "?1", ...) and concrete sorts."""

    def __init__(self):
        self.parent: dict[str, str] = {}
        self.origin: dict[str, tuple[str, Token]] = {}
        self.count = 0

    def fresh(self, var: str, tok: Token) -> str:
        p = f"?{self.count}"
        self.count += 1
        self.parent[p] = p
        self.origin[p] = (var, tok)
        return p

    def find(self, s: str) -> str:
        while s.startswith("?") and self.parent[s] != s:
            self.parent[s] = self.parent.get(self.parent[s], self.parent[s])
            s = self.parent[s]
        return s

    def unify(self, a: str, b: str) -> Optional[str]:
        """None on success, else an error message."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        if ra.startswith("?"):
            self.parent[ra] = rb
            return None
        if rb.startswith("?"):
            self.parent[rb] = ra
            return None
        return f"sort mismatch: {ra} versus {rb}"


class Parser:
    def __init__(self, text: str, source: str = "<input>"):
        self.source = source
        self.toks = tokenize(text)
        self.i = 0
        self.diags: list[Diagnostic] = []
        self.sorts: list[str] = []
        self.decls: dict[str, Union[ConstDecl, FuncDecl, RelDecl]] = {}
        self.sortvars = _Sorts()

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def at_ident(self, text: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(self.diags + [Diagnostic(t.line, t.col, msg)], self.source)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self._show(self.tok)}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}, found {self._show(self.tok)}")
        return self.advance()

    @staticmethod
    def _show(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def skip_semis(self) -> None:
        while self.at(";"):
            self.advance()

    # -- vocabulary ---------------------------------------------------------

    def vocab(self) -> Vocabulary:
        ds = list(self.decls.values())
        return Vocabulary(
            tuple(self.sorts),
            tuple(d for d in ds if isinstance(d, ConstDecl)),
            tuple(d for d in ds if isinstance(d, FuncDecl)),
            tuple(d for d in ds if isinstance(d, RelDecl)),
        )

    def sort_name(self) -> str:
        t = self.ident("sort name")
        if t.text not in self.sorts:
            self.fail(f"unknown sort {t.text!r}", t)
        return t.text

    def declare(self, decl, tok: Token) -> None:
        if decl.name in self.decls or decl.name in self.sorts:
            self.fail(f"duplicate declaration of {decl.name!r}", tok)
        self.decls[decl.name] = decl

    # -- file -----------------------------------------------------------------

    def parse_file(self) -> SpecFile:
        items: list[Item] = []
        proof_names: set[str] = set()
        self.skip_semis()
        while self.tok.kind != "eof":
            t = self.tok
            if self.at("sort"):
                self.advance()
                n = self.ident("sort name")
                if n.text in self.sorts or n.text in self.decls:
                    self.fail(f"duplicate declaration of {n.text!r}", n)
                self.sorts.append(n.text)
                items.append(SortItem(n.text))
            elif self.at("immutable") or self.at("mutable"):
                items.append(SymbolItem(self.symbol_decl()))
            elif self.at("axiom"):
                self.advance()
                f = self.closed_formula(two_state=False)
                muts = sorted({n for n in _names(f) if self.decls[n].mutable})
                if muts:
                    self.fail(f"axiom mentions mutable symbols {muts}", t)
                items.append(AxiomItem(f))
            elif self.at("init"):
                self.advance()
                items.append(InitItem(self.closed_formula(two_state=False)))
            elif self.at("transition"):
                items.append(self.transition())
            elif self.at("safety"):
                self.advance()
                items.append(SafetyItem(self.closed_formula(two_state=False)))
            elif self.at("proof"):
                self.advance()
                name = "main"
                if self.tok.kind == "ident":
                    name = self.advance().text
                if name in proof_names:
                    self.fail(f"duplicate proof name {name!r}", t)
                proof_names.add(name)
                items.append(ProofItem(name, self.proof_block()))
            else:
                self.fail(f"expected a declaration, found {self._show(t)}")
            self.skip_semis()
        missing = []
        if not any(isinstance(i, InitItem) for i in items):
            missing.append(Diagnostic(self.tok.line, self.tok.col, "missing init declaration"))
        if not any(isinstance(i, SafetyItem) for i in items):
            missing.append(Diagnostic(self.tok.line, self.tok.col, "missing safety declaration"))
        if missing:
            raise ParseError(missing, self.source)
        names = [i.name for i in items if isinstance(i, TransitionItem)]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ParseError([Diagnostic(1, 1, f"duplicate transition names {sorted(dup)}")], self.source)
        return SpecFile(tuple(items))

    def symbol_decl(self):
        mutable = self.advance().text == "mutable"
        if self.at("constant"):
            self.advance()
            n = self.ident("constant name")
            self.expect(":")
            d = ConstDecl(n.text, self.sort_name(), mutable)
        elif self.at("function"):
            self.advance()
            n = self.ident("function name")
            self.expect(":")
            args = [self.sort_name()]
            while self.at(","):
                self.advance()
                args.append(self.sort_name())
            self.expect("->")
            d = FuncDecl(n.text, tuple(args), self.sort_name(), mutable)
        elif self.at("relation"):
            self.advance()
            n = self.ident("relation name")
            args: list[str] = []
            if self.at("("):
                self.advance()
                if not self.at(")"):
                    args.append(self.sort_name())
                    while self.at(","):
                        self.advance()
                        args.append(self.sort_name())
                self.expect(")")
            d = RelDecl(n.text, tuple(args), mutable)
        else:
            self.fail("expected 'constant', 'function' or 'relation'")
        self.declare(d, n)
        return d

    def transition(self) -> TransitionItem:
        self.advance()
        n = self.ident("transition name")
        self.expect("{")
        start = self.i
        body: Union[Formula, FrameSugar]
        sugar = self._try_sugar()
        if sugar is None:
            self.i = start
            body = self.closed_formula(two_state=True)
        else:
            body = sugar
        self.expect("}")
        return TransitionItem(n.text, body)

    def _try_sugar(self) -> Optional[FrameSugar]:
        """exists binders. [ body ] modifies occ, ... -- or None if the
        transition is a plain formula."""
        binders: list[Var] = []
        scope: dict[str, Var] = {}
        if self.at("exists"):
            self.advance()
            binders = self.binders()
            self.expect(".")
            if not self.at("["):
                return None
            scope = {b.name: b for b in binders}
        elif not self.at("["):
            return None
        first = self.tok
        self.expect("[")
        body = self.formula(scope, two_state=True)
        self.expect("]")
        mods: list = []
        if self.at("modifies"):
            self.advance()
            mods.append(self.occurrence(scope))
            while self.at(","):
                self.advance()
                mods.append(self.occurrence(scope))
        binders_t, body, mods = self._resolve(tuple(binders), body, tuple(mods), first)
        v = self.vocab()
        for m in mods:
            if not v.is_mutable(m.name):
                self.fail(f"modified occurrence of immutable symbol {m.name!r}", first)
        sugar = FrameSugar(binders_t, body, mods)
        try:
            desugar_frame(sugar, v)
        except ProblemError as e:
            self.fail(str(e), first)
        return sugar

    def occurrence(self, scope):
        t = self.ident("symbol")
        decl = self.decls.get(t.text)
        if decl is None:
            self.fail(f"unknown symbol {t.text!r}", t)
        args = self.args(scope, t, decl)
        if isinstance(decl, RelDecl):
            return Rel(t.text, args)
        if isinstance(decl, FuncDecl):
            return Apply(t.text, args)
        return Const(t.text)

    # -- proof scripts ----------------------------------------------------

    def proof_block(self) -> ProofScript:
        self.expect("{")
        steps: list[Step] = []
        saved = dict(self.decls)
        self.skip_semis()
        while not self.at("}"):
            t = self.tok
            if self.at_ident("F") or self.at_ident("B"):
                self.advance()
                f = self.closed_formula(two_state=False)
                steps.append(ForwardStep(f) if t.text == "F" else BackwardStep(f))
            elif self.at_ident("FP"):
                steps.append(self.prophecy_step())
            elif self.at_ident("QED"):
                self.advance()
                d = self.ident("'fwd' or 'bwd'")
                if d.text not in ("fwd", "bwd"):
                    self.fail("expected 'fwd' or 'bwd'", d)
                steps.append(QedStep(d.text))
            elif t.kind == "eof":
                self.fail("unterminated proof block")
            else:
                self.fail(f"expected a proof step (F, B, FP, QED), found {self._show(t)}")
            self.skip_semis()
        end = self.expect("}")
        self.decls = saved
        qeds = [i for i, s in enumerate(steps) if isinstance(s, QedStep)]
        # an empty block is allowed (metrics prints nothing, check rejects it)
        if steps and qeds != [len(steps) - 1]:
            self.fail("a proof must contain exactly one QED step, as its last step", end)
        return ProofScript(tuple(steps))

    def prophecy_step(self) -> ProphecyStep:
        start = self.advance()
        params = self.binders()
        self.expect("as")
        wtoks = [self.ident("witness name")]
        while self.at(","):
            self.advance()
            wtoks.append(self.ident("witness name"))
        if len(wtoks) != len(params):
            self.fail("one witness name per prophecy variable is required", wtoks[0])
        scope = {p.name: p for p in params}
        theta = None
        if self.at("select"):
            self.advance()
            theta = self.closed_formula(two_state=False)
        self.expect(":")
        body = self.formula(scope, two_state=False)
        params_t, body, _ = self._resolve(tuple(params), body, (), start)
        extra = {v.name for v in free_vars(body)} - {p.name for p in params_t}
        if extra:
            self.fail(f"free variables {sorted(extra)}", start)
        for w, p in zip(wtoks, params_t):
            self.declare(ConstDecl(w.text, p.sort, False), w)
        return ProphecyStep(params_t, tuple(w.text for w in wtoks), body, theta)

    # -- formulas -----------------------------------------------------------

    def closed_formula(self, two_state: bool) -> Formula:
        start = self.tok
        f = self.formula({}, two_state)
        _, f, _ = self._resolve((), f, (), start)
        return f

    def _resolve(self, binders, f, extra, tok):
        """Replace sort placeholders by inferred sorts."""
        def sort_of(v: Var) -> str:
            s = self.sortvars.find(v.sort)
            if s.startswith("?"):
                name, btok = self.sortvars.origin.get(v.sort, (v.name, tok))
                self.fail(f"cannot infer the sort of variable {name!r}", btok)
            return s

        def term(t):
            if isinstance(t, Var):
                return Var(t.name, sort_of(t))
            if isinstance(t, Apply):
                return Apply(t.name, tuple(term(a) for a in t.args), t.primed)
            return t

        def form(g):
            if isinstance(g, (Top, Bottom)):
                return g
            if isinstance(g, Eq):
                return Eq(term(g.left), term(g.right))
            if isinstance(g, Rel):
                return Rel(g.name, tuple(term(a) for a in g.args), g.primed)
            if isinstance(g, Not):
                return Not(form(g.body))
            if isinstance(g, And):
                return And(tuple(form(a) for a in g.args))
            if isinstance(g, Or):
                return Or(tuple(form(a) for a in g.args))
            if isinstance(g, Implies):
                return Implies(form(g.left), form(g.right))
            if isinstance(g, Iff):
                return Iff(form(g.left), form(g.right))
            return type(g)(tuple(term(b) for b in g.binders), form(g.body))

        new_extra = tuple(form(e) if not isinstance(e, (Const, Apply)) else term(e) for e in extra)
        return tuple(term(b) for b in binders), form(f), new_extra

    def binders(self) -> list[Var]:
        out = [self.binder()]
        while self.at(","):
            self.advance()
            out.append(self.binder())
        names = [b.name for b in out]
        if len(set(names)) != len(names):
            self.fail(f"repeated binder names {names}")
        return out

    def binder(self) -> Var:
        t = self.ident("variable name")
        if self.at(":"):
            self.advance()
            return Var(t.text, self.sort_name())
        return Var(t.text, self.sortvars.fresh(t.text, t))

    def formula(self, scope, two_state) -> Formula:
        return self.iff(scope, two_state)

    def iff(self, scope, ts) -> Formula:
        left = self.implies(scope, ts)
        while self.at("<->"):
            self.advance()
            left = Iff(left, self.implies(scope, ts))
        return left

    def implies(self, scope, ts) -> Formula:
        left = self.disjunction(scope, ts)
        if self.at("->"):
            self.advance()
            return Implies(left, self.implies(scope, ts))
        return left

    def disjunction(self, scope, ts) -> Formula:
        parts = [self.conjunction(scope, ts)]
        while self.at("|"):
            self.advance()
            parts.append(self.conjunction(scope, ts))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self, scope, ts) -> Formula:
        parts = [self.unary(scope, ts)]
        while self.at("&"):
            self.advance()
            parts.append(self.unary(scope, ts))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self, scope, ts) -> Formula:
        if self.at("!"):
            self.advance()
            return Not(self.unary(scope, ts))
        if self.at("forall") or self.at("exists"):
            q = self.advance().text
            bs = self.binders()
            self.expect(".")
            inner = dict(scope)
            inner.update({b.name: b for b in bs})
            body = self.formula(inner, ts)
            return (Forall if q == "forall" else Exists)(tuple(bs), body)
        return self.atom(scope, ts)

    def atom(self, scope, ts) -> Formula:
        t = self.tok
        if self.at("true"):
            self.advance()
            return TRUE
        if self.at("false"):
            self.advance()
            return FALSE
        if self.at("("):
            self.advance()
            f = self.formula(scope, ts)
            self.expect(")")
            return f
        if t.kind != "ident":
            self.fail(f"expected a formula, found {self._show(t)}")
        decl = self.decls.get(t.text)
        if t.text in scope or not isinstance(decl, RelDecl):
            left = self.term(scope, ts)
            op = self.tok
            if not (self.at("=") or self.at("!=")):
                self.fail(f"expected '=' or '!=' after term {t.text!r}", op)
            self.advance()
            right = self.term(scope, ts)
            self._unify(self._sort(left), self._sort(right), op)
            eq = Eq(left, right)
            return Not(eq) if op.text == "!=" else eq
        self.advance()
        primed = self.prime(t, decl, ts)
        args = self.args(scope, t, decl, ts)
        return Rel(t.text, args, primed)

    def prime(self, t: Token, decl, ts: bool) -> bool:
        if not self.at("'"):
            return False
        p = self.advance()
        if not ts:
            self.fail(f"primed symbol {t.text!r} in a one-state formula", p)
        # primes on immutable symbols are normalized away
        return bool(decl.mutable)

    def args(self, scope, t: Token, decl, ts: bool = False) -> tuple[Term, ...]:
        sorts = () if isinstance(decl, ConstDecl) else decl.arg_sorts
        out: list[Term] = []
        if self.at("("):
            if not sorts:
                self.fail(f"{t.text!r} takes no arguments", self.tok)
            self.advance()
            out.append(self.term(scope, ts))
            while self.at(","):
                self.advance()
                out.append(self.term(scope, ts))
            self.expect(")")
        if len(out) != len(sorts):
            self.fail(f"{t.text!r} expects {len(sorts)} arguments, got {len(out)}", t)
        for a, s in zip(out, sorts):
            self._unify(self._sort(a), s, t)
        return tuple(out)

    def term(self, scope, ts) -> Term:
        t = self.ident("term")
        if t.text in scope:
            if self.at("'"):
                self.fail(f"bound variable {t.text!r} cannot be primed")
            if self.at("("):
                self.fail(f"bound variable {t.text!r} cannot be applied")
            return scope[t.text]
        decl = self.decls.get(t.text)
        if decl is None:
            self.fail(f"unknown symbol {t.text!r}", t)
        if isinstance(decl, RelDecl):
            self.fail(f"relation {t.text!r} used as a term", t)
        primed = self.prime(t, decl, ts)
        args = self.args(scope, t, decl, ts)
        if isinstance(decl, ConstDecl):
            return Const(t.text, primed)
        return Apply(t.text, args, primed)

    def _sort(self, t: Term) -> str:
        if isinstance(t, Var):
            return t.sort
        d = self.decls[t.name]
        return d.sort if isinstance(d, ConstDecl) else d.result

    def _unify(self, a: str, b: str, tok: Token) -> None:
        err = self.sortvars.unify(a, b)
        if err:
            ra, rb = self.sortvars.find(a), self.sortvars.find(b)
            self.fail(f"sort mismatch: {ra} versus {rb}", tok)


def _names(f: Formula) -> set[str]:
    from .logic import symbol_names

    return symbol_names(f)


def parse(text: str, source: str = "<input>") -> SpecFile:
    return Parser(text, source).parse_file()


def parse_file(path) -> SpecFile:
    from pathlib import Path

    p = Path(path)
    return parse(p.read_text(encoding="utf-8"), str(p))


def parse_formula(text: str, vocab: Vocabulary, two_state: bool = False, scope: Sequence[Var] = ()) -> Formula:
    """Parse a standalone formula against a vocabulary. Variables listed in
    `scope` may occur free."""
    p = Parser(text)
    p.sorts = list(vocab.sorts)
    p.decls = {d.name: d for d in vocab.decls()}
    start = p.tok
    f = p.formula({v.name: v for v in scope}, two_state)
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p._show(p.tok)} after formula")
    _, f, _ = p._resolve((), f, (), start)
    return f


# ---------------------------------------------------------------------------
# printer

_LEVEL_QUANT, _LEVEL_IFF, _LEVEL_IMP, _LEVEL_OR, _LEVEL_AND, _LEVEL_NOT, _LEVEL_ATOM = range(7)


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    tick = "'" if t.primed else ""
    if isinstance(t, Const):
        return t.name + tick
    return f"{t.name}{tick}({', '.join(format_term(a) for a in t.args)})"


def _binders(bs: Sequence[Var]) -> str:
    return ", ".join(f"{b.name}:{b.sort}" for b in bs)


def _fmt(f: Formula) -> tuple[str, int]:
    if isinstance(f, Top):
        return "true", _LEVEL_ATOM
    if isinstance(f, Bottom):
        return "false", _LEVEL_ATOM
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}", _LEVEL_ATOM
    if isinstance(f, Rel):
        tick = "'" if f.primed else ""
        if not f.args:
            return f.name + tick, _LEVEL_ATOM
        return f"{f.name}{tick}({', '.join(format_term(a) for a in f.args)})", _LEVEL_ATOM
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{format_term(f.body.left)} != {format_term(f.body.right)}", _LEVEL_ATOM
        return "!" + _wrap(f.body, _LEVEL_NOT), _LEVEL_NOT
    if isinstance(f, (And, Or)):
        if not f.args:
            return ("true" if isinstance(f, And) else "false"), _LEVEL_ATOM
        if len(f.args) == 1:
            return _fmt(f.args[0])
        lvl = _LEVEL_AND if isinstance(f, And) else _LEVEL_OR
        op = " & " if isinstance(f, And) else " | "
        return op.join(_wrap(a, lvl + 1) for a in f.args), lvl
    if isinstance(f, Implies):
        return f"{_wrap(f.left, _LEVEL_OR)} -> {_wrap(f.right, _LEVEL_IMP)}", _LEVEL_IMP
    if isinstance(f, Iff):
        return f"{_wrap(f.left, _LEVEL_IFF)} <-> {_wrap(f.right, _LEVEL_IMP)}", _LEVEL_IFF
    if isinstance(f, (Forall, Exists)):
        q = "forall" if isinstance(f, Forall) else "exists"
        return f"{q} {_binders(f.binders)}. {_fmt(f.body)[0]}", _LEVEL_QUANT
    raise TypeError(f)


def _wrap(f: Formula, need: int) -> str:
    s, lvl = _fmt(f)
    return s if lvl >= need else f"({s})"


def format_formula(f: Formula) -> str:
    return _fmt(f)[0]


def format_decl(d) -> str:
    mut = "mutable" if d.mutable else "immutable"
    if isinstance(d, ConstDecl):
        return f"{mut} constant {d.name} : {d.sort}"
    if isinstance(d, FuncDecl):
        return f"{mut} function {d.name} : {', '.join(d.arg_sorts)} -> {d.result}"
    if d.arg_sorts:
        return f"{mut} relation {d.name}({', '.join(d.arg_sorts)})"
    return f"{mut} relation {d.name}"


def format_step(s: Step) -> str:
    if isinstance(s, ForwardStep):
        return f"F {format_formula(s.formula)}"
    if isinstance(s, BackwardStep):
        return f"B {format_formula(s.formula)}"
    if isinstance(s, ProphecyStep):
        head = f"FP {_binders(s.params)} as {', '.join(s.witnesses)}"
        if s.select is not None:
            head += f" select {format_formula(s.select)}"
        return f"{head} : {format_formula(s.formula)}"
    return f"QED {s.direction}"


def format_script(script: ProofScript, name: str = "main") -> str:
    lines = [f"proof {name} {{"]
    lines += [f"  {format_step(s)}" for s in script.steps]
    lines.append("}")
    return "\n".join(lines)


def format_transition_body(body) -> str:
    if isinstance(body, FrameSugar):
        head = f"exists {_binders(body.binders)}. " if body.binders else ""
        out = f"{head}[ {format_formula(body.body)} ]"
        if body.modified:
            occs = [format_formula(o) if isinstance(o, Rel) else format_term(o) for o in body.modified]
            out += " modifies " + ", ".join(occs)
        return out
    return format_formula(body)


def format_spec(spec: SpecFile) -> str:
    out: list[str] = []
    for i in spec.items:
        if isinstance(i, SortItem):
            out.append(f"sort {i.name}")
        elif isinstance(i, SymbolItem):
            out.append(format_decl(i.decl))
        elif isinstance(i, AxiomItem):
            out.append(f"axiom {format_formula(i.formula)}")
        elif isinstance(i, InitItem):
            out.append(f"init {format_formula(i.formula)}")
        elif isinstance(i, TransitionItem):
            out.append(f"transition {i.name} {{ {format_transition_body(i.body)} }}")
        elif isinstance(i, SafetyItem):
            out.append(f"safety {format_formula(i.formula)}")
        elif isinstance(i, ProofItem):
            out.append(format_script(i.script, i.name))
    return "\n".join(out) + "\n"


def format_problem(problem: SafetyProblem, safety: Optional[Formula] = None) -> str:
    """A spec file for a problem (used by `reverse`). The bad formula is
    stated as `safety !bad` unless a positive form is given."""
    items: list[Item] = [SortItem(s) for s in problem.vocab.sorts]
    items += [SymbolItem(d) for d in problem.vocab.decls()]
    items += [AxiomItem(a) for a in problem.axioms]
    items.append(InitItem(problem.init))
    items += [TransitionItem(n, t) for n, t in problem.transitions]
    if safety is None:
        safety = problem.bad.body if isinstance(problem.bad, Not) else Not(problem.bad)
    items.append(SafetyItem(safety))
    return format_spec(SpecFile(tuple(items)))
