"""SMT-LIB2 driver: one fresh solver process per obligation.

Sorts are declared uninterpreted and the logic is UF with quantifiers.
Emitted names carry a prefix per kind (S_ sorts, F_ current-state and
immutable symbols, P_ primed symbols, V_ bound variables) so user
identifiers can never clash with each other or with SMT-LIB keywords.
"""
from __future__ import annotations

import itertools
import os
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

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
    has_primed,
    symbols,
)
from .evaluate import evaluate
from .model import Counterexample, FiniteModel, SolverFailure, Unknown, Valid, Verdict, full_model

DEFAULT_SOLVER = "z3 -in -smt2"


class InternalError(Exception):
    pass


@dataclass
class SmtConfig:
    solver_cmd: str = DEFAULT_SOLVER
    timeout_s: float = 30.0
    dump_dir: Optional[str] = None
    want_model: bool = True


def _sort(s: str) -> str:
    return f"S_{s}"


def _sym(name: str, primed: bool) -> str:
    return f"{'P' if primed else 'F'}_{name}"


def _var(name: str) -> str:
    return f"V_{name}"


def term_smt(t: Term) -> str:
    if isinstance(t, Var):
        return _var(t.name)
    if isinstance(t, Const):
        return _sym(t.name, t.primed)
    return f"({_sym(t.name, t.primed)} {' '.join(term_smt(a) for a in t.args)})"


def formula_smt(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Eq):
        return f"(= {term_smt(f.left)} {term_smt(f.right)})"
    if isinstance(f, Rel):
        if not f.args:
            return _sym(f.name, f.primed)
        return f"({_sym(f.name, f.primed)} {' '.join(term_smt(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"(not {formula_smt(f.body)})"
    if isinstance(f, (And, Or)):
        if not f.args:
            return "true" if isinstance(f, And) else "false"
        if len(f.args) == 1:
            return formula_smt(f.args[0])
        op = "and" if isinstance(f, And) else "or"
        return f"({op} {' '.join(formula_smt(a) for a in f.args)})"
    if isinstance(f, Implies):
        return f"(=> {formula_smt(f.left)} {formula_smt(f.right)})"
    if isinstance(f, Iff):
        return f"(= {formula_smt(f.left)} {formula_smt(f.right)})"
    if isinstance(f, (Forall, Exists)):
        q = "forall" if isinstance(f, Forall) else "exists"
        binders = " ".join(f"({_var(v.name)} {_sort(v.sort)})" for v in f.binders)
        return f"({q} ({binders}) {formula_smt(f.body)})"
    raise TypeError(f)


def declarations(vocab: Vocabulary, used: set[tuple[str, bool]]) -> list[str]:
    lines = [f"(declare-sort {_sort(s)} 0)" for s in vocab.sorts]
    for decl in vocab.decls():
        for primed in (False, True):
            if (decl.name, primed) not in used:
                continue
            name = _sym(decl.name, primed)
            if isinstance(decl, ConstDecl):
                lines.append(f"(declare-fun {name} () {_sort(decl.sort)})")
            elif isinstance(decl, FuncDecl):
                args = " ".join(_sort(s) for s in decl.arg_sorts)
                lines.append(f"(declare-fun {name} ({args}) {_sort(decl.result)})")
            else:
                args = " ".join(_sort(s) for s in decl.arg_sorts)
                lines.append(f"(declare-fun {name} ({args}) Bool)")
    return lines


def script(claim: Formula, axioms: Sequence[Formula], vocab: Vocabulary, name: str = "", want_model: bool = True) -> str:
    used: set[tuple[str, bool]] = set()
    for f in [claim, *axioms]:
        used |= symbols(f)
    out = [f"; obligation {name}" if name else "; obligation", "(set-logic UF)"]
    out += declarations(vocab, used)
    for a in axioms:
        out.append(f"(assert {formula_smt(a)})")
    out.append(f"(assert (not {formula_smt(claim)}))")
    out.append("(check-sat)")
    if want_model:
        out.append("(get-model)")
    return "\n".join(out) + "\n"


def _command(cfg: SmtConfig) -> list[str]:
    cmd = shlex.split(cfg.solver_cmd)
    if cmd and os.path.basename(cmd[0]) == "z3" and not any(c.startswith("-T:") for c in cmd):
        cmd.append(f"-T:{max(1, int(round(cfg.timeout_s)))}")
    return cmd


def solver_available(cfg: SmtConfig = SmtConfig()) -> bool:
    cmd = shlex.split(cfg.solver_cmd)
    return bool(cmd) and shutil.which(cmd[0]) is not None


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "obligation"


def check_validity(
    claim: Formula,
    axioms: Sequence[Formula],
    vocab: Vocabulary,
    config: SmtConfig = SmtConfig(),
    name: str = "",
) -> Verdict:
    text = script(claim, axioms, vocab, name, config.want_model)
    if config.dump_dir:
        Path(config.dump_dir).mkdir(parents=True, exist_ok=True)
        (Path(config.dump_dir) / f"{_safe_filename(name)}.smt2").write_text(text)
    cmd = _command(config)
    try:
        proc = subprocess.run(cmd, input=text, capture_output=True, text=True, timeout=config.timeout_s + 5)
    except FileNotFoundError:
        return SolverFailure(f"solver executable not found: {cmd[0] if cmd else '(empty)'}")
    except subprocess.TimeoutExpired:
        return Unknown("timeout")
    out = proc.stdout.strip()
    first = out.split("\n", 1)[0].strip() if out else ""
    if first == "unsat":
        return Valid()
    if first in ("unknown", "timeout"):
        return Unknown(first)
    if first == "sat":
        model = None
        if config.want_model:
            rest = out.split("\n", 1)[1] if "\n" in out else ""
            try:
                model = decode_model(rest, vocab, has_primed(claim))
            except ModelParseError:
                model = None
        if model is not None:
            if evaluate(claim, model) or not all(evaluate(a, model) for a in axioms):
                raise InternalError(f"solver model for {name} does not refute the claim")
        return Counterexample(model)
    err = (proc.stderr.strip() or out)[:500]
    return SolverFailure(f"unexpected solver output (exit {proc.returncode}): {err}")


def smt_check_valid(obligation, axioms=None, config: SmtConfig | None = None) -> Verdict:
    ax = obligation.axioms if axioms is None else axioms
    return check_validity(obligation.claim, ax, obligation.vocab, config or SmtConfig(), obligation.name)


# ---------------------------------------------------------------------------
# model decoding


class ModelParseError(Exception):
    pass


_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|(\|[^|]*\|)|([^\s()|;]+))")


def parse_sexprs(text: str) -> list[Any]:
    stack: list[list[Any]] = [[]]
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ModelParseError(f"bad token at {pos}")
        pos = m.end()
        comment, lp, rp, quoted, atom = m.groups()
        if comment:
            continue
        if lp:
            stack.append([])
        elif rp:
            if len(stack) < 2:
                raise ModelParseError("unbalanced parenthesis")
            done = stack.pop()
            stack[-1].append(done)
        elif quoted:
            stack[-1].append(quoted[1:-1])
        elif atom:
            stack[-1].append(atom)
    if len(stack) != 1:
        raise ModelParseError("unbalanced parenthesis")
    return stack[0]


def decode_model(text: str, vocab: Vocabulary, two_state: bool) -> FiniteModel:
    exprs = parse_sexprs(text)
    if not exprs:
        raise ModelParseError("empty model")
    body = exprs[0] if isinstance(exprs[0], list) else exprs
    if body and body[0] == "model":
        body = body[1:]
    universe: dict[str, list[str]] = {}
    defs: dict[str, tuple[list[tuple[str, str]], Any]] = {}
    for item in body:
        if not isinstance(item, list) or not item:
            continue
        if item[0] == "declare-fun" and len(item) == 4 and item[2] == []:
            universe.setdefault(item[3], []).append(item[1])
        elif item[0] == "define-fun" and len(item) == 5:
            defs[item[1]] = ([(p[0], p[1]) for p in item[2]], item[4])
    elem_index: dict[str, tuple[str, int]] = {}
    sizes: dict[str, int] = {}
    for s in vocab.sorts:
        elems = sorted(universe.get(_sort(s), []), key=_elem_key)
        if not elems:
            elems = [f"{_sort(s)}!val!0"]
        sizes[s] = len(elems)
        for i, e in enumerate(elems):
            elem_index[e] = (s, i)

    def ev(expr, env):
        if isinstance(expr, str):
            if expr in env:
                return env[expr]
            if expr == "true":
                return True
            if expr == "false":
                return False
            if expr in elem_index:
                return expr
            if expr in defs and not defs[expr][0]:
                return ev(defs[expr][1], {})
            raise ModelParseError(f"unknown atom {expr}")
        head = expr[0]
        if head == "ite":
            return ev(expr[2], env) if ev(expr[1], env) else ev(expr[3], env)
        if head == "=":
            vals = [ev(e, env) for e in expr[1:]]
            return all(v == vals[0] for v in vals)
        if head == "distinct":
            vals = [ev(e, env) for e in expr[1:]]
            return len(set(vals)) == len(vals)
        if head == "and":
            return all(ev(e, env) for e in expr[1:])
        if head == "or":
            return any(ev(e, env) for e in expr[1:])
        if head == "not":
            return not ev(expr[1], env)
        if head == "=>":
            return (not ev(expr[1], env)) or ev(expr[2], env)
        if head == "let":
            inner = dict(env)
            for name, val in expr[1]:
                inner[name] = ev(val, env)
            return ev(expr[2], inner)
        if isinstance(head, str) and head in defs:
            params, b = defs[head]
            args = [ev(e, env) for e in expr[1:]]
            return ev(b, {p: a for (p, _), a in zip(params, args)})
        raise ModelParseError(f"unsupported model expression {head}")

    def elem_list(sort: str) -> list[str]:
        return [e for e, (s, _) in sorted(elem_index.items(), key=lambda kv: kv[1][1]) if s == sort]

    values: dict = {}
    for decl in vocab.decls():
        for primed in ([False, True] if (two_state and decl.mutable) else [False]):
            name = _sym(decl.name, primed)
            if name not in defs:
                continue
            params, b = defs[name]
            if isinstance(decl, ConstDecl):
                values[(decl.name, primed)] = elem_index[ev(b, {})][1]
                continue
            arg_elems = [elem_list(s) for s in decl.arg_sorts]
            table = {}
            for combo in itertools.product(*arg_elems):
                env = {p: a for (p, _), a in zip(params, combo)}
                table[tuple(elem_index[a][1] for a in combo)] = ev(b, env)
            if isinstance(decl, FuncDecl):
                values[(decl.name, primed)] = {k: elem_index[v][1] for k, v in table.items()}
            else:
                values[(decl.name, primed)] = frozenset(k for k, v in table.items() if v)
    return full_model(vocab, sizes, values, two_state)


def _elem_key(e: str):
    m = re.search(r"!val!(\d+)$", e)
    return (0, int(m.group(1))) if m else (1, e)
