"""Safety problems and the problem-to-problem transformations behind the
proof rules."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .logic import (
    FALSE,
    TRUE,
    And,
    Apply,
    Const,
    ConstDecl,
    Eq,
    Exists,
    Forall,
    Formula,
    FuncDecl,
    Iff,
    Implies,
    LogicError,
    Not,
    Or,
    Rel,
    RelDecl,
    Term,
    Var,
    Vocabulary,
    conj,
    disj,
    exists,
    forall,
    free_vars,
    fresh_name,
    has_primed,
    is_closed,
    prime,
    subst_terms,
    subst_vars,
    swap_state,
    symbol_names,
    term_vars,
    well_sorted,
)


class ProblemError(Exception):
    pass


@dataclass(frozen=True)
class SafetyProblem:
    """(init, transitions, bad) over `vocab`, with background axioms.

    `transitions` is a tuple of (name, two-state formula); their disjunction
    is the transition relation."""

    vocab: Vocabulary
    init: Formula
    transitions: tuple[tuple[str, Formula], ...]
    bad: Formula
    axioms: tuple[Formula, ...] = ()

    def validate(self) -> "SafetyProblem":
        names = [n for n, _ in self.transitions]
        if len(set(names)) != len(names):
            raise ProblemError(f"duplicate transition names in {names}")
        parts = [("init", self.init, False), ("bad", self.bad, False)]
        parts += [(f"axiom {i}", a, False) for i, a in enumerate(self.axioms)]
        parts += [(f"transition {n}", t, True) for n, t in self.transitions]
        for what, f, two in parts:
            if not is_closed(f):
                free = ", ".join(sorted(v.name for v in free_vars(f)))
                raise ProblemError(f"{what} has free variables: {free}")
            rep = well_sorted(f, self.vocab, two)
            if not rep.ok:
                raise ProblemError(f"{what}: " + "; ".join(map(str, rep.errors)))
        for i, a in enumerate(self.axioms):
            bad = sorted(n for n in symbol_names(a) if self.vocab.is_mutable(n))
            if bad:
                raise ProblemError(f"axiom {i} mentions mutable symbols {bad}")
        return self

    @property
    def transition_relation(self) -> Formula:
        return disj([t for _, t in self.transitions])

    @property
    def axiom(self) -> Formula:
        return conj(self.axioms)

    def transition(self, name: str) -> Formula:
        for n, t in self.transitions:
            if n == name:
                return t
        raise KeyError(name)

    def map_components(self, init=None, bad=None, each_transition=None, vocab=None) -> "SafetyProblem":
        trans = self.transitions
        if each_transition is not None:
            trans = tuple((n, each_transition(t)) for n, t in trans)
        return replace(
            self,
            vocab=vocab if vocab is not None else self.vocab,
            init=init if init is not None else self.init,
            bad=bad if bad is not None else self.bad,
            transitions=trans,
        )


def reverse(problem: SafetyProblem) -> SafetyProblem:
    """(bad, transitions swapped, init)."""
    v = problem.vocab
    return SafetyProblem(
        vocab=v,
        init=problem.bad,
        transitions=tuple((n, swap_state(t, v)) for n, t in problem.transitions),
        bad=problem.init,
        axioms=problem.axioms,
    )


def _one_state_closed(phi: Formula, vocab: Vocabulary, what: str) -> None:
    if has_primed(phi):
        raise ProblemError(f"{what} must be a one-state formula")
    rep = well_sorted(phi, vocab, False)
    if not rep.ok:
        raise ProblemError(f"{what}: " + "; ".join(map(str, rep.errors)))


def restrict(problem: SafetyProblem, phi: Formula) -> SafetyProblem:
    """(init & phi, t & phi & phi', bad & phi)."""
    _one_state_closed(phi, problem.vocab, "restriction")
    if not is_closed(phi):
        raise ProblemError("restriction must be closed")
    v = problem.vocab
    phi_next = prime(phi, v)
    return problem.map_components(
        init=conj(problem.init, phi),
        bad=conj(problem.bad, phi),
        each_transition=lambda t: conj(t, phi, phi_next),
    )


def _check_params(phi: Formula, params: Sequence[Var]) -> None:
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise ProblemError(f"repeated prophecy variables {names}")
    extra = {v.name for v in free_vars(phi)} - set(names)
    if extra:
        raise ProblemError(f"prophecy formula has undeclared free variables {sorted(extra)}")


def instantiate(phi: Formula, params: Sequence[Var], terms: Sequence[Term]) -> Formula:
    return subst_vars(phi, {p.name: t for p, t in zip(params, terms)})


def prophecy_extend(
    problem: SafetyProblem, phi: Formula, params: Sequence[Var], witnesses: Sequence[str]
) -> SafetyProblem:
    """Add immutable witness constants w1..wk and conjoin phi(w) to every
    component (primed copy too for transitions). Immutability of the
    witnesses stands in for the constraint w' = w."""
    params = tuple(params)
    witnesses = tuple(witnesses)
    if len(params) != len(witnesses):
        raise ProblemError("one witness per prophecy variable is required")
    _check_params(phi, params)
    v = problem.vocab
    for w in witnesses:
        if w in v.names:
            raise ProblemError(f"witness name {w!r} is not fresh")
    if len(set(witnesses)) != len(witnesses):
        raise ProblemError(f"repeated witness names {witnesses}")
    v2 = v.extend(*(ConstDecl(w, p.sort, False) for w, p in zip(witnesses, params)))
    phi_w = instantiate(phi, params, [Const(w) for w in witnesses])
    _one_state_closed(phi_w, v2, "prophecy formula")
    phi_w_next = prime(phi_w, v2)
    return SafetyProblem(
        vocab=v2,
        init=conj(problem.init, phi_w),
        transitions=tuple((n, conj(phi_w, t, phi_w_next)) for n, t in problem.transitions),
        bad=conj(problem.bad, phi_w),
        axioms=problem.axioms,
    )


def prophecy_soundness(
    problem: SafetyProblem, phi: Formula, params: Sequence[Var], tracker: str
) -> SafetyProblem:
    """The tableau problem whose safety is equivalent to phi being a sound
    prophecy. `tracker` is a fresh mutable relation over the parameter sorts."""
    params = tuple(params)
    _check_params(phi, params)
    v = problem.vocab
    if tracker in v.names:
        raise ProblemError(f"tracker name {tracker!r} is not fresh")
    v2 = v.extend(RelDecl(tracker, tuple(p.sort for p in params), True))
    _one_state_closed(phi, v2, "prophecy formula")
    m_now = Rel(tracker, params)
    m_next = Rel(tracker, params, True)
    phi_next = prime(phi, v2)
    init_c = forall(params, Implies(phi, m_now))
    step_c = forall(params, Implies(conj(m_now, phi, phi_next), m_next))
    bad_c = forall(params, Implies(phi, Not(m_now)))
    return SafetyProblem(
        vocab=v2,
        init=conj(problem.init, init_c),
        transitions=tuple((n, conj(t, step_c)) for n, t in problem.transitions),
        bad=conj(problem.bad, bad_c),
        axioms=problem.axioms,
    )


# ---------------------------------------------------------------------------
# frame sugar


@dataclass(frozen=True)
class FrameSugar:
    """exists binders. [body]_modified

    `modified` lists symbol applications (relation, function, or mutable
    constant) that may change; every other point of every mutable symbol is
    framed."""

    binders: tuple[Var, ...]
    body: Formula
    modified: tuple[Term | Rel, ...] = ()


def _occurrence(o) -> tuple[str, tuple[Term, ...]]:
    if isinstance(o, Rel):
        return o.name, o.args
    if isinstance(o, Apply):
        return o.name, o.args
    if isinstance(o, Const):
        return o.name, ()
    raise ProblemError(f"not a symbol application: {o}")


def desugar_frame(sugar: FrameSugar, vocab: Vocabulary) -> Formula:
    mods: dict[str, list[tuple[Term, ...]]] = {}
    for o in sugar.modified:
        name, args = _occurrence(o)
        decl = vocab.get(name)
        if decl is None:
            raise ProblemError(f"modified occurrence of unknown symbol {name}")
        if not decl.mutable:
            raise ProblemError(f"modified occurrence of immutable symbol {name}")
        arity = 0 if isinstance(decl, ConstDecl) else len(decl.arg_sorts)
        if arity != len(args):
            raise ProblemError(f"modified occurrence {name} has wrong arity")
        mods.setdefault(name, []).append(tuple(args))

    avoid = {b.name for b in sugar.binders}
    for args_list in mods.values():
        for args in args_list:
            for t in args:
                avoid |= {v.name for v in term_vars(t)}

    frames: list[Formula] = []
    for decl in vocab.decls():
        if not decl.mutable:
            continue
        points = mods.get(decl.name, [])
        if isinstance(decl, ConstDecl):
            if not points:
                frames.append(Eq(Const(decl.name, True), Const(decl.name)))
            continue
        zs = []
        used = set(avoid)
        for s in decl.arg_sorts:
            z = fresh_name("z", used)
            used.add(z)
            zs.append(Var(z, s))
        if any(len(p) == 0 for p in points):
            continue
        if isinstance(decl, RelDecl):
            same: Formula = Iff(Rel(decl.name, tuple(zs), True), Rel(decl.name, tuple(zs)))
        else:
            same = Eq(Apply(decl.name, tuple(zs), True), Apply(decl.name, tuple(zs)))
        guards = [Not(conj([Eq(z, t) for z, t in zip(zs, p)])) for p in points]
        body = Implies(conj(guards), same) if guards else same
        frames.append(forall(zs, body))
    return exists(sugar.binders, conj(sugar.body, *frames))


# ---------------------------------------------------------------------------
# Herbrandization of the safety property


def herbrandize_safety(problem: SafetyProblem) -> SafetyProblem:
    """Replace the outer universals of the safety property by fresh
    immutable constants; an antecedent over immutable symbols becomes an
    axiom. Accepted shapes for bad: not(forall x. psi) or exists x. chi.
    A quantifier-free bad state is returned unchanged."""
    bad = problem.bad
    if not _has_quantifier(bad):
        return problem
    if isinstance(bad, Not) and isinstance(bad.body, Forall):
        binders, prop = bad.body.binders, bad.body.body
        guard, body = _split_guard(prop, problem.vocab)
        negated_body = Not(body)
    elif isinstance(bad, Exists):
        binders, matrix = bad.binders, bad.body
        guard, negated_body = _split_bad_guard(matrix, problem.vocab)
    else:
        raise ProblemError("safety property is not universally quantified at the top; refusing to Herbrandize")
    v = problem.vocab
    names: dict[str, Term] = {}
    decls = []
    taken = set(v.names)
    for b in binders:
        c = fresh_name(b.name, taken)
        taken.add(c)
        names[b.name] = Const(c)
        decls.append(ConstDecl(c, b.sort, False))
    v2 = v.extend(*decls)
    axioms = problem.axioms
    if guard is not None:
        axioms = axioms + (subst_vars(guard, names),)
    return SafetyProblem(
        vocab=v2,
        init=problem.init,
        transitions=problem.transitions,
        bad=subst_vars(negated_body, names),
        axioms=axioms,
    ).validate()


def _has_quantifier(f: Formula) -> bool:
    from .logic import subformulas

    return any(isinstance(s, (Forall, Exists)) for s in subformulas(f))


def _immutable_only(f: Formula, vocab: Vocabulary) -> bool:
    return all(not vocab.is_mutable(n) for n in symbol_names(f))


def _split_guard(prop: Formula, vocab: Vocabulary) -> tuple[Optional[Formula], Formula]:
    if isinstance(prop, Implies) and _immutable_only(prop.left, vocab):
        return prop.left, prop.right
    return None, prop


def _split_bad_guard(matrix: Formula, vocab: Vocabulary) -> tuple[Optional[Formula], Formula]:
    if isinstance(matrix, And):
        guards = [a for a in matrix.args if _immutable_only(a, vocab)]
        rest = [a for a in matrix.args if not _immutable_only(a, vocab)]
        if guards and rest:
            return conj(guards), conj(rest)
    return None, matrix
