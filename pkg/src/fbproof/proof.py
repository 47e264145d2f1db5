"""Proof trees, linear proof scripts, verification conditions, and checking.

Trees store payloads only. The premise problem of every node is recomputed
top-down from the root problem with the transformations of `system`, so
nothing stored can drift out of sync with what is checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .logic import (
    TRUE,
    Formula,
    Implies,
    Not,
    Rel,
    Var,
    Vocabulary,
    conj,
    disj,
    exists,
    forall,
    fresh_name,
    prime,
)
from .system import ProblemError, SafetyProblem, prophecy_extend, prophecy_soundness, restrict, reverse

IND, CONS, INC, REV = "Ind", "Cons", "Inc", "Rev"
B_IND, B_CONS, B_INC = "B-Ind", "B-Cons", "B-Inc"
PROPH, PROPH_FWD, PROPH_SELECT = "Proph", "Proph-Fwd", "Proph-Select"

ARITY = {
    IND: 0, CONS: 1, INC: 2, REV: 1,
    B_IND: 0, B_CONS: 1, B_INC: 2,
    PROPH: 2, PROPH_FWD: 1, PROPH_SELECT: 1,
}
PROPHECY_RULES = (PROPH, PROPH_FWD, PROPH_SELECT)


class ProofShapeError(Exception):
    pass


# ---------------------------------------------------------------------------
# scripts


@dataclass(frozen=True)
class ForwardStep:
    formula: Formula


@dataclass(frozen=True)
class BackwardStep:
    formula: Formula


@dataclass(frozen=True)
class ProphecyStep:
    """FP step: prophesy `formula` over `params`, naming the witnesses.
    With `select` set this is the selecting variant with that trigger."""

    params: tuple[Var, ...]
    witnesses: tuple[str, ...]
    formula: Formula
    select: Optional[Formula] = None


@dataclass(frozen=True)
class QedStep:
    direction: str  # "fwd" or "bwd"


Step = Union[ForwardStep, BackwardStep, ProphecyStep, QedStep]


@dataclass(frozen=True)
class ProofScript:
    steps: tuple[Step, ...]

    def validate(self) -> "ProofScript":
        qeds = [i for i, s in enumerate(self.steps) if isinstance(s, QedStep)]
        if qeds != [len(self.steps) - 1]:
            raise ProofShapeError("a proof script needs exactly one QED, as its last step")
        if self.steps[-1].direction not in ("fwd", "bwd"):
            raise ProofShapeError(f"unknown QED direction {self.steps[-1].direction!r}")
        seen: set[str] = set()
        for s in self.steps:
            if isinstance(s, ProphecyStep):
                if len(s.params) != len(s.witnesses):
                    raise ProofShapeError("one witness per prophecy variable is required")
                for w in s.witnesses:
                    if w in seen:
                        raise ProofShapeError(f"witness {w!r} introduced twice")
                    seen.add(w)
        return self


def step_tag(s: Step) -> str:
    if isinstance(s, ForwardStep):
        return "F"
    if isinstance(s, BackwardStep):
        return "B"
    if isinstance(s, ProphecyStep):
        return "FP"
    return "QED"


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class ProofTree:
    rule: str
    formula: Formula = TRUE
    children: tuple["ProofTree", ...] = ()
    params: tuple[Var, ...] = ()
    witnesses: tuple[str, ...] = ()
    tracker: Optional[str] = None
    select: Optional[Formula] = None
    step: Optional[int] = None

    def __post_init__(self):
        if self.rule not in ARITY:
            raise ProofShapeError(f"unknown rule {self.rule!r}")
        if len(self.children) != ARITY[self.rule]:
            raise ProofShapeError(f"{self.rule} takes {ARITY[self.rule]} premises, got {len(self.children)}")
        if self.rule in PROPHECY_RULES and len(self.params) != len(self.witnesses):
            raise ProofShapeError("one witness per prophecy variable is required")
        if self.rule == PROPH and not self.tracker:
            raise ProofShapeError("Proph needs a tracker relation name")
        if self.rule == PROPH_SELECT and self.select is None:
            raise ProofShapeError("Proph-Select needs a trigger formula")

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()


def ind(phi: Formula, step: Optional[int] = None) -> ProofTree:
    return ProofTree(IND, phi, step=step)


def cons(phi: Formula, child: ProofTree, step: Optional[int] = None) -> ProofTree:
    return ProofTree(CONS, phi, (child,), step=step)


def inc(phi: Formula, left: ProofTree, right: ProofTree, step: Optional[int] = None) -> ProofTree:
    return ProofTree(INC, phi, (left, right), step=step)


def rev(child: ProofTree, step: Optional[int] = None) -> ProofTree:
    return ProofTree(REV, TRUE, (child,), step=step)


def b_ind(phi: Formula, step: Optional[int] = None) -> ProofTree:
    return ProofTree(B_IND, phi, step=step)


def b_cons(phi: Formula, child: ProofTree, step: Optional[int] = None) -> ProofTree:
    return ProofTree(B_CONS, phi, (child,), step=step)


def b_inc(phi: Formula, left: ProofTree, right: ProofTree, step: Optional[int] = None) -> ProofTree:
    return ProofTree(B_INC, phi, (left, right), step=step)


def proph(phi, params, witnesses, tracker, soundness: ProofTree, extended: ProofTree, step=None) -> ProofTree:
    return ProofTree(PROPH, phi, (soundness, extended), tuple(params), tuple(witnesses), tracker, step=step)


def proph_fwd(phi, params, witnesses, child: ProofTree, step=None) -> ProofTree:
    return ProofTree(PROPH_FWD, phi, (child,), tuple(params), tuple(witnesses), step=step)


def proph_select(phi, params, witnesses, theta, child: ProofTree, step=None) -> ProofTree:
    return ProofTree(PROPH_SELECT, phi, (child,), tuple(params), tuple(witnesses), select=theta, step=step)


# ---------------------------------------------------------------------------
# obligations


@dataclass(frozen=True)
class Provenance:
    rule: str
    label: str
    step: Optional[int]
    path: tuple[int, ...]
    transition: Optional[str] = None


@dataclass(frozen=True)
class Obligation:
    name: str
    claim: Formula
    provenance: Provenance
    vocab: Vocabulary
    axioms: tuple[Formula, ...]

    @property
    def transition(self) -> Optional[str]:
        return self.provenance.transition


def _name(rule: str, label: str, step: Optional[int], path: tuple[int, ...], trans: Optional[str]) -> str:
    where = f"step{step + 1}" if step is not None else "node" + ("." + ".".join(map(str, path)) if path else "")
    tail = f"[{trans}]" if trans is not None else ""
    return f"{where}:{rule}:{label}{tail}"


class _Collector:
    def __init__(self):
        self.out: list[Obligation] = []

    def emit(self, node: ProofTree, path, problem: SafetyProblem, label: str, claim: Formula, trans=None):
        prov = Provenance(node.rule, label, node.step, path, trans)
        self.out.append(
            Obligation(_name(node.rule, label, node.step, path, trans), claim, prov, problem.vocab, problem.axioms)
        )


def _require_shape(cond: bool, msg: str) -> None:
    if not cond:
        raise ProofShapeError(msg)


def vcgen(problem: SafetyProblem, tree: ProofTree) -> list[Obligation]:
    """Verification conditions of every node, in preorder."""
    col = _Collector()
    _vc(problem, tree, (), col)
    return col.out


def premises(problem: SafetyProblem, node: ProofTree) -> list[SafetyProblem]:
    """Premise problems of a node applied to `problem`."""
    v = problem.vocab
    phi = node.formula
    r = node.rule
    try:
        if r in (IND, B_IND):
            return []
        if r == CONS:
            return [problem.map_components(bad=Not(phi))]
        if r == INC:
            return [problem.map_components(bad=Not(phi)), restrict(problem, phi)]
        if r == REV:
            return [reverse(problem)]
        if r == B_CONS:
            return [problem.map_components(init=Not(phi))]
        if r == B_INC:
            return [problem.map_components(init=Not(phi)), restrict(problem, phi)]
        if r == PROPH:
            return [
                prophecy_soundness(problem, phi, node.params, node.tracker),
                prophecy_extend(problem, phi, node.params, node.witnesses),
            ]
        if r in (PROPH_FWD, PROPH_SELECT):
            return [prophecy_extend(problem, phi, node.params, node.witnesses)]
    except ProblemError as e:
        raise ProofShapeError(f"{r}: {e}") from e
    raise ProofShapeError(f"unknown rule {r}")


def _check_payload(problem: SafetyProblem, node: ProofTree) -> None:
    from .logic import free_vars, has_primed, well_sorted

    v = problem.vocab
    f = node.formula
    if node.rule in PROPHECY_RULES:
        allowed = {p.name for p in node.params}
    else:
        allowed = set()
    extra = {x.name for x in free_vars(f)} - allowed
    _require_shape(not extra, f"{node.rule}: payload has free variables {sorted(extra)}")
    _require_shape(not has_primed(f), f"{node.rule}: payload must be a one-state formula")
    rep = well_sorted(f, v, False, env={p.name: p.sort for p in node.params})
    _require_shape(rep.ok, f"{node.rule}: " + "; ".join(map(str, rep.errors)))
    if node.select is not None:
        rep = well_sorted(node.select, v, False)
        _require_shape(rep.ok and not free_vars(node.select), f"{node.rule}: bad trigger formula")


def _vc(problem: SafetyProblem, node: ProofTree, path, col: _Collector) -> None:
    _check_payload(problem, node)
    v = problem.vocab
    phi = node.formula
    r = node.rule
    trans = problem.transitions
    if r == IND:
        _require_shape(problem.bad == Not(phi), f"Ind({phi}) does not conclude a problem with bad state {problem.bad}")
        col.emit(node, path, problem, "initiation", Implies(problem.init, phi))
        phi_n = prime(phi, v)
        for name, t in trans:
            col.emit(node, path, problem, "consecution", Implies(conj(phi, t), phi_n), name)
    elif r == CONS:
        col.emit(node, path, problem, "safety", Implies(phi, Not(problem.bad)))
    elif r == B_IND:
        _require_shape(problem.init == Not(phi), f"B-Ind({phi}) does not conclude a problem with initial state {problem.init}")
        col.emit(node, path, problem, "initiation", Implies(problem.bad, phi))
        phi_n = prime(phi, v)
        for name, t in trans:
            col.emit(node, path, problem, "consecution", Implies(conj(phi_n, t), phi), name)
    elif r == B_CONS:
        col.emit(node, path, problem, "safety", Implies(phi, Not(problem.init)))
    elif r in (PROPH_FWD, PROPH_SELECT):
        xs = node.params
        some = exists(xs, phi)
        col.emit(node, path, problem, "nonempty", Implies(problem.init, some))
        phi_n = prime(phi, v)
        if r == PROPH_FWD:
            for name, t in trans:
                col.emit(node, path, problem, "preserved", forall(xs, Implies(conj(phi, t), phi_n)), name)
        else:
            theta = node.select
            theta_n = prime(theta, v)
            for name, t in trans:
                col.emit(node, path, problem, "exists-preserved", Implies(conj(some, t), exists(xs, phi_n)), name)
            col.emit(node, path, problem, "before-trigger", Implies(Not(theta), forall(xs, phi)))
            for name, t in trans:
                col.emit(node, path, problem, "trigger-preserved", Implies(conj(theta, t), theta_n), name)
            for name, t in trans:
                col.emit(
                    node, path, problem, "selected-preserved", forall(xs, Implies(conj(phi, theta, t), phi_n)), name
                )
    for i, (child, sub) in enumerate(zip(node.children, premises(problem, node))):
        _vc(sub, child, path + (i,), col)


# ---------------------------------------------------------------------------
# elaboration


def elaborate(problem: SafetyProblem, script: ProofScript) -> ProofTree:
    """Script to tree: F -> Inc(Ind, rest); B -> B-Inc(B-Ind, rest);
    FP -> Proph-Fwd/Proph-Select(rest); QED closes with true."""
    script.validate()
    names = set(problem.vocab.names)
    for s in script.steps:
        if isinstance(s, ProphecyStep):
            for w in s.witnesses:
                if w in names:
                    raise ProofShapeError(f"witness name {w!r} is not fresh")
                names.add(w)
    return _elab(script.steps, 0)


def _elab(steps: Sequence[Step], i: int) -> ProofTree:
    s = steps[i]
    if isinstance(s, QedStep):
        if s.direction == "fwd":
            return cons(TRUE, ind(TRUE, i), i)
        return b_cons(TRUE, b_ind(TRUE, i), i)
    rest = _elab(steps, i + 1)
    if isinstance(s, ForwardStep):
        return inc(s.formula, ind(s.formula, i), rest, i)
    if isinstance(s, BackwardStep):
        return b_inc(s.formula, b_ind(s.formula, i), rest, i)
    if s.select is None:
        return proph_fwd(s.formula, s.params, s.witnesses, rest, i)
    return proph_select(s.formula, s.params, s.witnesses, s.select, rest, i)


def soundness_invariant(node: ProofTree, tracker: str) -> Formula:
    """The canonical safe invariant of the soundness problem of a heuristic
    prophecy node."""
    xs = node.params
    m = Rel(tracker, tuple(xs))
    some = exists(xs, conj(node.formula, m))
    if node.rule == PROPH_FWD:
        return some
    theta = node.select
    return disj(conj(Not(theta), forall(xs, m)), conj(theta, some))


def expand_heuristic(tree: ProofTree, vocab: Optional[Vocabulary] = None, tracker: Optional[str] = None) -> ProofTree:
    """Replace a Proph-Fwd/Proph-Select root by the general Proph rule whose
    soundness premise is closed by Cons + Ind with the canonical invariant.
    The tracker name is chosen fresh against `vocab` when given."""
    if tree.rule not in (PROPH_FWD, PROPH_SELECT):
        raise ProofShapeError(f"expand_heuristic needs a Proph-Fwd or Proph-Select root, got {tree.rule}")
    if tracker is None:
        avoid = set(tree.witnesses)
        if vocab is not None:
            avoid |= set(vocab.names)
        tracker = fresh_name("m", avoid)
    inv = soundness_invariant(tree, tracker)
    sound = cons(inv, ind(inv, tree.step), tree.step)
    return proph(tree.formula, tree.params, tree.witnesses, tracker, sound, tree.children[0], tree.step)


def expand_all(problem: SafetyProblem, tree: ProofTree) -> ProofTree:
    """Expand every heuristic prophecy node of a tree."""

    def go(p: SafetyProblem, node: ProofTree) -> ProofTree:
        subs = premises(p, node)
        kids = tuple(go(sp, c) for sp, c in zip(subs, node.children))
        node = _with_children(node, kids)
        if node.rule in (PROPH_FWD, PROPH_SELECT):
            return expand_heuristic(node, p.vocab)
        return node

    return go(problem, tree)


def _with_children(node: ProofTree, kids) -> ProofTree:
    from dataclasses import replace

    return replace(node, children=tuple(kids))


def normalize_backward(tree: ProofTree) -> ProofTree:
    """Rewrite B-rules into their Rev derivations:
    B-Ind(f) = Rev(Ind(f)); B-Cons(f, c) = Rev(Cons(f, Rev(c)));
    B-Inc(f, l, r) = Rev(Inc(f, Rev(l), Rev(r))). Rev(Rev(t)) collapses to t."""
    r = tree.rule
    kids = tuple(normalize_backward(c) for c in tree.children)
    if r == B_IND:
        return _rev(ind(tree.formula, tree.step), tree.step)
    if r == B_CONS:
        return _rev(cons(tree.formula, _rev(kids[0], tree.step), tree.step), tree.step)
    if r == B_INC:
        return _rev(inc(tree.formula, _rev(kids[0], tree.step), _rev(kids[1], tree.step), tree.step), tree.step)
    if r == REV:
        return _rev(kids[0], tree.step)
    return _with_children(tree, kids)


def _rev(t: ProofTree, step) -> ProofTree:
    if t.rule == REV:
        return t.children[0]
    return rev(t, step)


# ---------------------------------------------------------------------------
# checking


ACCEPTED, REJECTED, INCONCLUSIVE = "accepted", "rejected", "inconclusive"


@dataclass
class ObligationResult:
    obligation: Obligation
    verdict: object
    seconds: float

    @property
    def ok(self) -> bool:
        return bool(self.verdict.accepted)


@dataclass
class CheckResult:
    status: str
    results: list[ObligationResult]
    tree: Optional[ProofTree]
    error: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPTED

    def failures(self) -> list[ObligationResult]:
        return [r for r in self.results if not r.ok]


def check(problem: SafetyProblem, proof, backend, jobs: int = 1) -> CheckResult:
    """Accepted iff every obligation is valid (or valid up to the bound for
    the enumeration backend). Any counterexample rejects; otherwise any
    unknown or solver failure makes the verdict inconclusive. Malformed
    proofs are rejected with an error message and no obligations."""
    from .backends import discharge

    try:
        tree = elaborate(problem, proof) if isinstance(proof, ProofScript) else proof
        obligations = vcgen(problem, tree)
    except ProofShapeError as e:
        return CheckResult(REJECTED, [], None, str(e))
    done = discharge(obligations, backend, jobs)
    results = [ObligationResult(ob, d.verdict, d.seconds) for ob, d in zip(obligations, done)]
    kinds = {r.verdict.kind for r in results if not r.ok}
    if not kinds:
        status = ACCEPTED
    elif "counterexample" in kinds:
        status = REJECTED
    else:
        status = INCONCLUSIVE
    return CheckResult(status, results, tree)
