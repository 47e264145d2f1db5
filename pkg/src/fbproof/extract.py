"""Invariant extraction from accepted proofs, and independent certification.

Backward rules are first rewritten into their time-reversal derivations
(see proof.normalize_backward), so only Ind, Cons, Inc, Rev and the
prophecy rules need an extraction clause:

    Ind(f)        f
    Cons          the premise's invariant
    Inc           conjunction of both premises' invariants
    Rev           negation of the premise's invariant
    Proph         the soundness invariant with every m(t) replaced by the
                  extended problem's invariant at t
    Proph-Fwd     exists x. f(x) & psi[x/w]
    Proph-Select  (!theta & forall x. psi[x/w]) | (theta & exists x. f(x) & psi[x/w])
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .logic import (
    FALSE,
    TRUE,
    And,
    Bottom,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    Var,
    Vocabulary,
    conj,
    disj,
    exists,
    forall,
    free_vars,
    prime,
    quantifier_depth,
    simplify,
    subst_relation,
    subst_terms,
    symbol_names,
)
from .proof import (
    B_CONS,
    B_IND,
    B_INC,
    CONS,
    IND,
    INC,
    PROPH,
    PROPH_FWD,
    PROPH_SELECT,
    REV,
    ProofTree,
    normalize_backward,
    premises,
)
from .system import SafetyProblem


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class Contribution:
    rule: str
    step: Optional[int]
    kind: str  # conjunct | negation | substitution-host | substitution-body | closed-form


@dataclass
class ExtractedInvariant:
    raw: Formula
    simplified: Formula
    provenance: list[Contribution] = field(default_factory=list)

    @property
    def formula(self) -> Formula:
        return self.simplified


def _instantiate_witnesses(psi: Formula, params, witnesses) -> Formula:
    """psi[x/w]: witness constants become the prophecy variables."""
    return subst_terms(psi, {w: p for w, p in zip(witnesses, params)})


def extract(tree: ProofTree, problem: Optional[SafetyProblem] = None) -> ExtractedInvariant:
    """Safe inductive invariant of the root problem read off an accepted
    proof. With `problem` given the result is checked for leaked witness
    and tracker symbols against the root vocabulary."""
    prov: list[Contribution] = []
    introduced: set[str] = set()

    def go(t: ProofTree) -> Formula:
        r = t.rule
        if r == IND:
            prov.append(Contribution(r, t.step, "conjunct"))
            return t.formula
        if r == CONS:
            return go(t.children[0])
        if r == INC:
            return And((go(t.children[0]), go(t.children[1])))
        if r == REV:
            prov.append(Contribution(r, t.step, "negation"))
            return Not(go(t.children[0]))
        if r == PROPH:
            introduced.update(t.witnesses)
            introduced.add(t.tracker)
            xi = go(t.children[0])
            psi = go(t.children[1])
            prov.append(Contribution(r, t.step, "substitution-host"))
            prov.append(Contribution(r, t.step, "substitution-body"))
            return subst_relation(xi, t.tracker, psi, t.witnesses)
        if r in (PROPH_FWD, PROPH_SELECT):
            introduced.update(t.witnesses)
            psi = _instantiate_witnesses(go(t.children[0]), t.params, t.witnesses)
            prov.append(Contribution(r, t.step, "closed-form"))
            xs = t.params
            some = exists(xs, And((t.formula, psi)))
            if r == PROPH_FWD:
                return some
            return Or((And((Not(t.select), forall(xs, psi))), And((t.select, some))))
        raise ExtractionError(f"no extraction clause for {r}")

    raw = go(normalize_backward(tree))
    leaked = symbol_names(raw) & introduced
    if leaked:
        raise ExtractionError(f"internal error: extracted invariant mentions {sorted(leaked)}")
    if free_vars(raw):
        raise ExtractionError("internal error: extracted invariant is not closed")
    if problem is not None:
        unknown = symbol_names(raw) - set(problem.vocab.names)
        if unknown:
            raise ExtractionError(f"internal error: extracted invariant mentions {sorted(unknown)}")
    if quantifier_depth(raw) > depth_bound(tree):
        raise ExtractionError("internal error: extracted invariant exceeds the quantifier-depth bound")
    return ExtractedInvariant(raw, tidy(raw), prov)


def tidy(f: Formula) -> Formula:
    """Syntactic cleanup: flatten, drop neutral constants, remove double
    negations. A negated conjunction or disjunction with a negated compound
    member is pushed inward, which turns the nested negations produced by
    backward steps into plain disjunctions."""

    def go(g: Formula) -> Formula:
        if isinstance(g, Not):
            b = g.body
            if isinstance(b, Not):
                return go(b.body)
            if isinstance(b, (And, Or)) and any(_negated_compound(a) for a in b.args):
                parts = [go(Not(a)) for a in b.args]
                return disj(parts) if isinstance(b, And) else conj(parts)
            return simplify(Not(go(b)))
        if isinstance(g, And):
            return simplify(conj([go(a) for a in g.args]))
        if isinstance(g, Or):
            return simplify(disj([go(a) for a in g.args]))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        if isinstance(g, (Forall, Exists)):
            return simplify(type(g)(g.binders, go(g.body)))
        return g

    return simplify(go(f))


def _negated_compound(f: Formula) -> bool:
    return isinstance(f, Not) and isinstance(f.body, (And, Or, Not, Implies, Forall, Exists))


def extract_expanded(tree: ProofTree, problem: SafetyProblem) -> ExtractedInvariant:
    """Same as extract, but prophecy heuristics are first expanded into the
    general Proph rule. Used to cross-check the closed forms."""
    from .proof import expand_all

    return extract(expand_all(problem, tree), problem)


def ind_payload_count(tree: ProofTree) -> int:
    return sum(1 for n in tree.nodes() if n.rule in (IND, B_IND))


def depth_bound(tree: ProofTree) -> int:
    """n * d over the Ind-like payloads of a tree. A heuristic prophecy node
    counts as the Ind payload its expansion would carry (the canonical
    soundness invariant)."""
    from .proof import soundness_invariant

    payloads = []
    for n in tree.nodes():
        if n.rule in (IND, B_IND):
            payloads.append(n.formula)
        elif n.rule in (PROPH_FWD, PROPH_SELECT):
            payloads.append(soundness_invariant(n, "m"))
    nontrivial = [p for p in payloads if not isinstance(p, (Top, Bottom))]
    d = max((quantifier_depth(p) for p in payloads), default=0)
    return len(nontrivial) * d


# ---------------------------------------------------------------------------
# certification


@dataclass
class Certification:
    results: list  # of proof.ObligationResult

    @property
    def status(self) -> str:
        kinds = {r.verdict.kind for r in self.results if not r.ok}
        if not kinds:
            return "certified"
        if "counterexample" in kinds:
            return "refuted"
        return "inconclusive"

    @property
    def ok(self) -> bool:
        return self.status == "certified"


def certification_obligations(problem: SafetyProblem, inv: Formula):
    from .proof import Obligation, Provenance

    v = problem.vocab
    inv_n = prime(inv, v)

    def ob(label, claim, trans=None):
        name = f"certify:{label}" + (f"[{trans}]" if trans else "")
        return Obligation(name, claim, Provenance("certify", label, None, (), trans), v, problem.axioms)

    out = [ob("initiation", Implies(problem.init, inv))]
    out += [ob("consecution", Implies(conj(inv, t), inv_n), n) for n, t in problem.transitions]
    out.append(ob("safety", Implies(inv, Not(problem.bad))))
    return out


def certify(problem: SafetyProblem, inv: Formula, backend, jobs: int = 1) -> Certification:
    """Initiation, per-transition consecution, and safety of `inv`, each
    discharged independently of any proof."""
    from .backends import discharge
    from .proof import ObligationResult

    obs = certification_obligations(problem, inv)
    done = discharge(obs, backend, jobs)
    return Certification([ObligationResult(o, d.verdict, d.seconds) for o, d in zip(obs, done)])
