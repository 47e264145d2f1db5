from pathlib import Path

import pytest
from hypothesis import given, settings

from fbproof.backends import EnumBackend, SmtBackend
from fbproof.backends.model import Bounds
from fbproof.backends.smt import solver_available
from fbproof.extract import certify, depth_bound, extract, extract_expanded
from fbproof.logic import TRUE, And, Iff, Not, quantifier_depth, symbol_names
from fbproof.proof import B_IND, IND, Obligation, Provenance, check, elaborate
from fbproof.syntax import format_formula, parse_file, parse_formula

from .oracles import truth_table_equivalent
from .proofgen import graph_invariant_ok, safe_problems_with_proofs

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
DEALER_NAMES = ("a", "d", "p1", "p2")
needs_z3 = pytest.mark.skipif(not solver_available(), reason="z3 not on PATH")


def corpus(name):
    spec = parse_file(CORPUS / name)
    return spec, spec.problem()


def equivalent(f, g, problem, bound):
    ob = Obligation("eq", Iff(f, g), Provenance("test", "eq", None, ()), problem.vocab, problem.axioms)
    return EnumBackend(Bounds(default=bound)).check(ob).accepted


def boolean_combination_of(f, payloads) -> bool:
    """f is built from the payloads with negation and binary conjunction."""
    if f in payloads:
        return True
    if isinstance(f, Not):
        return boolean_combination_of(f.body, payloads)
    if isinstance(f, And) and len(f.args) == 2:
        return all(boolean_combination_of(a, payloads) for a in f.args)
    return False


def ind_payloads(tree):
    return {n.formula for n in tree.nodes() if n.rule in (IND, B_IND)}


def test_dealer_forward_backward_extraction():
    spec, p = corpus("dealer.fbp")
    inv = extract(elaborate(p, spec.proofs["fb"]), p)
    expected = parse_formula("(a & !d) | !p1 | !p2", p.vocab)
    assert truth_table_equivalent(inv.raw, expected, DEALER_NAMES)
    assert truth_table_equivalent(inv.simplified, expected, DEALER_NAMES)
    # the negated backward payload shows up as a disjunct
    assert inv.simplified == parse_formula("!(!a | d) | !p1 | !p2", p.vocab)


def test_incremental_forward_extraction_is_the_conjunction_of_payloads():
    spec, p = corpus("dealer.fbp")
    inv = extract(elaborate(p, spec.proofs["fi"]), p)
    assert inv.simplified == parse_formula("(a | !p1 | !p2) & (!d | !p1 | !p2)", p.vocab)
    assert [c.kind for c in inv.provenance] == ["conjunct"] * 3  # two payloads and the QED's true


def test_teams_prophecy_extraction():
    spec, p = corpus("teams-prophecy.fbp")
    tree = elaborate(p, spec.proofs["main"])
    inv = extract(tree, p)
    assert inv.simplified == parse_formula("exists x:team. !a(x) & !(exists y:team. !d(x, y))", p.vocab)
    target = parse_formula("exists x:team. !a(x) & (forall y:team. d(x, y))", p.vocab)
    for b in (1, 2, 3):
        assert equivalent(inv.simplified, target, p, b)
        assert equivalent(extract_expanded(tree, p).simplified, inv.simplified, p, b)


def test_certify_examples():
    spec, p = corpus("dealer.fbp")
    good = certify(p, parse_formula("(a & !d) | !p1 | !p2", p.vocab), EnumBackend())
    assert good.ok
    bad = certify(p, parse_formula("!(d & p1 & p2)", p.vocab), EnumBackend())
    assert bad.status == "refuted"
    assert [r.obligation.name for r in bad.results if not r.ok] == ["certify:consecution[tau3]"]


@needs_z3
def test_teams_inactive_invariant_certified_at_bound_three_and_by_smt():
    spec, p = corpus("teams-prophecy.fbp")
    inv = parse_formula("exists x:team. !a(x) & (forall y:team. d(x, y))", p.vocab)
    assert certify(p, inv, EnumBackend(Bounds(default=3))).ok
    assert certify(p, inv, SmtBackend()).ok


CORPUS_PROOFS = [
    ("dealer.fbp", "fb"),
    ("dealer.fbp", "fi"),
    ("teams.fbp", "fb"),
    ("teams-prophecy.fbp", "main"),
]


@pytest.mark.parametrize("name,proof", CORPUS_PROOFS)
def test_corpus_extraction_sound_under_enum(name, proof):
    spec, p = corpus(name)
    tree = elaborate(p, spec.proofs[proof])
    backend = EnumBackend(Bounds(default=3))
    assert check(p, tree, backend).accepted
    inv = extract(tree, p)
    assert symbol_names(inv.raw) <= set(p.vocab.names)
    assert quantifier_depth(inv.raw) <= depth_bound(tree)
    assert certify(p, inv.raw, backend).ok
    assert certify(p, inv.simplified, backend).ok
    assert equivalent(inv.raw, inv.simplified, p, 3)
    assert parse_formula(format_formula(inv.simplified), p.vocab) == inv.simplified


@needs_z3
@pytest.mark.parametrize("proof", ["fb", "fbp"])
def test_paxos_extraction_sound_under_smt(proof):
    spec, p = corpus("paxos.fbp")
    tree = elaborate(p, spec.proofs[proof])
    smt = SmtBackend()
    assert check(p, tree, smt, jobs=4).accepted
    inv = extract(tree, p)
    assert certify(p, inv.simplified, smt, jobs=4).ok
    assert certify(p, extract_expanded(tree, p).simplified, smt, jobs=4).ok


@settings(max_examples=200, deadline=None)
@given(safe_problems_with_proofs())
def test_random_accepted_proofs_extract_to_certified_invariants(case):
    problem, script = case
    tree = elaborate(problem, script)
    inv = extract(tree, problem)
    # independent route: the invariant's state set is closed on the graph
    assert graph_invariant_ok(problem, inv.raw)
    assert graph_invariant_ok(problem, inv.simplified)
    assert certify(problem, inv.simplified, EnumBackend()).ok
    assert boolean_combination_of(inv.raw, ind_payloads(tree) | {TRUE})
    assert quantifier_depth(inv.raw) <= depth_bound(tree)


def test_multi_witness_prophecy_closed_form_is_certified():
    spec, p = corpus("teams-prophecy.fbp")
    src = (CORPUS / "teams-prophecy.fbp").read_text().split("proof {")[0]
    src += """proof {
      FP x:team, y:team as w1, w2 : !a(x) & !a(y)
      B exists z:team. !d(w1, z)
      QED bwd
    }
    """
    from fbproof.syntax import parse

    spec = parse(src)
    tree = elaborate(p, spec.proofs["main"])
    inv = extract(tree, p)
    assert quantifier_depth(inv.raw) == 3
    for b in (1, 2, 3):
        backend = EnumBackend(Bounds(default=b))
        assert check(p, tree, backend).accepted
        assert certify(p, inv.simplified, backend).ok
        assert equivalent(inv.simplified, extract_expanded(tree, p).simplified, p, b)
