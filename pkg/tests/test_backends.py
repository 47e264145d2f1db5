import itertools
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbproof.backends import EnumBackend, SmtBackend, discharge, make_backend
from fbproof.backends.model import Bounds, Counterexample, SolverFailure, Valid, ValidUpToBound
from fbproof.backends.reach import (
    BudgetExceeded,
    ErrorTrace,
    SafeUpToBound,
    bounded_reach,
    reachable_states,
    shortest_trace_by_deepening,
)
from fbproof.backends.sat import Solver
from fbproof.backends.smt import SmtConfig, decode_model, solver_available
from fbproof.logic import ConstDecl, Implies, Rel, RelDecl, Vocabulary
from fbproof.proof import Obligation, Provenance
from fbproof.syntax import parse_file, parse_formula

from .oracles import bfs_distance, brute_valid, forward_closure, naive_eval, prop_graph, prop_states
from .strategies import FO_VOCAB, PROP_NAMES, PROP_VOCAB, closed_fo_formulas, prop_formulas, prop_problems

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
needs_z3 = pytest.mark.skipif(not solver_available(), reason="z3 not on PATH")


def obligation(claim, vocab, axioms=()):
    return Obligation("t", claim, Provenance("test", "t", None, ()), vocab, tuple(axioms))


# -- SAT core -------------------------------------------------------------------


def _brute_sat(n, clauses):
    for bits in itertools.product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


clause_lists = st.integers(1, 7).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(
            st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from((v, -v))), min_size=1, max_size=3),
            max_size=30,
        ),
    )
)


@settings(max_examples=300, deadline=None)
@given(clause_lists)
def test_sat_solver_agrees_with_truth_tables(case):
    n, clauses = case
    s = Solver()
    for _ in range(n):
        s.new_var()
    ok = all(s.add_clause(c) for c in clauses)
    got = s.solve() if ok else False
    assert got == _brute_sat(n, clauses)
    if got:
        assert all(any(s.lit_true(l) for l in c) for c in clauses)


@settings(max_examples=100, deadline=None)
@given(clause_lists, st.lists(st.integers(1, 7), max_size=3))
def test_sat_solver_assumptions_are_incremental(case, assume):
    n, clauses = case
    lits = [a if a % 2 else -a for a in assume if a <= n]
    s = Solver()
    for _ in range(n):
        s.new_var()
    ok = all(s.add_clause(c) for c in clauses)
    if not ok:
        return
    assert s.solve(lits) == _brute_sat(n, clauses + [[l] for l in lits])
    # assumptions do not stick
    assert s.solve() == _brute_sat(n, clauses)


# -- enumeration backend ------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(prop_formulas(depth=4))
def test_enum_strategies_agree_with_truth_table_propositionally(f):
    truth = brute_valid(f, (), PROP_VOCAB, {}, two_state=False)
    for strategy in ("sat", "explicit"):
        v = EnumBackend(Bounds(default=2), strategy).check(obligation(f, PROP_VOCAB))
        assert v.accepted == truth
        if not truth:
            assert isinstance(v, Counterexample)
            assert not naive_eval(f, {}, v.model.values)


@settings(max_examples=60, deadline=None)
@given(closed_fo_formulas(depth=3))
def test_enum_agrees_with_brute_force_first_order(f):
    truth = all(brute_valid(f, (), FO_VOCAB, {"elem": n}, two_state=False) for n in (1, 2))
    for strategy in ("sat", "explicit"):
        v = EnumBackend(Bounds(default=2), strategy).check(obligation(f, FO_VOCAB))
        assert v.accepted == truth
        if truth:
            assert isinstance(v, ValidUpToBound)
        else:
            assert not naive_eval(f, v.model.sizes, v.model.values)


def test_enum_respects_axioms():
    v = Vocabulary(relations=(RelDecl("k", (), False),))
    assert EnumBackend().check(obligation(Rel("k"), v, [Rel("k")])).accepted
    assert not EnumBackend().check(obligation(Rel("k"), v)).accepted


def test_enum_two_state_counterexample_has_both_copies():
    dealer = parse_file(CORPUS / "dealer.fbp").problem()
    claim = Implies(parse_formula("a", dealer.vocab), dealer.transition("tau1"))
    v = EnumBackend().check(obligation(claim, dealer.vocab))
    assert isinstance(v, Counterexample)
    assert ("a", True) in v.model.values and ("a", False) in v.model.values


# -- SMT backend ----------------------------------------------------------------


@needs_z3
@settings(max_examples=60, deadline=None)
@given(prop_formulas(depth=4, two_state=True))
def test_smt_agrees_with_truth_table_propositionally(f):
    truth = brute_valid(f, (), PROP_VOCAB, {}, two_state=True)
    v = SmtBackend().check(obligation(f, PROP_VOCAB))
    assert v.accepted == truth
    assert isinstance(v, Valid if truth else Counterexample)


@needs_z3
@settings(max_examples=40, deadline=None)
@given(closed_fo_formulas(depth=3))
def test_smt_valid_implies_enum_valid(f):
    smt = SmtBackend().check(obligation(f, FO_VOCAB))
    enum = EnumBackend(Bounds(default=2)).check(obligation(f, FO_VOCAB))
    if smt.accepted:
        assert enum.accepted
    if not enum.accepted:
        assert isinstance(smt, Counterexample)
    if isinstance(smt, Counterexample) and smt.model is not None:
        assert not naive_eval(f, smt.model.sizes, smt.model.values)


@needs_z3
def test_smt_finds_counterexample_beyond_enum_bound():
    v = Vocabulary(("s",))
    f = parse_formula("forall x:s, y:s, z:s. x = y | y = z | x = z", v)
    assert EnumBackend(Bounds(default=2)).check(obligation(f, v)).accepted
    got = SmtBackend().check(obligation(f, v))
    assert isinstance(got, Counterexample)
    assert got.model.sizes["s"] >= 3


def test_decode_model_reads_z3_output():
    # verbatim shape of a z3 4.x model for an uninterpreted sort
    text = """(
      ;; universe for S_team:
      ;;   S_team!val!0 S_team!val!1
      ;; -----------
      ;; definitions for universe elements:
      (declare-fun S_team!val!0 () S_team)
      (declare-fun S_team!val!1 () S_team)
      ;; cardinality constraint:
      (forall ((x S_team)) (or (= x S_team!val!0) (= x S_team!val!1)))
      ;; -----------
      (define-fun F_w () S_team
        S_team!val!1)
      (define-fun F_a ((x!0 S_team)) Bool
        (ite (= x!0 S_team!val!1) false
          true))
    )"""
    v = parse_file(CORPUS / "teams-prophecy.fbp").vocab
    v = Vocabulary(v.sorts, (ConstDecl("w", "team", False),), v.functions, v.relations)
    m = decode_model(text, v, two_state=False)
    assert m.sizes["team"] == 2
    assert m.get("w") == 1
    assert m.get("a") == frozenset({(0,)})


def test_missing_solver_is_a_solver_failure():
    b = make_backend("smt", solver_cmd="definitely-not-a-solver-binary")
    got = b.check(obligation(Rel("a"), PROP_VOCAB))
    assert isinstance(got, SolverFailure)
    assert not got.accepted


def test_discharge_keeps_input_order_in_parallel():
    obs = [obligation(parse_formula(t, PROP_VOCAB), PROP_VOCAB) for t in ("a | !a", "a", "b -> b", "c")]
    res = discharge(obs, EnumBackend(), jobs=3)
    assert [r.verdict.accepted for r in res] == [True, False, True, False]


# -- bounded reachability -------------------------------------------------------------


def _dealer_oracle(name):
    p = parse_file(CORPUS / name).problem()
    names = ("a", "d", "p1", "p2")
    init, edges, bad = prop_graph(p, names)
    return p, names, init, edges, bad


def test_dealer_reachable_state_count_matches_graph_oracle():
    p, names, init, edges, bad = _dealer_oracle("dealer.fbp")
    reach = forward_closure(init, edges, set(prop_states(names)))
    assert not (reach & bad)
    res = bounded_reach(p)
    assert isinstance(res, SafeUpToBound)
    assert res.explored == len(reach) == 13
    assert len(reachable_states(p, {})) == 13


def test_dealer_mutated_trace_is_shortest_and_replays():
    p, names, init, edges, bad = _dealer_oracle("dealer-mutated.fbp")
    res = bounded_reach(p)
    assert isinstance(res, ErrorTrace)
    assert len(res.trace) == bfs_distance(init, edges, bad) == 3
    _replay(p, res.trace)


def _replay(problem, trace):
    from fbproof.backends.evaluate import evaluate
    from fbproof.backends.model import FiniteModel

    states = trace.states
    assert evaluate(problem.init, states[0])
    assert evaluate(problem.bad, states[-1])
    for pre, name, post in zip(states, trace.steps, states[1:]):
        both = dict(pre.values)
        both.update({(n, True): v for (n, _), v in post.values.items() if problem.vocab.is_mutable(n)})
        assert evaluate(problem.transition(name), FiniteModel(problem.vocab, pre.sizes, both))


def test_teams_safe_at_two_teams():
    p = parse_file(CORPUS / "teams.fbp").problem()
    res = bounded_reach(p, Bounds.of({"team": 2}))
    assert isinstance(res, SafeUpToBound)


def test_budget_is_reported():
    p = parse_file(CORPUS / "dealer.fbp").problem()
    res = bounded_reach(p, max_states=5)
    assert isinstance(res, BudgetExceeded)


@settings(max_examples=150, deadline=None)
@given(prop_problems())
def test_bfs_is_minimal_and_matches_graph_oracle(problem):
    init, edges, bad = prop_graph(problem, PROP_NAMES)
    expected = bfs_distance(init, edges, bad)
    sat = bounded_reach(problem, strategy="sat")
    explicit = bounded_reach(problem, strategy="explicit")
    if expected is None:
        assert isinstance(sat, SafeUpToBound) and isinstance(explicit, SafeUpToBound)
        assert sat.explored == explicit.explored
        assert sat.explored == len(forward_closure(init, edges, set(prop_states(PROP_NAMES))))
    else:
        assert len(sat.trace) == len(explicit.trace) == expected
        assert shortest_trace_by_deepening(problem, max_depth=8) == expected
        _replay(problem, sat.trace)


def test_unary_first_order_trace_replays():
    from fbproof.system import SafetyProblem

    p = parse_file(CORPUS / "teams.fbp").problem()
    unsafe = SafetyProblem(p.vocab, p.init, p.transitions, parse_formula("exists x:team. p2(x)", p.vocab), p.axioms)
    res = bounded_reach(unsafe, Bounds.of({"team": 2}))
    assert isinstance(res, ErrorTrace)
    # p1 is unconstrained initially, so one hand-off suffices
    assert res.trace.steps == ["tau2"]
    _replay(unsafe, res.trace)
    assert shortest_trace_by_deepening(unsafe, Bounds.of({"team": 2}), 6) == 1
