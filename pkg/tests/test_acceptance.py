"""Acceptance criteria 1-11. Each test records one PASS/FAIL line, printed
in the pytest summary (and immediately with -s). Also runnable directly:

    python3 -m pytest tests/test_acceptance.py -q
"""
import itertools
import time
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbproof import powergen
from fbproof.backends import EnumBackend, SmtBackend
from fbproof.backends.model import Bounds
from fbproof.backends.reach import SafeUpToBound, bounded_reach, shortest_trace_by_deepening, sound_prophecy_oracle
from fbproof.backends.smt import solver_available
from fbproof.extract import certify, extract
from fbproof.logic import (
    And,
    Iff,
    Not,
    Rel,
    Var,
    disj,
    metrics,
    quantifier_depth,
    rename_bound_apart,
    subst_vars,
    swap_state,
)
from fbproof.proof import Obligation, Provenance, check, elaborate
from fbproof.report import metrics_rows
from fbproof.syntax import parse_file, parse_formula
from fbproof.system import prophecy_soundness, reverse

from . import acceptance_log
from .oracles import (
    bfs_distance,
    brute_valid,
    naive_eval,
    naive_term,
    prop_graph,
    prop_states,
    truth_table_equivalent,
)
from .proofgen import graph_invariant_ok, safe_problems_with_proofs
from .strategies import (
    FO_VAR_NAMES,
    FO_VOCAB,
    PROP_NAMES,
    PROP_VOCAB,
    closed_fo_formulas,
    fo_formulas,
    fo_interpretations,
    fo_terms,
    prop_formulas,
    prop_problems,
)
from .test_system import prophecies, unary_problems

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
DEALER_NAMES = ("a", "d", "p1", "p2")
HAVE_Z3 = solver_available()


def corpus(name):
    spec = parse_file(CORPUS / name)
    return spec, spec.problem()


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def verdict(number, ok, detail):
    acceptance_log.record(number, ok, detail)
    assert ok, detail


def run_property(prop, examples):
    """Run a property over its attached strategies; returns how many cases
    were executed."""
    count = [0]

    @settings(max_examples=examples, deadline=None, database=None)
    @given(st.tuples(*prop._strategies))
    def runner(args):
        count[0] += 1
        prop(*args)

    runner()
    return count[0]


def strategies(*strats):
    """Attach hypothesis strategies to a plain property function."""

    def wrap(fn):
        fn._strategies = strats
        return fn

    return wrap


# ---------------------------------------------------------------------------


def test_criterion_01_dealer_forward_backward():
    spec, p = corpus("dealer.fbp")
    res, secs = timed(check, p, spec.proofs["fb"], EnumBackend())
    inv = extract(res.tree, p) if res.accepted else None
    target = parse_formula("(a & !d) | !p1 | !p2", p.vocab)
    equiv = inv is not None and truth_table_equivalent(inv.simplified, target, DEALER_NAMES)
    ok = res.accepted and secs < 1.0 and equiv
    verdict(1, ok, f"dealer FB proof {res.status} in {secs:.3f}s; invariant equivalent over 16 assignments: {equiv}")


def test_criterion_02_incremental_forward():
    spec, p = corpus("dealer.fbp")
    res = check(p, spec.proofs["fi"], EnumBackend())
    inv = extract(res.tree, p).simplified if res.accepted else None
    payloads = [s.formula for s in spec.proofs["fi"].steps[:2]]
    ok = res.accepted and isinstance(inv, And) and list(inv.args) == payloads
    verdict(2, ok, f"dealer FI proof {res.status}; invariant has {len(inv.args) if isinstance(inv, And) else '?'} conjuncts")


def test_criterion_03_no_clausal_invariant():
    spec, p = corpus("dealer.fbp")
    init, edges, bad = prop_graph(p, DEALER_NAMES)
    t0 = time.perf_counter()
    certified = graph_ok = 0
    clauses = 0
    for signs in itertools.product((None, True, False), repeat=4):
        lits = [Rel(n) if s else Not(Rel(n)) for n, s in zip(DEALER_NAMES, signs) if s is not None]
        clause = disj(*lits)
        clauses += 1
        certified += certify(p, clause, EnumBackend()).ok
        graph_ok += graph_invariant_ok(p, clause, DEALER_NAMES)
    secs = time.perf_counter() - t0
    ok = clauses == 81 and certified == 0 and graph_ok == 0 and secs < 1.0
    verdict(3, ok, f"{clauses} clauses, {certified} certified (graph oracle: {graph_ok}) in {secs:.3f}s")


def test_criterion_04_teams_bounds():
    spec, p = corpus("teams.fbp")
    details, ok = [], True
    for b in (1, 2, 3):
        res, secs = timed(check, p, spec.proofs["fb"], EnumBackend(Bounds.of({"team": b})))
        ok &= res.accepted and secs < 30
        details.append(f"team={b}: {res.status} {secs:.2f}s")
    verdict(4, ok, "teams FB proof; " + ", ".join(details))


def test_criterion_05_prophecy_extraction():
    spec, p = corpus("teams-prophecy.fbp")
    target = parse_formula("exists x:team. !a(x) & (forall y:team. d(x, y))", p.vocab)
    details, ok = [], True
    tree = elaborate(p, spec.proofs["main"])
    inv = extract(tree, p).simplified
    for b in (1, 2, 3):
        backend = EnumBackend(Bounds(default=b))
        accepted = check(p, tree, backend).accepted
        ob = Obligation("eq", Iff(inv, target), Provenance("eq", "eq", None, ()), p.vocab, p.axioms)
        equiv = backend.check(ob).accepted
        ok &= accepted and equiv
        details.append(f"bound {b}: accepted={accepted} equivalent={equiv}")
    verdict(5, ok, "; ".join(details))


def test_criterion_06_sound_prophecy_characterization():
    x = Var("x", "elem")
    bounds = Bounds(default=2)
    tally = {"sound": 0, "unsound": 0}

    @strategies(unary_problems(), prophecies())
    def agree(problem, phi):
        oracle = sound_prophecy_oracle(problem, phi, [x], bounds)
        tableau = bounded_reach(prophecy_soundness(problem, phi, [x], "m"), bounds)
        assert oracle.sound is not None
        assert oracle.sound == isinstance(tableau, SafeUpToBound)
        tally["sound" if oracle.sound else "unsound"] += 1

    try:
        n = run_property(agree, 150)
        ok, err = n >= 100, ""
    except AssertionError as e:
        n, ok, err = 0, False, f" disagreement: {e}"
    verdict(6, ok, f"{n} random unary systems, trace oracle agrees with soundness problem ({tally}){err}")


def test_criterion_07_extraction_soundness():
    details, ok = [], True
    for name, proof, backend in [
        ("dealer.fbp", "fb", EnumBackend()),
        ("dealer.fbp", "fi", EnumBackend()),
        ("teams.fbp", "fb", EnumBackend(Bounds(default=3))),
        ("teams-prophecy.fbp", "main", EnumBackend(Bounds(default=3))),
    ] + ([("paxos.fbp", "fb", SmtBackend()), ("paxos.fbp", "fbp", SmtBackend())] if HAVE_Z3 else []):
        spec, p = corpus(name)
        res = check(p, spec.proofs[proof], backend, jobs=4)
        good = res.accepted and certify(p, extract(res.tree, p).simplified, backend, jobs=4).ok
        ok &= good
        details.append(f"{name}:{proof}={'ok' if good else 'FAIL'}")

    @strategies(safe_problems_with_proofs())
    def random_proof(case):
        problem, script = case
        res = check(problem, script, EnumBackend())
        assert res.accepted
        inv = extract(res.tree, problem).simplified
        assert certify(problem, inv, EnumBackend()).ok
        assert graph_invariant_ok(problem, inv)

    try:
        n = run_property(random_proof, 220)
    except AssertionError:
        n, ok = 0, False
    ok &= n >= 200
    verdict(7, ok, f"corpus {' '.join(details)}; {n} random accepted proofs certified")


@pytest.mark.skipif(not HAVE_Z3, reason="z3 not on PATH")
def test_criterion_08_paxos_smt():
    spec, p = corpus("paxos.fbp")
    details, ok = [], True
    for name in ("fb", "fbp"):
        res, secs = timed(check, p, spec.proofs[name], SmtBackend())
        ok &= res.accepted and secs < 60
        details.append(f"{name}: {res.status} {secs:.2f}s")
    verdict(8, ok, "paxos with SMT; " + ", ".join(details))


def test_criterion_09_paxos_metrics():
    spec, _ = corpus("paxos-fol-rv.fbp")
    rows = [(r.tag, r.quantifiers, r.alternations, r.connectives) for r in metrics_rows(spec.proofs["fb"])]
    expected = [("F", 2, 1, 2), ("B", 2, 1, 2), ("F", 4, 0, 3)]
    verdict(9, rows == expected, f"paxos-fol-rv rows {rows}")


def test_criterion_10_power_families():
    details, ok = [], True
    for n in (1, 2, 3):
        spec = powergen.generate(n, "fbpi")
        p = spec.problem()
        backend = SmtBackend() if HAVE_Z3 else EnumBackend()
        res = check(p, spec.proofs["main"], backend)
        depth = quantifier_depth(extract(res.tree, p).simplified) if res.accepted else None
        safe = isinstance(bounded_reach(p, Bounds(default=2)), SafeUpToBound)
        ok &= res.accepted and depth == n and safe
        details.append(f"n={n}: {res.status}, depth {depth}, safe@2={safe}")
    verdict(10, ok, "; ".join(details))


def test_criterion_11_property_suites():
    counts = {}

    @strategies(prop_problems())
    def reverse_involution(problem):
        assert reverse(reverse(problem)) == problem

    @strategies(fo_formulas(two_state=True, depth=4))
    def swap_involution(f):
        assert swap_state(swap_state(f, FO_VOCAB), FO_VOCAB) == f

    @strategies(
        fo_formulas(free=FO_VAR_NAMES, depth=3),
        st.sampled_from(FO_VAR_NAMES),
        fo_terms(FO_VAR_NAMES),
        fo_interpretations(size=2, two_state=False),
    )
    def capture_avoidance(f, var, term, interp):
        g = subst_vars(f, {var: term})
        for vals in itertools.product(range(2), repeat=3):
            env = dict(zip(FO_VAR_NAMES, vals))
            want = naive_eval(f, {"elem": 2}, interp, {**env, var: naive_term(term, interp, env)})
            assert naive_eval(g, {"elem": 2}, interp, env) == want

    @strategies(closed_fo_formulas(depth=4), st.sets(st.sampled_from(FO_VAR_NAMES), min_size=1))
    def renaming_invariance(f, avoid):
        assert metrics(rename_bound_apart(f, avoid)) == metrics(f)

    @strategies(prop_formulas(depth=4, two_state=True))
    def backend_agreement(f):
        ob = Obligation("t", f, Provenance("t", "t", None, ()), PROP_VOCAB, ())
        truth = brute_valid(f, (), PROP_VOCAB, {}, two_state=True)
        assert EnumBackend(strategy="sat").check(ob).accepted == truth
        assert EnumBackend(strategy="explicit").check(ob).accepted == truth

    @strategies(prop_problems())
    def bfs_minimality(problem):
        init, edges, bad = prop_graph(problem, PROP_NAMES)
        expected = bfs_distance(init, edges, bad)
        res = bounded_reach(problem)
        got = None if isinstance(res, SafeUpToBound) else len(res.trace)
        assert got == expected
        if expected is not None:
            assert shortest_trace_by_deepening(problem, max_depth=8) == expected

    plan = [
        (reverse_involution, 200),
        (swap_involution, 200),
        (capture_avoidance, 200),
        (renaming_invariance, 200),
        (backend_agreement, 200),
        (bfs_minimality, 120),
    ]
    failed = []
    for prop, n in plan:
        try:
            counts[prop.__name__] = run_property(prop, n)
        except AssertionError as e:
            counts[prop.__name__] = 0
            failed.append(f"{prop.__name__}: {e}")
    total = sum(counts.values())
    ok = not failed and total >= 1000
    verdict(11, ok, f"{total} randomized cases {counts}" + (f" failures: {failed}" if failed else ""))
