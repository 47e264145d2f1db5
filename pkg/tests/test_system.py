from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbproof.backends import EnumBackend
from fbproof.backends.model import Bounds
from fbproof.backends.reach import ErrorTrace, SafeUpToBound, bounded_reach, sound_prophecy_oracle
from fbproof.logic import (
    FALSE,
    TRUE,
    And,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
    RelDecl,
    Var,
    Vocabulary,
    conj,
    exists,
    forall,
    simplify,
)
from fbproof.proof import Obligation, Provenance
from fbproof.syntax import parse, parse_file, parse_formula
from fbproof.system import (
    FrameSugar,
    ProblemError,
    SafetyProblem,
    desugar_frame,
    herbrandize_safety,
    prophecy_extend,
    prophecy_soundness,
    restrict,
    reverse,
)

from .oracles import brute_valid

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
ELEM = Var("x", "elem")


def load(name):
    return parse_file(CORPUS / name).problem()


def valid(claim, problem, bound=2):
    ob = Obligation("t", claim, Provenance("test", "t", None, ()), problem.vocab, problem.axioms)
    return EnumBackend(Bounds(default=bound)).check(ob).accepted


def test_reverse_dealer():
    p = load("dealer.fbp")
    r = reverse(p)
    assert r.init == parse_formula("!!(d & p1 & p2)", p.vocab) or valid(Iff(r.init, parse_formula("d & p1 & p2", p.vocab)), p)
    assert r.bad == p.init
    assert reverse(r) == p


@pytest.mark.parametrize("name", ["dealer.fbp", "teams.fbp", "teams-prophecy.fbp", "paxos.fbp"])
def test_reverse_is_an_involution_on_corpus(name):
    p = load(name)
    assert reverse(reverse(p)) == p


def test_restrict_shapes():
    p = load("dealer.fbp")
    phi1 = parse_formula("!a | d", p.vocab)
    phi2 = parse_formula("!p1 | !p2", p.vocab)
    r = restrict(p, phi1)
    assert r.init == conj(p.init, phi1)
    assert r.bad == conj(p.bad, phi1)
    for (n, t), (_, t2) in zip(p.transitions, r.transitions):
        assert t2 == conj(t, phi1, parse_formula("!a' | d'", p.vocab, True))
    # nested restriction is equivalent to restricting by the conjunction
    nested = restrict(r, phi2)
    flat = restrict(p, And((phi1, phi2)))
    assert valid(Iff(nested.init, flat.init), p)
    assert valid(Iff(nested.bad, flat.bad), p)
    for (_, a), (_, b) in zip(nested.transitions, flat.transitions):
        assert valid(Iff(a, b), p)
    assert restrict(p, TRUE) == p


def test_restrict_rejects_two_state_formula():
    p = load("dealer.fbp")
    with pytest.raises(ProblemError):
        restrict(p, parse_formula("a'", p.vocab, True))


def test_prophecy_extend_teams():
    p = load("teams-prophecy.fbp")
    x = Var("x", "team")
    phi = parse_formula("!a(x)", p.vocab, False, [x])
    e = prophecy_extend(p, phi, [x], ["w"])
    v = e.vocab
    assert not v.is_mutable("w")
    aw = parse_formula("!a(w)", v)
    assert e.init == conj(p.init, aw)
    assert e.bad == conj(p.bad, aw)
    (_, t), = e.transitions
    assert t == conj(aw, p.transitions[0][1], parse_formula("!a'(w)", v, True))
    with pytest.raises(ProblemError):
        prophecy_extend(p, phi, [x], ["a"])


def test_prophecy_extend_empty_is_identity_up_to_true():
    p = load("dealer.fbp")
    assert prophecy_extend(p, TRUE, [], []) == p


def test_prophecy_soundness_shapes():
    p = load("teams-prophecy.fbp")
    x = Var("x", "team")
    phi = parse_formula("!a(x)", p.vocab, False, [x])
    s = prophecy_soundness(p, phi, [x], "m")
    assert s.vocab.is_mutable("m")
    v = s.vocab
    assert s.init == conj(p.init, parse_formula("forall x:team. !a(x) -> m(x)", v))
    assert s.bad == conj(p.bad, parse_formula("forall x:team. !a(x) -> !m(x)", v))
    (_, t), = s.transitions
    step = parse_formula("forall x:team. m(x) & !a(x) & !a'(x) -> m'(x)", v, True)
    assert t == conj(p.transitions[0][1], step)
    with pytest.raises(ProblemError):
        prophecy_soundness(p, phi, [x], "d")


def test_prophecy_soundness_false_has_valid_bad_conjunct():
    p = load("teams-prophecy.fbp")
    x = Var("x", "team")
    s = prophecy_soundness(p, FALSE, [x], "m")
    extra = s.bad.args[-1]
    assert valid(extra, s)


def test_desugar_frame_matches_handwritten_teams_transition():
    spec = parse_file(CORPUS / "teams.fbp")
    v = spec.vocab
    p = spec.problem()
    x = Var("x", "team")
    sugar = FrameSugar((x,), parse_formula("!a(x) & d'(x)", v, True, [x]), (Rel("d", (x,)),))
    explicit = parse_formula(
        "exists x:team. !a(x) & d'(x)"
        " & (forall z:team. z != x -> (d'(z) <-> d(z)))"
        " & (forall z:team. p1'(z) <-> p1(z)) & (forall z:team. p2'(z) <-> p2(z))",
        v,
        True,
    )
    assert valid(Iff(desugar_frame(sugar, v), explicit), p, bound=3)
    assert valid(Iff(p.transition("tau3"), explicit), p, bound=3)


def test_desugar_empty_modification_is_stutter():
    v = Vocabulary(relations=(RelDecl("a", (), True), RelDecl("k", (), False)))
    f = desugar_frame(FrameSugar((), TRUE, ()), v)
    assert brute_valid(Iff(f, Iff(Rel("a", (), True), Rel("a"))), (), v, {}, True)


def test_desugar_rejects_immutable_modification():
    v = Vocabulary(relations=(RelDecl("k", (), False),))
    with pytest.raises(ProblemError):
        desugar_frame(FrameSugar((), TRUE, (Rel("k"),)), v)


def test_herbrandize_quantifier_free_is_identity():
    p = load("dealer.fbp")
    assert herbrandize_safety(p) is p


def test_herbrandize_paxos_style_property():
    p = parse("""
    sort round
    sort value
    immutable relation le(round, round)
    axiom forall r:round. le(r, r)
    mutable relation decision(round, value)
    init forall r:round, v:value. !decision(r, v)
    transition decide { exists r:round, v:value. [ decision'(r, v) ] modifies decision(r, v) }
    safety forall ra:round, rb:round, va:value, vb:value.
        !le(rb, ra) & va != vb -> !(decision(ra, va) & decision(rb, vb))
    """).problem()
    h = herbrandize_safety(p)
    new = [n for n in h.vocab.names if n not in p.vocab.names]
    assert sorted(new) == ["ra", "rb", "va", "vb"]
    assert all(not h.vocab.is_mutable(n) for n in new)
    assert len(h.axioms) == len(p.axioms) + 1
    assert h.axioms[-1] == parse_formula("!le(rb, ra) & va != vb", h.vocab)
    assert simplify(h.bad) == parse_formula("decision(ra, va) & decision(rb, vb)", h.vocab)


def _bad_family(bad_is_reachable: bool):
    text = f"""
    sort elem
    mutable relation bad(elem)
    mutable relation seen(elem)
    init forall x:elem. !bad(x) & !seen(x)
    transition mark {{ exists x:elem. [ seen'(x) ] modifies seen(x) }}
    transition fail {{ exists x:elem. [ {'seen(x)' if bad_is_reachable else 'false'} & bad'(x) ] modifies bad(x) }}
    safety forall x:elem. !bad(x)
    """
    return parse(text).problem()


@pytest.mark.parametrize("reachable", [True, False])
def test_herbrandize_preserves_safety_on_small_instances(reachable):
    p = _bad_family(reachable)
    h = herbrandize_safety(p)
    assert h.bad == parse_formula("bad(x)", h.vocab) or "bad" in str(h.bad)
    for bound in (1, 2, 3):
        a = bounded_reach(p, Bounds(default=bound))
        b = bounded_reach(h, Bounds(default=bound))
        assert isinstance(a, SafeUpToBound) == isinstance(b, SafeUpToBound) == (not reachable)


def test_herbrandize_refuses_unexpected_shape():
    p = parse("""
    sort elem
    mutable relation p(elem)
    init true
    safety exists x:elem. p(x)
    """).problem()
    with pytest.raises(ProblemError):
        herbrandize_safety(p)


def test_axioms_must_be_immutable():
    with pytest.raises(Exception):
        parse("mutable relation a\naxiom a\ninit true\nsafety true\n")
    v = Vocabulary(relations=(RelDecl("a", (), True),))
    with pytest.raises(ProblemError):
        SafetyProblem(v, TRUE, (), FALSE, (Rel("a"),)).validate()


# ---------------------------------------------------------------------------
# randomized unary systems: sound-prophecy characterization


UNARY = Vocabulary(sorts=("elem",), relations=(RelDecl("p", ("elem",), True), RelDecl("q", ("elem",), True)))


@st.composite
def unary_literal(draw, var):
    name = draw(st.sampled_from(("p", "q")))
    atom = Rel(name, (var,))
    return atom if draw(st.booleans()) else Not(atom)


@st.composite
def unary_closed(draw):
    x = Var("x", "elem")
    lits = draw(st.lists(unary_literal(x), min_size=1, max_size=2))
    q = draw(st.sampled_from(("forall", "exists")))
    body = And(tuple(lits)) if q == "exists" else Or(tuple(lits)) if len(lits) > 1 else lits[0]
    return forall([x], body) if q == "forall" else exists([x], body)


@st.composite
def unary_problems(draw):
    x = Var("x", "elem")
    trans = []
    for i in range(draw(st.integers(1, 2))):
        guard = draw(st.lists(unary_literal(x), max_size=2))
        name = draw(st.sampled_from(("p", "q")))
        post = Rel(name, (x,), True)
        update = post if draw(st.booleans()) else Not(post)
        sugar = FrameSugar((x,), conj(*guard, update), (Rel(name, (x,)),))
        trans.append((f"t{i}", desugar_frame(sugar, UNARY)))
    return SafetyProblem(UNARY, draw(unary_closed()), tuple(trans), draw(unary_closed())).validate()


@st.composite
def prophecies(draw):
    x = Var("x", "elem")
    lits = draw(st.lists(unary_literal(x), min_size=1, max_size=2))
    return And(tuple(lits)) if draw(st.booleans()) else Or(tuple(lits)) if len(lits) > 1 else lits[0]


@settings(max_examples=120, deadline=None)
@given(unary_problems(), prophecies())
def test_sound_prophecy_iff_soundness_problem_is_safe(problem, phi):
    x = Var("x", "elem")
    bounds = Bounds(default=2)
    oracle = sound_prophecy_oracle(problem, phi, [x], bounds)
    tableau = bounded_reach(prophecy_soundness(problem, phi, [x], "m"), bounds)
    assert oracle.sound is not None
    assert oracle.sound == isinstance(tableau, SafeUpToBound)


@settings(max_examples=60, deadline=None)
@given(unary_problems(), prophecies())
def test_prophecy_extension_of_safe_problem_is_safe(problem, phi):
    x = Var("x", "elem")
    bounds = Bounds(default=2)
    if isinstance(bounded_reach(problem, bounds), SafeUpToBound):
        ext = prophecy_extend(problem, phi, [x], ["w"])
        assert isinstance(bounded_reach(ext, bounds), SafeUpToBound)
