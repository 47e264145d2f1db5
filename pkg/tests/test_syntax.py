from pathlib import Path

import pytest
from hypothesis import given, settings

from fbproof.logic import Not, Rel, RelDecl
from fbproof.proof import BackwardStep, ForwardStep, ProphecyStep, QedStep
from fbproof.syntax import (
    ParseError,
    TransitionItem,
    format_formula,
    format_spec,
    parse,
    parse_file,
    parse_formula,
    tokenize,
)
from fbproof.system import FrameSugar

from .strategies import FO_VAR_NAMES, FO_VOCAB, elem, fo_formulas

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
CORPUS_FILES = sorted(p.name for p in CORPUS.glob("*.fbp") if not p.is_symlink())


def diagnostics(text):
    with pytest.raises(ParseError) as e:
        parse(text)
    return e.value.diagnostics


def test_dealer_declarations():
    spec = parse_file(CORPUS / "dealer.fbp")
    v = spec.vocab
    assert [d.name for d in v.relations] == ["a", "d", "p1", "p2"]
    assert all(d.arg_sorts == () and d.mutable for d in v.relations)
    assert spec.transition_count() == 3
    assert spec.safety == parse_formula("!(d & p1 & p2)", v)
    # safety is stated positively; the bad states are its negation
    assert spec.problem().bad == Not(spec.safety)
    assert set(spec.proofs) == {"fb", "fi"}
    assert spec.proofs["fb"].steps == (
        BackwardStep(parse_formula("!a | d", v)),
        ForwardStep(parse_formula("!p1 | !p2", v)),
        QedStep("fwd"),
    )


def test_empty_file_reports_missing_init_and_safety():
    msgs = [d.message for d in diagnostics("")]
    assert any("init" in m for m in msgs)
    assert any("safety" in m for m in msgs)


def test_paxos_declarations():
    spec = parse_file(CORPUS / "paxos.fbp")
    p = spec.problem()
    assert p.vocab.sorts == ("node", "value", "quorum", "round")
    intersection = parse_formula(
        "forall q1:quorum, q2:quorum. exists n:node. member(n, q1) & member(n, q2)", p.vocab
    )
    assert intersection in p.axioms
    assert set(spec.proofs) == {"fb", "fbp"}
    fp = spec.proofs["fbp"].steps[0]
    assert isinstance(fp, ProphecyStep) and fp.select == parse_formula("decision(r1, v1)", p.vocab)


def test_unicode_and_ascii_spellings_agree():
    ascii_src = (CORPUS / "teams.fbp").read_text()
    uni_src = (
        ascii_src.replace("forall", "∀")
        .replace("exists", "∃")
        .replace(" & ", " ∧ ")
        .replace(" | ", " ∨ ")
        .replace("!", "¬")
    )
    assert uni_src != ascii_src
    assert parse(uni_src) == parse(ascii_src)
    v = parse(ascii_src).vocab
    assert parse_formula("∀x:team. p1(x) → p2(x) ↔ ⊤", v) == parse_formula("forall x:team. p1(x) -> p2(x) <-> true", v)


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_round_trip_on_corpus(name):
    spec = parse_file(CORPUS / name)
    text = format_spec(spec)
    again = parse(text)
    assert again == spec
    assert format_spec(again) == text


@settings(max_examples=150, deadline=None)
@given(fo_formulas(two_state=True, depth=4, free=FO_VAR_NAMES))
def test_formula_printing_reparses(f):
    scope = [elem(n) for n in FO_VAR_NAMES]
    assert parse_formula(format_formula(f), FO_VOCAB, True, scope) == f


def test_diagnostics_carry_positions():
    text = "mutable relation a\ninit a &\nsafety !a\n"
    (d,) = diagnostics(text)[:1]
    assert (d.line, d.col) == (3, 1)
    text = "sort s\nmutable relation r(s)\ninit forall x:t. r(x)\nsafety true\n"
    assert "unknown sort" in diagnostics(text)[0].message


def test_sort_and_arity_errors():
    base = "sort s\nsort t\nmutable relation r(s)\nimmutable constant c : t\n"
    assert "sort" in diagnostics(base + "init r(c)\nsafety true\n")[0].message
    assert diagnostics(base + "init r(c, c)\nsafety true\n")
    assert diagnostics(base + "init zz\nsafety true\n")


def test_primes_only_in_transitions():
    (d,) = diagnostics("mutable relation a\ninit a'\nsafety true\n")
    assert (d.line, d.col) == (2, 7)
    assert "primed symbol 'a'" in d.message


def test_prime_on_immutable_symbol_is_dropped():
    spec = parse("immutable relation k\nmutable relation a\ninit a\ntransition t { a' <-> k' }\nsafety true\n")
    (_, t), = spec.problem().transitions
    assert t == parse_formula("a' <-> k", spec.vocab, True)


def test_frame_sugar_is_kept_in_the_syntax_tree():
    spec = parse_file(CORPUS / "teams.fbp")
    tau3 = [i for i in spec.items if isinstance(i, TransitionItem)][2]
    assert isinstance(tau3.body, FrameSugar)
    assert tau3.body.modified == (Rel("d", (tau3.body.binders[0],)),)


def test_duplicate_names_are_rejected():
    assert diagnostics("mutable relation a\nmutable relation a\ninit a\nsafety a\n")
    src = "mutable relation a\ninit a\ntransition t { a' }\ntransition t { a' }\nsafety a\n"
    assert diagnostics(src)
    src = "mutable relation a\ninit a\nsafety a\nproof p { QED fwd }\nproof p { QED fwd }\n"
    assert diagnostics(src)


def test_comments_and_semicolons():
    src = "# c\nmutable relation a ; init !a  # trailing\ntransition t { a' <-> a };\nsafety !a\n"
    spec = parse(src)
    assert spec.vocab.relations == (RelDecl("a", (), True),)


def test_empty_proof_block_parses_to_no_steps():
    spec = parse("mutable relation a\ninit !a\nsafety !a\nproof { }\n")
    assert spec.proofs["main"].steps == ()


def test_tokenizer_positions():
    toks = tokenize("init  a\n  & b")
    assert [(t.text, t.line, t.col) for t in toks[:4]] == [("init", 1, 1), ("a", 1, 7), ("&", 2, 3), ("b", 2, 5)]
