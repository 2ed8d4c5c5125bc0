import pytest
from hypothesis import given, settings, strategies as st

from finsat.enumeration import enumerate_sentences, sentence_text
from finsat.errors import ArityError, FormulaSyntaxError, UnknownSymbolError, VocabularyError
from finsat.syntax import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Vocabulary,
    free_vars,
    is_sentence,
    mk_power,
    parse,
    size,
    symbols,
    to_text,
)

V = Vocabulary(("P", "Q"), ("R", "<"))
VARS = ("x", "y", "z", "u1")

leaves = st.one_of(
    st.just(TRUE),
    st.just(FALSE),
    st.builds(lambda r, a: Atom(r, (a,)), st.sampled_from(["P", "Q"]), st.sampled_from(VARS)),
    st.builds(lambda r, a, b: Atom(r, (a, b)), st.sampled_from(["R", "<"]), st.sampled_from(VARS), st.sampled_from(VARS)),
    st.builds(Eq, st.sampled_from(VARS), st.sampled_from(VARS)),
)


def _extend(children):
    return st.one_of(
        st.builds(Not, children),
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Implies, children, children),
        st.builds(Exists, st.sampled_from(VARS), children),
        st.builds(Forall, st.sampled_from(VARS), children),
    )


formulas = st.recursive(leaves, _extend, max_leaves=24)


def depth(f):
    if isinstance(f, Not):
        return 1 + depth(f.child)
    if isinstance(f, (And, Or, Implies)):
        return 1 + max(depth(f.left), depth(f.right))
    if isinstance(f, (Exists, Forall)):
        return 1 + depth(f.body)
    return 0


@settings(max_examples=400, deadline=None)
@given(formulas)
def test_print_parse_round_trip(f):
    if depth(f) > 6:
        return
    text = to_text(f)
    assert parse(text, V) == f
    assert to_text(parse(text)) == text


@pytest.mark.parametrize(
    "text, expected",
    [
        ("P(x) & Q(x) | R(x, y)", Or(And(Atom("P", ("x",)), Atom("Q", ("x",))), Atom("R", ("x", "y")))),
        ("!P(x) & Q(x)", And(Not(Atom("P", ("x",))), Atom("Q", ("x",)))),
        ("P(x) -> Q(x) -> P(y)", Implies(Atom("P", ("x",)), Implies(Atom("Q", ("x",)), Atom("P", ("y",))))),
        ("P(x) & Q(x) & P(y)", And(And(Atom("P", ("x",)), Atom("Q", ("x",))), Atom("P", ("y",)))),
        ("exists x. P(x) & Q(x)", Exists("x", And(Atom("P", ("x",)), Atom("Q", ("x",))))),
        ("(exists x. P(x)) & Q(y)", And(Exists("x", Atom("P", ("x",))), Atom("Q", ("y",)))),
        ("x < y", Atom("<", ("x", "y"))),
        ("x <' y", Atom("<'", ("x", "y"))),
        ("x = y", Eq("x", "y")),
        ("  true  ", TRUE),
        ("forall x. forall y. R(x, y) | x = y", Forall("x", Forall("y", Or(Atom("R", ("x", "y")), Eq("x", "y"))))),
    ],
)
def test_parse_examples(text, expected):
    assert parse(text) == expected


def test_printer_is_minimal():
    assert to_text(parse("((P(x)) & (Q(x)))")) == "P(x) & Q(x)"
    assert to_text(parse("P(x) & (Q(x) | P(y))")) == "P(x) & (Q(x) | P(y))"
    assert to_text(parse("(P(x) -> Q(x)) -> P(y)")) == "(P(x) -> Q(x)) -> P(y)"
    assert to_text(parse("!(exists x. P(x))")) == "!(exists x. P(x))"
    assert to_text(parse("P(x) & (Q(x) & P(y))")) == "P(x) & (Q(x) & P(y))"


@pytest.mark.parametrize("text", ["P(x", "P(x) &", "exists . P(x)", "P(x) Q(x)", "x <", "forall x P(x)", "", "P(x)) "])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text)


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("P(x) &\n  & Q(x)")
    assert info.value.line == 2 and info.value.column == 3


def test_arity_errors():
    with pytest.raises(ArityError):
        parse("P(x) & P(x, y)")
    with pytest.raises(ArityError):
        parse("R(x)", V)
    with pytest.raises(UnknownSymbolError):
        parse("S(x)", V)


def test_vocabulary_validation():
    with pytest.raises(VocabularyError):
        Vocabulary(("P",), ("P",))
    with pytest.raises(VocabularyError):
        Vocabulary(("exists",), ())
    assert Vocabulary.word(["Z", "O"]).is_word_vocabulary()


def test_free_vars_and_symbols():
    f = parse("exists x. R(x, y) & P(z) & Q(x)")
    assert set(free_vars(f)) == {"y", "z"}
    assert not is_sentence(f)
    assert symbols(f) == {"R": 2, "P": 1, "Q": 1}
    assert is_sentence(parse("forall y. forall z. exists x. R(x, y) | P(z)"))


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_mk_power(n):
    phi = parse("exists x. P(x)")
    p = mk_power(phi, n)
    assert size(p) == n * size(phi) + (n - 1)
    g, k = p, 1
    while isinstance(g, And):
        assert g.right == phi
        g, k = g.left, k + 1
    assert g == phi and k == n


def test_mk_power_rejects_zero():
    with pytest.raises(ValueError):
        mk_power(TRUE, 0)


WV = Vocabulary.word(["Z", "O"])


def test_enumeration_head():
    assert sentence_text(WV, 0) == "true"
    assert [sentence_text(WV, i) for i in range(3)] == ["true", "!true", "false"]


def test_enumeration_injective_and_ordered():
    seen = set()
    prev = None
    for i in range(10_000):
        text = sentence_text(WV, i)
        assert text not in seen
        seen.add(text)
        key = (len(text), text)
        assert prev is None or prev < key
        prev = key


def test_enumerated_formulas_round_trip():
    for i in range(1000):
        f = enumerate_sentences(WV, i)
        assert is_sentence(f)
        assert parse(to_text(f), WV) == f
