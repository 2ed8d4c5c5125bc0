import itertools

import pytest

from corpus import WORD_CORPUS, all_words
from finsat.automata import (
    LayeredAlphabet,
    cylindrify,
    determinize,
    determinize_complement,
    encode_word,
    formula_to_nfa,
    is_empty_with_witness,
    product_intersect,
    project_exists,
    union,
    valid_tracks,
    word_equiv,
    word_sat,
)
from finsat.errors import ResourceError, VocabularyError
from finsat.structures import evaluate, holds, word_to_structure
from finsat.syntax import Vocabulary, parse

LETTERS = ("Z", "O")
WV = Vocabulary.word(LETTERS)
CORPUS = [parse(t, WV) for t in WORD_CORPUS]
WORDS = list(all_words(LETTERS, 6))


def test_word_count():
    assert len(WORDS) == 126


@pytest.mark.parametrize("i", range(len(CORPUS)))
def test_membership_matches_eval(i):
    f = CORPUS[i]
    a = formula_to_nfa(f, (), LETTERS)
    for w in WORDS:
        assert a.accepts(encode_word(a.alphabet, w)) == holds(f, word_to_structure(w, WV)), w


OPEN = [
    "x < y",
    "x = y",
    "O(x) & !(x = y)",
    "exists z. x < z & z < y",
    "forall z. z < x -> Z(z)",
    "!(x < y) & O(y)",
]


@pytest.mark.parametrize("text", OPEN)
def test_open_formulas_match_eval(text):
    f = parse(text, WV)
    tracks = ("x", "y")
    a = formula_to_nfa(f, tracks, LETTERS)
    for w in all_words(LETTERS, 4):
        s = word_to_structure(w, WV)
        for px, py in itertools.product(range(len(w)), repeat=2):
            letters = encode_word(a.alphabet, w, {"x": px, "y": py})
            assert a.accepts(letters) == evaluate(f, s, {"x": px, "y": py})


def all_sequences(alphabet, max_len):
    for k in range(max_len + 1):
        yield from itertools.product(alphabet.letters, repeat=k)


def test_complement_product_union():
    alph = LayeredAlphabet(LETTERS, ("x",))
    a = formula_to_nfa(parse("O(x)", WV), ("x",), LETTERS)
    b = formula_to_nfa(parse("exists y. y < x", WV), ("x",), LETTERS)
    comp = determinize_complement(a)
    both, either = product_intersect(a, b), union(a, b)
    assert comp.is_deterministic()
    for seq in all_sequences(alph, 4):
        assert comp.accepts(seq) != a.accepts(seq)
        assert both.accepts(seq) == (a.accepts(seq) and b.accepts(seq))
        assert either.accepts(seq) == (a.accepts(seq) or b.accepts(seq))


def test_projection_and_cylindrification():
    body = parse("O(x) & exists y. x < y", WV)
    a = formula_to_nfa(body, ("x",), LETTERS)
    p = project_exists(a, "x")
    direct = formula_to_nfa(parse("exists x. O(x) & exists y. x < y", WV), (), LETTERS)
    for w in WORDS:
        seq = encode_word(p.alphabet, w)
        assert p.accepts(seq) == direct.accepts(seq)
    c = cylindrify(a, ("z", "x"))
    for w in all_words(LETTERS, 3):
        for px, pz in itertools.product(range(len(w)), repeat=2):
            seq = encode_word(c.alphabet, w, {"x": px, "z": pz})
            assert c.accepts(seq) == a.accepts(encode_word(a.alphabet, w, {"x": px}))


def test_valid_tracks():
    alph = LayeredAlphabet(LETTERS, ("x", "y"))
    v = valid_tracks(alph)
    for seq in all_sequences(alph, 3):
        counts = [sum(1 for a in seq if a & alph.bit(t)) for t in alph.tracks]
        assert v.accepts(seq) == (counts == [1, 1])


@pytest.mark.parametrize("i", range(len(CORPUS)))
def test_witness_is_shortest(i):
    f = CORPUS[i]
    w = word_sat(f, LETTERS)
    sat = [u for u in WORDS if holds(f, word_to_structure(u, WV))]
    if w is None:
        assert not sat
    else:
        assert holds(f, word_to_structure(w, WV))
        assert len(w) == min(len(u) for u in sat)


def test_witness_min_length():
    a = formula_to_nfa(parse("true", WV), (), LETTERS)
    assert is_empty_with_witness(a) == ()
    assert len(is_empty_with_witness(a, min_length=1)) == 1
    assert word_sat(parse("exists x. O(x)", WV), LETTERS) == ("O",)


def test_word_equiv():
    f = parse("exists x. O(x)", WV)
    assert word_equiv(f, f, LETTERS) is None
    assert word_equiv(f, parse("!(forall x. Z(x))", WV), LETTERS) is None
    w = word_equiv(f, parse("forall x. O(x)", WV), LETTERS)
    assert w is not None and len(w) == 2
    s = word_to_structure(w, WV)
    assert holds(f, s) != holds(parse("forall x. O(x)", WV), s)


def test_state_cap():
    f = parse("forall x. exists y. x < y & O(y) & forall z. !(x < z & z < y)", WV)
    with pytest.raises(ResourceError):
        formula_to_nfa(f, (), LETTERS, state_cap=2)


def test_determinize_cap_raises():
    a = formula_to_nfa(parse("exists x. O(x) & exists y. x < y & Z(y)", WV), (), LETTERS)
    with pytest.raises(ResourceError):
        determinize(a, state_cap=1)


def test_rejects_non_word_symbols():
    with pytest.raises(VocabularyError):
        formula_to_nfa(parse("exists x. P(x)"), (), LETTERS)
    with pytest.raises(VocabularyError):
        formula_to_nfa(parse("exists x. R(x, x)"), (), LETTERS)


def test_dump_format():
    a = formula_to_nfa(parse("exists x. O(x)", WV), (), LETTERS)
    text = a.dump()
    assert text.startswith(f"states {a.n_states}\ninitial: ")
    assert "--(O|)-->" in text
