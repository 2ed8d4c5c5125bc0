import itertools
from importlib import resources

import pytest

from corpus import GENERAL_CORPUS, atom_index, structure_from_bits
from finsat.automata import word_equiv
from finsat.errors import FragmentError, ResourceError
from finsat.fragments import (
    bundled_cache,
    counterexample_finite_sat,
    counterexample_fragment,
    counterexample_member,
    dump_cache,
    eliminate_implications,
    full_fo,
    get_fragment,
    hardness_instance,
    implication_free,
    load_cache,
    reject_all,
    translate_over_words,
)
from finsat.reduction import (
    build_phi_M,
    build_phi_x,
    grid_vocabulary,
    min_grid_size,
    parse_tm,
    reduce_pair,
)
from finsat.solver import find_model
from finsat.structures import holds
from finsat.syntax import FALSE, TRUE, And, Vocabulary, mk_power, parse

WL = ("Z", "O")
WV = Vocabulary.word(WL)


def machine(name):
    return parse_tm((resources.files("finsat") / "machines" / name).read_text())


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exists x. O(x)", "exists a. O(a)"),
        ("forall x. Z(x)", "forall a. Z(a)"),
        ("forall x. O(x) -> O(x)", "true"),
        ("exists x. O(x) & Z(x)", "!true"),
    ],
)
def test_translation_by_enumeration(text, expected):
    s = parse(text, WV)
    psi = translate_over_words(full_fo(), s, 10_000, WL, try_self=False)
    assert psi == parse(expected, WV)
    assert word_equiv(psi, s, WL) is None


def test_translation_of_empty_input():
    psi = translate_over_words(full_fo(), build_phi_x(""), 1000, try_self=False)
    assert psi is not None and word_equiv(psi, build_phi_x(""), ("E", "O", "Z")) is None


def test_translation_prefers_member_input():
    s = build_phi_x("1")
    assert translate_over_words(full_fo(), s, 0) is s
    assert translate_over_words(reject_all(), s, 200) is None


def test_implication_free_translation_is_member():
    frag = implication_free()
    s = parse("forall x. O(x) -> O(x)", WV)
    psi = translate_over_words(frag, s, 100, WL)
    assert frag.member(psi) and word_equiv(psi, s, WL) is None


def test_counterexample_cases():
    assert counterexample_finite_sat(FALSE, 4).verdict == "unsatisfiable"
    phi = parse("exists x. Z(x)")
    got = counterexample_finite_sat(mk_power(phi, 2), 4)
    assert (got.verdict, got.power, got.model.size) == ("satisfiable", 2, 2)
    assert holds(mk_power(phi, 2), got.model)
    assert counterexample_finite_sat(And(TRUE, FALSE), 4).verdict == "not-in-fragment"
    assert counterexample_finite_sat(TRUE, 4).power == 1


def test_counterexample_membership():
    one = parse("forall x. forall y. x = y")
    # phi^2 with phi only true on singletons is not a power of phi, but it is
    # itself satisfiable at size 1
    assert counterexample_member(mk_power(one, 2), 4) == 1
    assert counterexample_member(parse("exists x. P(x) & !P(x)"), 4) is None
    two = parse("exists x. exists y. !(x = y)")
    assert counterexample_member(mk_power(two, 3), 4) == 3
    with pytest.raises(ResourceError):
        counterexample_member(mk_power(two, 6), 4)


def test_counterexample_has_no_conjoin():
    frag = counterexample_fragment()
    assert frag.conjoin is None
    with pytest.raises(FragmentError):
        hardness_instance(frag, machine("write1.tm"), "", 10)


def test_missing_cache_entry():
    with pytest.raises(FragmentError):
        hardness_instance(implication_free(), machine("write1.tm"), "", 10, cache={})


def test_unknown_fragment():
    with pytest.raises(FragmentError):
        get_fragment("two-variable")


@pytest.mark.parametrize("frag", [full_fo(), implication_free()])
def test_conjoin_contract(frag):
    sentences = [parse(t) for t in GENERAL_CORPUS if frag.member(parse(t))]
    pairs = list(itertools.combinations(sentences, 2))[:20]
    assert len(pairs) == 20
    unary, binary = ("P", "Q"), ("R",)
    for a, b in pairs:
        c = frag.conjoin(a, b)
        assert frag.member(c)
        for n in (1, 2):
            idx = atom_index(unary, binary, n)
            for v in range(1 << len(idx)):
                s = structure_from_bits(v, unary, binary, n, idx)
                assert holds(c, s) == (holds(a, s) and holds(b, s))


PIPELINE = [
    ("full-fo", "write1.tm", ""),
    ("full-fo", "scanright.tm", "01"),
    ("full-fo", "loop.tm", ""),
    ("implication-free", "write1.tm", ""),
    ("implication-free", "loop.tm", ""),
    ("implication-free", "busy3.tm", ""),
]


@pytest.mark.parametrize("frag_name, name, x", PIPELINE)
def test_pipeline_equisatisfiable(frag_name, name, x):
    frag = get_fragment(frag_name)
    m = machine(name)
    inst = hardness_instance(frag, m, x, 10_000)
    assert frag.member(inst)
    vocab = grid_vocabulary(m)
    n_star = min_grid_size(m, x, 1000) or 3
    for n in range(1, n_star + 2):
        got = find_model(inst, n, vocab=vocab, fix_order="<") is not None
        want = find_model(reduce_pair(m, x), n, vocab=vocab, fix_order="<") is not None
        assert got == want


def test_pipeline_budget_exhaustion():
    # the input sentence for "01" uses an implication, and no implication-free
    # equivalent appears early in the enumeration
    assert hardness_instance(implication_free(), machine("scanright.tm"), "01", 500) is None


def test_bundled_cache():
    cache = bundled_cache("implication-free")
    frag = implication_free()
    for name in ("write1.tm", "loop.tm", "scanright.tm", "busy3.tm"):
        m = machine(name)
        text = cache[m.digest()]
        phi = parse(text, grid_vocabulary(m))
        assert frag.member(phi)
        assert phi == eliminate_implications(build_phi_M(m))


def test_cache_text_round_trip():
    entries = {"ab": "true", "cd": "forall x. P(x)"}
    assert load_cache(dump_cache(entries)) == entries
    with pytest.raises(FragmentError):
        load_cache("no tab here\n")
