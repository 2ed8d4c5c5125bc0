import random
from importlib import resources

import pytest

from corpus import all_words
from finsat.errors import MachineError, NotAModelError
from finsat.reduction import (
    WORD_VOCABULARY,
    Halted,
    Running,
    build_phi_M,
    build_phi_x,
    decode_run,
    grid_vocabulary,
    min_grid_size,
    parse_tm,
    phi_m_parts,
    reduce_pair,
    simulate,
)
from finsat.solver import find_model
from finsat.structures import Structure, holds, is_word, restrict_vocabulary, word_to_structure
from finsat.syntax import is_sentence, parse, to_text


def machine(name):
    return parse_tm((resources.files("finsat") / "machines" / name).read_text())


IMAGE = {"0": "Z", "1": "O"}


@pytest.mark.parametrize("x", ["", "0", "1", "01", "110"])
def test_phi_x_characterization(x):
    f = build_phi_x(x)
    assert is_sentence(f)
    image = tuple(IMAGE[b] for b in x)
    for w in all_words(("Z", "O", "E"), 5):
        expected = len(w) >= len(image) and w[: len(image)] == image and set(w[len(image) :]) <= {"E"}
        assert holds(f, word_to_structure(w, WORD_VOCABULARY)) == expected, w


@pytest.mark.parametrize(
    "name, x, steps, cells",
    [("write1.tm", "", 1, 1), ("scanright.tm", "01", 3, 3), ("busy3.tm", "", 5, 2)],
)
def test_simulate_halts(name, x, steps, cells):
    run = simulate(machine(name), x, 1000)
    assert isinstance(run, Halted)
    assert (run.steps, run.cells_used) == (steps, cells)
    assert len(run.trace) == steps + 1
    assert run.trace.configs[-1].state in machine(name).halting
    assert min_grid_size(machine(name), x) == max(steps + 1, cells)


def test_simulate_loop():
    run = simulate(machine("loop.tm"), "", 500)
    assert run == Running(500)
    assert min_grid_size(machine("loop.tm"), "", 500) is None


def test_left_edge():
    m = parse_tm("states: a h\nstart: a\nhalt: h\ntrans: a 0 -> h 0 S\ntrans: a 1 -> h 1 S\ntrans: a _ -> a _ L\n")
    assert simulate(m, "", 10) == Running(10)
    s = reduce_pair(m, "")
    for n in (1, 2, 3):
        assert find_model(s, n, vocab=grid_vocabulary(m)) is None


@pytest.mark.parametrize("name, x", [("write1.tm", ""), ("scanright.tm", "01"), ("busy3.tm", "")])
def test_reduction_models_decode_to_run(name, x):
    m = machine(name)
    oracle = simulate(m, x, 1000)
    n_star = min_grid_size(m, x)
    s = reduce_pair(m, x)
    vocab = grid_vocabulary(m)
    assert find_model(s, n_star - 1, vocab=vocab, fix_order="<") is None
    for n in (n_star, n_star + 1):
        model = find_model(s, n, vocab=vocab, fix_order="<")
        assert model is not None
        assert decode_run(model, m) == oracle.trace.padded(n)
        assert is_word(restrict_vocabulary(model, WORD_VOCABULARY))


def test_decoding_is_invariant_under_relabelling():
    m = machine("scanright.tm")
    model = find_model(reduce_pair(m, "01"), 4, vocab=grid_vocabulary(m), fix_order="<")
    rng = random.Random(1)
    for _ in range(5):
        perm = list(range(4))
        rng.shuffle(perm)
        t = model.permute(perm)
        assert holds(reduce_pair(m, "01"), t)
        assert decode_run(t, m) == decode_run(model, m)


def test_unfixed_order_search():
    # without reading < as the natural order the solver has to find the order itself
    m = machine("write1.tm")
    s = reduce_pair(m, "")
    assert find_model(s, 1) is None
    model = find_model(s, 2, vocab=grid_vocabulary(m))
    assert model is not None
    assert decode_run(model, m) == simulate(m, "", 10).trace.padded(2)


def test_loop_has_no_small_model():
    m = machine("loop.tm")
    s = reduce_pair(m, "")
    for n in range(1, 5):
        assert find_model(s, n, vocab=grid_vocabulary(m), fix_order="<") is None
    assert find_model(s, 3, vocab=grid_vocabulary(m)) is None


def test_not_a_model():
    m = machine("write1.tm")
    vocab = grid_vocabulary(m)
    junk = Structure(2, {p: set() for p in vocab.unary}, {r: set() for r in vocab.binary})
    with pytest.raises(NotAModelError):
        decode_run(junk, m)


def test_phi_m_parts():
    m = machine("busy3.tm")
    parts = phi_m_parts(m)
    assert list(parts)[0] == "word"
    assert all(is_sentence(p) for p in parts.values())
    assert is_sentence(build_phi_M(m))
    # the sentence only uses the grid vocabulary and reparses to itself
    assert parse(to_text(build_phi_M(m)), grid_vocabulary(m)) == build_phi_M(m)


def test_machine_text_round_trip():
    for name in ("write1.tm", "loop.tm", "scanright.tm", "busy3.tm"):
        m = machine(name)
        assert parse_tm(m.to_text()) == m
        assert parse_tm(m.to_text()).digest() == m.digest()


@pytest.mark.parametrize(
    "text",
    [
        "states: a h\nstart: b\nhalt: h\n",
        "states: a h\nstart: a\nhalt: h\ntrans: a 0 -> h 0 S\n",
        "states: a h\nstart: a\nhalt: h\ntrans: a 0 -> h 2 S\ntrans: a 1 -> h 1 S\ntrans: a _ -> h _ S\n",
        "states: a h\nstart: a\nhalt: h\ntrans: a 0 -> h 0 X\ntrans: a 1 -> h 1 S\ntrans: a _ -> h _ S\n",
        "states: a h\nstart: a\nhalt: h\ntrans: a 0 -> h 0 S\ntrans: a 0 -> h 1 S\n",
        "states: a h\nstart: a\n",
        "nonsense\n",
    ],
)
def test_parse_tm_errors(text):
    with pytest.raises(MachineError):
        parse_tm(text)


def test_input_must_be_bits():
    with pytest.raises(ValueError):
        build_phi_x("012")
