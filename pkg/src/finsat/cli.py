"""Command-line entry point.

Every command prints a plain-text report ending in ``RESULT: <token>`` and
exits with 0 (positive answer), 1 (negative answer), 2 (usage or input
error) or 3 (a resource limit was hit).
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .automata import formula_to_nfa, word_equiv, word_sat
from .errors import FinsatError, ResourceError
from .fragments import (
    FRAGMENTS,
    counterexample_finite_sat,
    get_fragment,
    hardness_instance,
    translate_over_words,
)
from .reduction import (
    WORD_VOCABULARY,
    Halted,
    decode_run,
    grid_vocabulary,
    min_grid_size,
    parse_tm,
    reduce_pair,
    simulate,
)
from .solver import find_model, find_model_up_to
from .structures import (
    holds,
    is_word,
    restrict_vocabulary,
    structure_from_text,
    word_to_structure,
)
from .syntax import Vocabulary, free_vars, parse, to_text, vocabulary_of

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

RESULT_TOKENS = (
    "OK",
    "SENTENCE",
    "OPEN",
    "TRUE",
    "FALSE",
    "SAT",
    "UNSAT",
    "EQUIVALENT",
    "DISTINCT",
    "HALTED",
    "RUNNING",
    "MODEL",
    "NO-MODEL",
    "NO-MODEL-UP-TO",
    "FOUND",
    "EXHAUSTED",
    "NOT-IN-FRAGMENT",
    "AGREE",
    "MISMATCH",
    "RESOURCE-EXHAUSTED",
    "ERROR",
)


class _Usage(Exception):
    pass


class _Report:
    def __init__(self, out):
        self.out = out

    def line(self, text=""):
        self.out.write(text + "\n")

    def block(self, text):
        for ln in text.rstrip("\n").splitlines():
            self.line(ln)

    def result(self, token, code):
        assert token.split()[0] in RESULT_TOKENS, token
        self.line(f"RESULT: {token}")
        return code


def _letters(args):
    if not args.letters:
        return None
    letters = tuple(x.strip() for x in args.letters.split(",") if x.strip())
    if not letters:
        raise _Usage("--letters needs at least one letter")
    return letters


def _formula_texts(args):
    texts = list(args.formula or [])
    if args.file:
        texts.append(Path(args.file).read_text())
    return texts


def _one_formula(args):
    texts = _formula_texts(args)
    if len(texts) != 1:
        raise _Usage("give exactly one formula with --formula or --file")
    letters = _letters(args)
    vocab = Vocabulary.word(letters) if letters else None
    return parse(texts[0], vocab), letters


def _sentence(f):
    fv = free_vars(f)
    if fv:
        raise _Usage(f"expected a sentence; free variables: {', '.join(fv)}")
    return f


def _machine(path):
    p = Path(path)
    if not p.is_file():
        bundled = resources.files("finsat") / "machines" / p.name
        if not bundled.is_file():
            raise _Usage(f"no machine file {path}")
        return parse_tm(bundled.read_text()), p.name
    return parse_tm(p.read_text()), p.name


def _word_text(word):
    return " ".join(word)


def cmd_check(args, rep):
    f, _ = _one_formula(args)
    rep.line(f"formula: {to_text(f)}")
    rep.line(f"vocabulary: {vocabulary_of(f)}")
    fv = free_vars(f)
    rep.line("free variables: " + (", ".join(fv) if fv else "none"))
    if fv:
        return rep.result("OPEN", EXIT_NO)
    return rep.result("SENTENCE", EXIT_OK)


def cmd_print(args, rep):
    f, _ = _one_formula(args)
    text = to_text(f)
    rep.line(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return rep.result("OK", EXIT_OK)


def cmd_eval(args, rep):
    f, letters = _one_formula(args)
    _sentence(f)
    if args.structure:
        s = structure_from_text(Path(args.structure).read_text())
    elif args.word is not None:
        word = tuple(x.strip() for x in args.word.split(",") if x.strip())
        s = word_to_structure(word, Vocabulary.word(letters or sorted(set(word))))
    else:
        raise _Usage("eval needs --structure FILE or --word LETTERS")
    rep.line(f"formula: {to_text(f)}")
    rep.line(f"structure size: {s.size}")
    if holds(f, s):
        return rep.result("TRUE", EXIT_OK)
    return rep.result("FALSE", EXIT_NO)


def cmd_word_sat(args, rep):
    f, letters = _one_formula(args)
    if not letters:
        raise _Usage("word-sat needs --letters")
    _sentence(f)
    rep.line(f"formula: {to_text(f)}")
    rep.line(f"letters: {', '.join(letters)}")
    if args.out:
        Path(args.out).write_text(formula_to_nfa(f, (), letters).dump())
    w = word_sat(f, letters)
    if w is None:
        rep.line("no word satisfies the sentence")
        return rep.result("UNSAT", EXIT_NO)
    rep.line(f"witness: {_word_text(w)}")
    return rep.result("SAT", EXIT_OK)


def cmd_word_equiv(args, rep):
    texts = _formula_texts(args)
    if len(texts) != 2:
        raise _Usage("word-equiv needs two formulas (--formula A --formula B)")
    letters = _letters(args)
    if not letters:
        raise _Usage("word-equiv needs --letters")
    vocab = Vocabulary.word(letters)
    a, b = (_sentence(parse(t, vocab)) for t in texts)
    rep.line(f"first:  {to_text(a)}")
    rep.line(f"second: {to_text(b)}")
    rep.line(f"letters: {', '.join(letters)}")
    w = word_equiv(a, b, letters)
    if w is None:
        return rep.result("EQUIVALENT", EXIT_OK)
    rep.line(f"distinguishing word: {_word_text(w)}")
    return rep.result("DISTINCT", EXIT_NO)


def cmd_simulate(args, rep):
    m, name = _machine(args.tm)
    run = simulate(m, args.input, args.max_steps)
    rep.line(f"machine: {name}")
    rep.line(f"input: {args.input or '(empty)'}")
    if isinstance(run, Halted):
        rep.block(run.trace.render())
        return rep.result(f"HALTED steps={run.steps} cells={run.cells_used}", EXIT_OK)
    rep.line(f"still running after {run.steps} steps")
    return rep.result("RUNNING", EXIT_NO)


def cmd_reduce(args, rep):
    m, name = _machine(args.tm)
    s = reduce_pair(m, args.input)
    vocab = grid_vocabulary(m)
    rep.line(f"machine: {name}")
    rep.line(f"input: {args.input or '(empty)'}")
    rep.line(f"vocabulary: {vocab}")
    if args.out:
        Path(args.out).write_text(to_text(s) + "\n")
    if args.find_up_to is None:
        rep.line(to_text(s))
        return rep.result("SENTENCE", EXIT_OK)
    found = find_model_up_to(s, args.find_up_to, vocab=vocab, fix_order="<", conflict_budget=args.budget)
    if found is None:
        return rep.result(f"NO-MODEL-UP-TO {args.find_up_to}", EXIT_NO)
    n, model = found
    rep.block(decode_run(model, m).render())
    return rep.result(f"MODEL {n}", EXIT_OK)


def cmd_find_model(args, rep):
    f, letters = _one_formula(args)
    _sentence(f)
    vocab = Vocabulary.word(letters) if letters else vocabulary_of(f)
    fix = "<" if args.fix_order else None
    rep.line(f"formula: {to_text(f)}")
    if args.size is not None:
        model = find_model(f, args.size, vocab=vocab, fix_order=fix, conflict_budget=args.budget)
        if model is None:
            return rep.result(f"NO-MODEL {args.size}", EXIT_NO)
        n = args.size
    elif args.find_up_to is not None:
        found = find_model_up_to(f, args.find_up_to, vocab=vocab, fix_order=fix, conflict_budget=args.budget)
        if found is None:
            return rep.result(f"NO-MODEL-UP-TO {args.find_up_to}", EXIT_NO)
        n, model = found
    else:
        raise _Usage("find-model needs --size N or --find-up-to N")
    rep.block(model.to_text())
    if args.out:
        Path(args.out).write_text(model.to_text())
    return rep.result(f"MODEL {n}", EXIT_OK)


def cmd_translate(args, rep):
    f, letters = _one_formula(args)
    _sentence(f)
    letters = letters or ("E", "O", "Z")
    frag = get_fragment(args.fragment)
    rep.line(f"fragment: {frag.name}")
    rep.line(f"formula: {to_text(f)}")
    if args.tm:
        m, name = _machine(args.tm)
        rep.line(f"machine: {name}")
        out = hardness_instance(frag, m, args.input, args.budget)
    else:
        out = translate_over_words(frag, f, args.budget, letters)
    if out is None:
        rep.line(f"no equivalent member among the first {args.budget} sentences")
        return rep.result("EXHAUSTED", EXIT_RESOURCE)
    rep.line(f"translation: {to_text(out)}")
    if args.out:
        Path(args.out).write_text(to_text(out) + "\n")
    return rep.result("FOUND", EXIT_OK)


def cmd_fragment_sat(args, rep):
    f, _ = _one_formula(args)
    _sentence(f)
    if args.fragment not in (None, "counterexample"):
        raise _Usage("fragment-sat decides the counterexample fragment only")
    bound = args.size if args.size is not None else 4
    verdict = counterexample_finite_sat(f, bound)
    rep.line(f"formula: {to_text(f)}")
    if verdict.verdict == "not-in-fragment":
        return rep.result("NOT-IN-FRAGMENT", EXIT_NO)
    if verdict.verdict == "unsatisfiable":
        return rep.result("UNSAT", EXIT_NO)
    rep.line(f"power: {verdict.power}")
    rep.block(verdict.model.to_text())
    return rep.result(f"SAT {verdict.power}", EXIT_OK)


def cmd_demo_halting(args, rep):
    m, name = _machine(args.tm)
    max_size = args.find_up_to if args.find_up_to is not None else 4
    rep.line(f"machine: {name}")
    rep.line(f"input: {args.input or '(empty)'}")
    run = simulate(m, args.input, args.max_steps)
    if isinstance(run, Halted):
        needed = min_grid_size(m, args.input, args.max_steps)
        rep.line(f"oracle: HALTED after {run.steps} steps using {run.cells_used} cells; grid size needed {needed}")
    else:
        needed = None
        rep.line(f"oracle: RUNNING after {run.steps} steps")
    vocab = grid_vocabulary(m)
    found = find_model_up_to(reduce_pair(m, args.input), max_size, vocab=vocab, fix_order="<", conflict_budget=args.budget)
    if found is None:
        rep.line(f"solver: no model up to size {max_size}")
        if needed is None:
            return rep.result("AGREE", EXIT_OK)
        if needed > max_size:
            rep.line(f"note: the halting run needs a grid of size {needed}")
            return rep.result(f"NO-MODEL-UP-TO {max_size}", EXIT_NO)
        return rep.result("MISMATCH", EXIT_NO)
    n, model = found
    rep.line(f"solver: model of size {n}")
    decoded = decode_run(model, m)
    word_ok = is_word(restrict_vocabulary(model, WORD_VOCABULARY))
    rep.line(f"word restriction is a word: {'yes' if word_ok else 'no'}")
    if needed is None:
        rep.line("oracle did not halt within the step limit but a model exists")
        return rep.result("MISMATCH", EXIT_NO)
    oracle = run.trace.padded(n)
    rep.line("oracle trace:")
    rep.block(oracle.render())
    rep.line("decoded trace:")
    rep.block(decoded.render())
    if decoded == oracle and word_ok and n == needed:
        return rep.result("AGREE", EXIT_OK)
    return rep.result("MISMATCH", EXIT_NO)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finsat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, formula=False, tm=False, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(func=func)
        if formula:
            sp.add_argument("--formula", "-f", action="append", help="formula text (repeatable)")
            sp.add_argument("--file", help="read the formula from a file")
            sp.add_argument("--letters", help="comma-separated word letters, e.g. Z,O")
        if tm:
            sp.add_argument("--tm", required=True, help="machine file (bundled names also work)")
            sp.add_argument("--input", default="", help="input bit string")
            sp.add_argument("--max-steps", type=int, default=1000)
        sp.add_argument("--out", help="write the main artifact to this file")
        return sp

    add("check", cmd_check, formula=True, help="parse and report free variables")
    add("print", cmd_print, formula=True, help="print in canonical form")
    sp = add("eval", cmd_eval, formula=True, help="model-check a sentence")
    sp.add_argument("--structure", help="structure file")
    sp.add_argument("--word", help="comma-separated letters of a word")
    add("word-sat", cmd_word_sat, formula=True, help="satisfiability over words")
    add("word-equiv", cmd_word_equiv, formula=True, help="equivalence over words")
    add("simulate", cmd_simulate, tm=True, help="run a Turing machine")
    sp = add("reduce", cmd_reduce, tm=True, help="build the halting sentence")
    sp.add_argument("--find-up-to", type=int)
    sp.add_argument("--budget", type=int, help="solver conflict budget")
    sp = add("find-model", cmd_find_model, formula=True, help="bounded model search")
    sp.add_argument("--size", type=int)
    sp.add_argument("--find-up-to", type=int)
    sp.add_argument("--fix-order", action="store_true", help="read '<' as the natural order")
    sp.add_argument("--budget", type=int, help="solver conflict budget")
    sp = add("translate", cmd_translate, formula=True, help="translate into a fragment over words")
    sp.add_argument("--fragment", default="full-fo", choices=sorted(FRAGMENTS))
    sp.add_argument("--budget", type=int, default=10_000)
    sp.add_argument("--tm", help="also build the hardness instance for this machine")
    sp.add_argument("--input", default="")
    sp = add("fragment-sat", cmd_fragment_sat, formula=True, help="decide the counterexample fragment")
    sp.add_argument("--fragment", default="counterexample")
    sp.add_argument("--size", type=int, help="size bound (default 4)")
    sp = add("demo-halting", cmd_demo_halting, tm=True, help="oracle vs reduction side by side")
    sp.add_argument("--find-up-to", type=int)
    sp.add_argument("--budget", type=int, help="solver conflict budget")
    return p


def dispatch(argv, out=None) -> int:
    out = out or sys.stdout
    rep = _Report(out)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args, rep)
    except _Usage as e:
        rep.line(f"usage error: {e}")
        return rep.result("ERROR", EXIT_USAGE)
    except ResourceError as e:
        rep.line(f"resource limit: {e}")
        return rep.result("RESOURCE-EXHAUSTED", EXIT_RESOURCE)
    except (FinsatError, OSError) as e:
        rep.line(f"error: {e}")
        return rep.result("ERROR", EXIT_USAGE)


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
