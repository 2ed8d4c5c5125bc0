"""Enumeration of all sentences over a finite vocabulary.

Sentences are listed by the length of their printed form, ties broken by the
lexicographic order of that text.  Every sentence has exactly one printed
form, so the enumeration is a bijection between the naturals and sentences.

The generator works on printed length directly: for every length it builds
the formulas whose rendering has exactly that many characters, keeping track
of which variables are in scope so that open formulas are never produced at
the top level.
"""

from __future__ import annotations

import itertools
import string
import threading
from functools import lru_cache

from .syntax import (
    FALSE,
    INFIX_RELATIONS,
    KEYWORDS,
    TRUE,
    WRAP,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Vocabulary,
)

_FIRST = string.ascii_lowercase
_REST = string.ascii_lowercase + string.digits + "_"

# shortest formulas are 4 characters ("true", "P(x)")
_MIN_LEN = 4
# "forall " + VAR + ". " + body
_QUANT_OVERHEAD = 9


@lru_cache(maxsize=None)
def _var_names(length):
    names = []
    for first in _FIRST:
        for rest in itertools.product(_REST, repeat=length - 1):
            name = first + "".join(rest)
            if name not in KEYWORDS:
                names.append(name)
    return tuple(names)


class SentenceEnumerator:
    """Lazily extended, cached enumeration for one vocabulary."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.sentences: list = []
        self.texts: list = []
        self.next_length = 0
        self._memo: dict = {}
        self._lock = threading.Lock()
        self._prefix = [r for r in vocab.binary if r not in INFIX_RELATIONS]
        self._infix = [r for r in vocab.binary if r in INFIX_RELATIONS] + ["="]

    def __getitem__(self, index: int) -> Formula:
        if index < 0:
            raise IndexError(index)
        with self._lock:
            while len(self.sentences) <= index:
                self._extend()
            return self.sentences[index]

    def text(self, index: int) -> str:
        self[index]
        return self.texts[index]

    def _extend(self):
        n = self.next_length
        found = []
        for items in self._items(n, frozenset()).values():
            found.extend(items)
        found.sort(key=lambda item: item[0])
        self.texts.extend(t for t, _ in found)
        self.sentences.extend(f for _, f in found)
        self.next_length = n + 1

    def _items(self, n, scope):
        key = (n, scope)
        got = self._memo.get(key)
        if got is None:
            got = self._build(n, scope) if n >= _MIN_LEN else {}
            self._memo[key] = got
        return got

    def _operands(self, n, scope, position):
        out = []
        wrap = WRAP[position]
        for k, items in self._items(n, scope).items():
            if k not in wrap:
                out.extend(items)
        if wrap:
            for k, items in self._items(n - 2, scope).items():
                if k in wrap:
                    out.extend(("(" + t + ")", f) for t, f in items)
        return out

    def _build(self, n, scope):
        out = {}
        if n == 4:
            out["const"] = [("true", TRUE)]
        elif n == 5:
            out["const"] = [("false", FALSE)]

        patoms = []
        for p in self.vocab.unary:
            for v in scope:
                if len(p) + len(v) + 2 == n:
                    patoms.append((f"{p}({v})", Atom(p, (v,))))
        for r in self._prefix:
            for v in scope:
                for w in scope:
                    if len(r) + len(v) + len(w) + 4 == n:
                        patoms.append((f"{r}({v}, {w})", Atom(r, (v, w))))
        if patoms:
            out["patom"] = patoms

        iatoms = []
        for op in self._infix:
            for v in scope:
                for w in scope:
                    if len(v) + len(w) + len(op) + 2 == n:
                        f = Eq(v, w) if op == "=" else Atom(op, (v, w))
                        iatoms.append((f"{v} {op} {w}", f))
        if iatoms:
            out["iatom"] = iatoms

        negs = [("!" + t, Not(f)) for t, f in self._operands(n - 1, scope, "not")]
        if negs:
            out["not"] = negs

        for name, node, sep, lpos, rpos in (
            ("and", And, " & ", "and_l", "and_r"),
            ("or", Or, " | ", "or_l", "or_r"),
            ("imp", Implies, " -> ", "imp_l", "top"),
        ):
            items = []
            for ln in range(_MIN_LEN, n - len(sep) - _MIN_LEN + 1):
                rn = n - len(sep) - ln
                lefts = self._operands(ln, scope, lpos)
                if not lefts:
                    continue
                rights = self._operands(rn, scope, rpos)
                for lt, lf in lefts:
                    for rt, rf in rights:
                        items.append((lt + sep + rt, node(lf, rf)))
            if items:
                out[name] = items

        quants = []
        for k in range(1, n - _QUANT_OVERHEAD - _MIN_LEN + 1):
            body_len = n - _QUANT_OVERHEAD - k
            for v in _var_names(k):
                inner = scope | {v}
                bodies = [item for items in self._items(body_len, inner).values() for item in items]
                for word, node in (("exists", Exists), ("forall", Forall)):
                    for t, f in bodies:
                        quants.append((f"{word} {v}. {t}", node(v, f)))
        if quants:
            out["quant"] = quants
        return out


@lru_cache(maxsize=None)
def _enumerator(vocab: Vocabulary) -> SentenceEnumerator:
    return SentenceEnumerator(vocab)


def enumerate_sentences(vocab: Vocabulary, index: int) -> Formula:
    """The ``index``-th sentence over ``vocab`` (length, then lexicographic order)."""
    return _enumerator(vocab)[index]


def sentence_text(vocab: Vocabulary, index: int) -> str:
    return _enumerator(vocab).text(index)
