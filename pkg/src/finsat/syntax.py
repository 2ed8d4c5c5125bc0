"""First-order syntax over a finite relational vocabulary.

Formulas are immutable trees of the node classes below.  The concrete syntax is::

    formula := ("forall" | "exists") VAR "." formula | impl
    impl    := disj [ "->" formula ]
    disj    := conj { "|" conj }
    conj    := neg { "&" neg }
    neg     := "!" neg | atom
    atom    := "true" | "false" | "(" formula ")" | REL "(" VAR {"," VAR} ")"
             | VAR "<" VAR | VAR "<'" VAR | VAR "=" VAR | quantified formula

Quantifier scope extends as far right as possible.  ``<`` and ``<'`` are the
only infix relation symbols; every other relation is written in prefix form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import ArityError, FormulaSyntaxError, UnknownSymbolError, VocabularyError

KEYWORDS = frozenset({"forall", "exists", "true", "false"})
INFIX_RELATIONS = ("<", "<'")

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")
_VAR_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


def is_symbol_name(name: str) -> bool:
    if name in INFIX_RELATIONS:
        return True
    return bool(_NAME_RE.match(name)) and name not in KEYWORDS


def is_variable_name(name: str) -> bool:
    return bool(_VAR_RE.match(name)) and name not in KEYWORDS


@dataclass(frozen=True)
class Vocabulary:
    """Unary and binary relation symbols, kept in sorted order."""

    unary: tuple = ()
    binary: tuple = ()

    def __post_init__(self):
        unary = tuple(sorted(set(self.unary)))
        binary = tuple(sorted(set(self.binary)))
        for name in unary + binary:
            if not isinstance(name, str) or not is_symbol_name(name):
                raise VocabularyError(f"invalid relation symbol name {name!r}")
        for name in unary:
            if name in INFIX_RELATIONS:
                raise VocabularyError(f"{name!r} can only be a binary symbol")
        overlap = set(unary) & set(binary)
        if overlap:
            raise VocabularyError(f"symbols declared both unary and binary: {sorted(overlap)}")
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "binary", binary)

    @classmethod
    def word(cls, letters: Iterable[str]) -> "Vocabulary":
        return cls(unary=tuple(letters), binary=("<",))

    def arity(self, name: str) -> Optional[int]:
        if name in self.unary:
            return 1
        if name in self.binary:
            return 2
        return None

    @property
    def symbols(self) -> tuple:
        return self.unary + self.binary

    def __contains__(self, name) -> bool:
        return name in self.unary or name in self.binary

    def union(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary(self.unary + other.unary, self.binary + other.binary)

    def issubset(self, other: "Vocabulary") -> bool:
        return set(self.unary) <= set(other.unary) and set(self.binary) <= set(other.binary)

    def is_word_vocabulary(self) -> bool:
        return self.binary == ("<",)

    def __str__(self):
        return f"unary {{{', '.join(self.unary)}}} binary {{{', '.join(self.binary)}}}"


# --- abstract syntax -------------------------------------------------------


@dataclass(frozen=True)
class TrueC:
    pass


@dataclass(frozen=True)
class FalseC:
    pass


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[TrueC, FalseC, Atom, Eq, Not, And, Or, Implies, Exists, Forall]
# A sentence is a formula without free variables; the type is the same.
Sentence = Formula

TRUE = TrueC()
FALSE = FalseC()

BINARY_CONNECTIVES = (And, Or, Implies)
QUANTIFIERS = (Exists, Forall)


def atom(rel: str, *args: str) -> Atom:
    return Atom(rel, tuple(args))


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def exists(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def forall(variables: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def free_vars(f: Formula) -> tuple:
    """Free variables of ``f`` in order of first occurrence."""
    seen: dict = {}
    _collect_free(f, frozenset(), seen)
    return tuple(seen)


def _collect_free(f, bound, seen):
    # explicit stack: phi_M-sized formulas get deep on the left spine
    stack = [(f, bound)]
    while stack:
        g, b = stack.pop()
        if isinstance(g, Atom):
            for v in g.args:
                if v not in b:
                    seen.setdefault(v, None)
        elif isinstance(g, Eq):
            for v in (g.left, g.right):
                if v not in b:
                    seen.setdefault(v, None)
        elif isinstance(g, Not):
            stack.append((g.child, b))
        elif isinstance(g, BINARY_CONNECTIVES):
            stack.append((g.right, b))
            stack.append((g.left, b))
        elif isinstance(g, QUANTIFIERS):
            stack.append((g.body, b | {g.var}))


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def symbols(f: Formula) -> dict:
    """Map each relation symbol occurring in ``f`` to its arity."""
    out: dict = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            prev = out.setdefault(g.rel, len(g.args))
            if prev != len(g.args):
                raise ArityError(f"symbol {g.rel!r} used with arities {prev} and {len(g.args)}")
        elif isinstance(g, Not):
            stack.append(g.child)
        elif isinstance(g, BINARY_CONNECTIVES):
            stack.extend((g.left, g.right))
        elif isinstance(g, QUANTIFIERS):
            stack.append(g.body)
    return out


def vocabulary_of(f: Formula) -> Vocabulary:
    syms = symbols(f)
    bad = [name for name, k in syms.items() if k not in (1, 2)]
    if bad:
        raise ArityError(f"only unary and binary symbols are supported, got {bad}")
    return Vocabulary(
        unary=[n for n, k in syms.items() if k == 1],
        binary=[n for n, k in syms.items() if k == 2],
    )


def check_vocabulary(f: Formula, vocab: Vocabulary) -> None:
    for name, k in symbols(f).items():
        have = vocab.arity(name)
        if have is None:
            raise UnknownSymbolError(f"symbol {name!r} is not in the vocabulary")
        if have != k:
            raise ArityError(f"symbol {name!r} has arity {have}, used with {k} arguments")


def mk_power(phi: Formula, n: int) -> Formula:
    """The left-nested ``n``-fold conjunction ``((phi & phi) & ...) & phi``."""
    if n < 1:
        raise ValueError("power must be at least 1")
    return conj(*([phi] * n))


def size(f: Formula) -> int:
    n = 0
    stack = [f]
    while stack:
        g = stack.pop()
        n += 1
        if isinstance(g, Not):
            stack.append(g.child)
        elif isinstance(g, BINARY_CONNECTIVES):
            stack.extend((g.left, g.right))
        elif isinstance(g, QUANTIFIERS):
            stack.append(g.body)
    return n


# --- printing --------------------------------------------------------------


def kind(f: Formula) -> str:
    if isinstance(f, (TrueC, FalseC)):
        return "const"
    if isinstance(f, Atom):
        return "iatom" if f.rel in INFIX_RELATIONS else "patom"
    if isinstance(f, Eq):
        return "iatom"
    if isinstance(f, Not):
        return "not"
    if isinstance(f, And):
        return "and"
    if isinstance(f, Or):
        return "or"
    if isinstance(f, Implies):
        return "imp"
    return "quant"


# operand position -> node kinds that must be parenthesized there
WRAP = {
    "not": frozenset({"iatom", "and", "or", "imp", "quant"}),
    "and_l": frozenset({"or", "imp", "quant"}),
    "and_r": frozenset({"and", "or", "imp", "quant"}),
    "or_l": frozenset({"imp", "quant"}),
    "or_r": frozenset({"or", "imp", "quant"}),
    "imp_l": frozenset({"imp", "quant"}),
    "top": frozenset(),
}

CONNECTIVE_TEXT = {"and": " & ", "or": " | ", "imp": " -> "}


def to_text(f: Formula) -> str:
    """Render ``f`` so that ``parse(to_text(f)) == f``."""
    return _fmt(f)


def _operand(f, position):
    text = _fmt(f)
    if kind(f) in WRAP[position]:
        return "(" + text + ")"
    return text


def _fmt(f):
    if isinstance(f, TrueC):
        return "true"
    if isinstance(f, FalseC):
        return "false"
    if isinstance(f, Atom):
        if f.rel in INFIX_RELATIONS:
            return f"{f.args[0]} {f.rel} {f.args[1]}"
        return f"{f.rel}({', '.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        return "!" + _operand(f.child, "not")
    if isinstance(f, And):
        return _operand(f.left, "and_l") + " & " + _operand(f.right, "and_r")
    if isinstance(f, Or):
        return _operand(f.left, "or_l") + " | " + _operand(f.right, "or_r")
    if isinstance(f, Implies):
        return _operand(f.left, "imp_l") + " -> " + _fmt(f.right)
    word = "forall" if isinstance(f, Forall) else "exists"
    return f"{word} {f.var}. {_fmt(f.body)}"


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<op>->|<'|[()!&|,.<=])|(?P<ident>[A-Za-z][A-Za-z0-9_']*)"
)


@dataclass
class _Token:
    kind: str  # "op", "ident", "eof"
    text: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        if m.lastgroup == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        else:
            tokens.append(_Token(m.lastgroup, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, vocab):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vocab = vocab
        self.seen_arity: dict = {}

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return FormulaSyntaxError(message, tok.line, tok.column)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text):
        if self.tok.kind != "eof" and self.tok.text == text:
            return self.advance()
        return None

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "eof":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def variable(self):
        tok = self.tok
        if tok.kind != "ident" or not is_variable_name(tok.text):
            found = tok.text or "end of input"
            raise self.error(f"expected a variable, found {found!r}")
        return self.advance().text

    def parse(self):
        f = self.formula()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def formula(self):
        if self.tok.kind == "ident" and self.tok.text in ("forall", "exists"):
            return self.quantified()
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.formula())
        return left

    def quantified(self):
        word = self.advance().text
        var = self.variable()
        self.expect(".")
        body = self.formula()
        return Forall(var, body) if word == "forall" else Exists(var, body)

    def disj(self):
        f = self.conj()
        while self.accept("|"):
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.neg()
        while self.accept("&"):
            f = And(f, self.neg())
        return f

    def neg(self):
        if self.accept("!"):
            return Not(self.neg())
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            f = self.formula()
            self.expect(")")
            return f
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise self.error(f"expected a formula, found {found!r}")
        if tok.text == "true":
            self.advance()
            return TRUE
        if tok.text == "false":
            self.advance()
            return FALSE
        if tok.text in ("forall", "exists"):
            return self.quantified()
        nxt = self.tokens[self.i + 1]
        if nxt.text == "(":
            return self.application()
        if nxt.kind == "op" and nxt.text in ("<", "<'", "="):
            left = self.variable()
            op = self.advance()
            right = self.variable()
            if op.text == "=":
                return Eq(left, right)
            self.check_symbol(op.text, 2, op)
            return Atom(op.text, (left, right))
        raise self.error(f"expected a formula, found {tok.text!r}")

    def application(self):
        name_tok = self.advance()
        self.expect("(")
        args = [self.variable()]
        while self.accept(","):
            args.append(self.variable())
        self.expect(")")
        self.check_symbol(name_tok.text, len(args), name_tok)
        return Atom(name_tok.text, tuple(args))

    def check_symbol(self, name, k, tok):
        if self.vocab is None:
            prev = self.seen_arity.setdefault(name, k)
            if prev != k:
                raise ArityError(
                    f"symbol {name!r} used with {k} arguments after {prev} "
                    f"(line {tok.line}, column {tok.column})"
                )
            return
        have = self.vocab.arity(name)
        if have is None:
            raise UnknownSymbolError(
                f"unknown relation symbol {name!r} (line {tok.line}, column {tok.column})"
            )
        if have != k:
            raise ArityError(
                f"symbol {name!r} has arity {have} but is applied to {k} arguments "
                f"(line {tok.line}, column {tok.column})"
            )


def parse(text: str, vocab: Optional[Vocabulary] = None) -> Formula:
    """Parse ``text``; with ``vocab=None`` symbol arities are inferred from use."""
    return _Parser(text, vocab).parse()
