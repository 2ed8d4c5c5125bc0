"""Finite relational structures, words, and Tarskian model checking."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import ArityError, UnboundVariableError, VocabularyError
from .syntax import (
    And,
    Atom,
    Eq,
    Exists,
    FalseC,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    TrueC,
    Vocabulary,
    atom,
    conj,
    disj,
    forall,
)

Word = tuple  # sequence of letter names


@dataclass(frozen=True, eq=False)
class Structure:
    """A structure with domain ``{0, ..., size-1}``."""

    size: int
    unary: Mapping[str, frozenset] = field(default_factory=dict)
    binary: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("structures have a nonempty domain")
        unary = {k: frozenset(v) for k, v in sorted(self.unary.items())}
        binary = {k: frozenset(tuple(p) for p in v) for k, v in sorted(self.binary.items())}
        for name, elems in unary.items():
            if any(not 0 <= e < self.size for e in elems):
                raise ValueError(f"relation {name} mentions an element outside the domain")
        for name, pairs in binary.items():
            if any(len(p) != 2 or not (0 <= p[0] < self.size and 0 <= p[1] < self.size) for p in pairs):
                raise ValueError(f"relation {name} mentions an element outside the domain")
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "binary", binary)
        # build the vocabulary eagerly so bad names fail at construction
        object.__setattr__(self, "_vocab", Vocabulary(tuple(unary), tuple(binary)))

    @property
    def vocabulary(self) -> Vocabulary:
        return self._vocab

    @property
    def domain(self) -> range:
        return range(self.size)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (self.size, self.unary, self.binary) == (other.size, other.unary, other.binary)

    def __hash__(self):
        return hash((self.size, tuple(self.unary.items()), tuple(self.binary.items())))

    def __repr__(self):
        return f"Structure({self.size}, {dict(self.unary)}, {dict(self.binary)})"

    def permute(self, perm: Sequence[int]) -> "Structure":
        """The isomorphic copy with element ``i`` renamed to ``perm[i]``."""
        return Structure(
            self.size,
            {k: {perm[e] for e in v} for k, v in self.unary.items()},
            {k: {(perm[a], perm[b]) for a, b in v} for k, v in self.binary.items()},
        )

    def to_text(self) -> str:
        lines = [f"size {self.size}"]
        for name, elems in self.unary.items():
            lines.append(" ".join([f"{name}:"] + [str(e) for e in sorted(elems)]))
        for name, pairs in self.binary.items():
            lines.append(" ".join([f"{name}:"] + [f"({a},{b})" for a, b in sorted(pairs)]))
        return "\n".join(lines) + "\n"


_PAIR_RE = re.compile(r"\((\d+),(\d+)\)\Z")


def structure_from_text(text: str, vocab: Optional[Vocabulary] = None) -> Structure:
    """Inverse of ``Structure.to_text``.

    An empty relation line carries no arity; ``vocab`` resolves it, otherwise
    it is read as unary (except for the infix order symbols).
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("size "):
        raise ValueError("structure text must start with 'size N'")
    n = int(lines[0].split()[1])
    unary, binary = {}, {}
    for ln in lines[1:]:
        name, sep, rest = ln.partition(":")
        if not sep:
            raise ValueError(f"bad relation line {ln!r}")
        items = rest.split()
        if items and items[0].startswith("("):
            pairs = []
            for item in items:
                m = _PAIR_RE.match(item)
                if not m:
                    raise ValueError(f"bad pair {item!r}")
                pairs.append((int(m.group(1)), int(m.group(2))))
            binary[name] = pairs
        elif not items and (name in ("<", "<'") or (vocab is not None and vocab.arity(name) == 2)):
            binary[name] = []
        else:
            unary[name] = [int(x) for x in items]
    return Structure(n, unary, binary)


# --- satisfaction ----------------------------------------------------------


def evaluate(f: Formula, s: Structure, assignment: Optional[Mapping[str, int]] = None) -> bool:
    """Tarskian satisfaction of ``f`` in ``s`` under ``assignment``."""
    env = dict(assignment or {})
    for v, e in env.items():
        if not 0 <= e < s.size:
            raise ValueError(f"variable {v} assigned {e}, outside the domain of size {s.size}")
    return _sat(f, s, env)


def holds(sentence: Formula, s: Structure) -> bool:
    return evaluate(sentence, s, {})


def _lookup(env, v):
    try:
        return env[v]
    except KeyError:
        raise UnboundVariableError(f"variable {v!r} is free and unassigned") from None


def _sat(f, s, env):
    if isinstance(f, Atom):
        if len(f.args) == 1:
            rel = s.unary.get(f.rel)
            if rel is None:
                _missing(f, s)
            return _lookup(env, f.args[0]) in rel
        rel = s.binary.get(f.rel)
        if rel is None:
            _missing(f, s)
        return (_lookup(env, f.args[0]), _lookup(env, f.args[1])) in rel
    if isinstance(f, Eq):
        return _lookup(env, f.left) == _lookup(env, f.right)
    if isinstance(f, TrueC):
        return True
    if isinstance(f, FalseC):
        return False
    if isinstance(f, Not):
        return not _sat(f.child, s, env)
    if isinstance(f, And):
        return _sat(f.left, s, env) and _sat(f.right, s, env)
    if isinstance(f, Or):
        return _sat(f.left, s, env) or _sat(f.right, s, env)
    if isinstance(f, Implies):
        return not _sat(f.left, s, env) or _sat(f.right, s, env)
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)
        saved = env.get(f.var, _UNSET)
        try:
            for e in range(s.size):
                env[f.var] = e
                if _sat(f.body, s, env) == want:
                    return want
            return not want
        finally:
            if saved is _UNSET:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    raise TypeError(f"not a formula: {f!r}")


_UNSET = object()


def _missing(f, s):
    other = s.binary if len(f.args) == 1 else s.unary
    if f.rel in other:
        raise ArityError(f"symbol {f.rel!r} used with {len(f.args)} arguments")
    raise VocabularyError(f"structure has no relation {f.rel!r}")


# --- words -----------------------------------------------------------------


def order_axioms(rel: str = "<") -> Formula:
    """``rel`` is a strict total order: irreflexive, transitive, total."""
    lt = lambda a, b: atom(rel, a, b)  # noqa: E731
    irreflexive = Forall("x", Not(lt("x", "x")))
    transitive = forall("xyz", Implies(And(lt("x", "y"), lt("y", "z")), lt("x", "z")))
    total = forall("xy", disj(lt("x", "y"), Eq("x", "y"), lt("y", "x")))
    return conj(irreflexive, transitive, total)


def letter_axioms(letters: Sequence[str]) -> Formula:
    """Every element carries exactly one of ``letters``."""
    letters = list(letters)
    some = Forall("x", disj(*[atom(p, "x") for p in letters]))
    exclusive = [
        Forall("x", Not(And(atom(p, "x"), atom(q, "x"))))
        for i, p in enumerate(letters)
        for q in letters[i + 1 :]
    ]
    return conj(some, *exclusive)


def word_axioms(vocab: Vocabulary) -> Formula:
    if not vocab.is_word_vocabulary():
        raise VocabularyError(f"word vocabulary needs exactly the binary symbol '<', got {vocab}")
    return And(order_axioms("<"), letter_axioms(vocab.unary))


def is_strict_total_order(pairs, n: int) -> bool:
    rel = set(pairs)
    for a in range(n):
        if (a, a) in rel:
            return False
        for b in range(a + 1, n):
            if ((a, b) in rel) == ((b, a) in rel):
                return False
    # irreflexive + exactly one direction per pair: transitivity is all that is left
    for a, b in rel:
        for c in range(n):
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True


def is_word(s: Structure) -> bool:
    if tuple(s.binary) != ("<",):
        raise VocabularyError(f"is_word needs exactly the binary symbol '<', got {tuple(s.binary)}")
    if not is_strict_total_order(s.binary["<"], s.size):
        return False
    counts = [0] * s.size
    for elems in s.unary.values():
        for e in elems:
            counts[e] += 1
    return all(c == 1 for c in counts)


def word_to_structure(w: Sequence[str], vocab: Optional[Vocabulary] = None) -> Structure:
    w = tuple(w)
    if not w:
        raise ValueError("the empty word has no structure: domains are nonempty")
    if vocab is None:
        vocab = Vocabulary.word(w)
    if not vocab.is_word_vocabulary():
        raise VocabularyError(f"not a word vocabulary: {vocab}")
    for letter in w:
        if letter not in vocab.unary:
            raise VocabularyError(f"letter {letter!r} is not a unary symbol of {vocab}")
    n = len(w)
    unary = {p: {i for i, a in enumerate(w) if a == p} for p in vocab.unary}
    order = {(i, j) for i in range(n) for j in range(i + 1, n)}
    return Structure(n, unary, {"<": order})


def structure_to_word(s: Structure) -> Word:
    """Read the letters of a word structure in ``<`` order."""
    if not is_word(s):
        raise ValueError("structure is not a word")
    below = {e: 0 for e in range(s.size)}
    for _, b in s.binary["<"]:
        below[b] += 1
    letter = {}
    for name, elems in s.unary.items():
        for e in elems:
            letter[e] = name
    return tuple(letter[e] for e in sorted(range(s.size), key=below.__getitem__))


def restrict_vocabulary(s: Structure, vocab: Vocabulary) -> Structure:
    for name in vocab.unary:
        if name not in s.unary:
            raise VocabularyError(f"structure has no unary relation {name!r}")
    for name in vocab.binary:
        if name not in s.binary:
            raise VocabularyError(f"structure has no binary relation {name!r}")
    return Structure(
        s.size,
        {k: s.unary[k] for k in vocab.unary},
        {k: s.binary[k] for k in vocab.binary},
    )
