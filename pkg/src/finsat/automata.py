"""Deciding first-order logic over finite words with finite automata.

A formula with free variables ``x1..xk`` is compiled into an automaton over a
layered alphabet: each letter is a word letter together with a bit vector
saying which of the variables sit at that position.  Only annotated words in
which every track is marked exactly once are meaningful; every automaton
built here accepts nothing else.

Letters are encoded as integers ``base_index << k | bits`` where bit ``i``
belongs to ``tracks[i]``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ResourceError, VocabularyError
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
    free_vars,
    symbols,
)

DEFAULT_STATE_CAP = 2**20


@dataclass(frozen=True)
class LayeredAlphabet:
    base: tuple
    tracks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "tracks", tuple(self.tracks))
        if len(set(self.base)) != len(self.base):
            raise ValueError("duplicate base letters")
        if len(set(self.tracks)) != len(self.tracks):
            raise ValueError("duplicate tracks")

    @property
    def width(self) -> int:
        return len(self.tracks)

    def __len__(self):
        return len(self.base) << len(self.tracks)

    @property
    def letters(self) -> range:
        return range(len(self))

    def letter(self, symbol: str, marked: Sequence[str] = ()) -> int:
        bits = 0
        for v in marked:
            bits |= 1 << self.tracks.index(v)
        return (self.base.index(symbol) << self.width) | bits

    def decode(self, letter: int) -> tuple:
        """``(base symbol, bits)`` for an encoded letter."""
        return self.base[letter >> self.width], letter & ((1 << self.width) - 1)

    def bit(self, track: str) -> int:
        return 1 << self.tracks.index(track)

    def render(self, letter: int) -> str:
        sym, bits = self.decode(letter)
        marks = "".join("1" if bits >> i & 1 else "0" for i in range(self.width))
        return f"{sym}|{marks}"


@dataclass(frozen=True, eq=False)
class Nfa:
    """States are ``0..n_states-1``; ``delta[q]`` maps a letter to successor states."""

    n_states: int
    alphabet: LayeredAlphabet
    delta: tuple
    initial: frozenset
    accepting: frozenset

    @property
    def transitions(self):
        for q, row in enumerate(self.delta):
            for letter in sorted(row):
                for r in sorted(row[letter]):
                    yield q, letter, r

    def accepts(self, letters: Sequence[int]) -> bool:
        current = set(self.initial)
        for a in letters:
            nxt = set()
            for q in current:
                nxt |= self.delta[q].get(a, frozenset())
            current = nxt
            if not current:
                return False
        return bool(current & self.accepting)

    def is_deterministic(self) -> bool:
        return len(self.initial) <= 1 and all(len(t) <= 1 for row in self.delta for t in row.values())

    def dump(self) -> str:
        lines = [
            f"states {self.n_states}",
            "initial: " + " ".join(map(str, sorted(self.initial))),
            "accepting: " + " ".join(map(str, sorted(self.accepting))),
        ]
        for q, a, r in self.transitions:
            lines.append(f"trans: {q} --({self.alphabet.render(a)})--> {r}")
        return "\n".join(lines) + "\n"


def _empty(alphabet):
    return Nfa(0, alphabet, (), frozenset(), frozenset())


def _from_step(alphabet, start, step, accept):
    """Deterministic automaton explored from ``start`` via ``step(key, letter)``."""
    index = {start: 0}
    keys = [start]
    delta = []
    i = 0
    while i < len(keys):
        key = keys[i]
        row = {}
        for a in alphabet.letters:
            nxt = step(key, a)
            if nxt is None:
                continue
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(keys)
                keys.append(nxt)
            row[a] = frozenset((j,))
        delta.append(row)
        i += 1
    accepting = frozenset(j for j, k in enumerate(keys) if accept(k))
    return trim(Nfa(len(keys), alphabet, tuple(delta), frozenset((0,)), accepting))


def trim(a: Nfa) -> Nfa:
    """Drop states that are unreachable or cannot reach acceptance; renumber in BFS order."""
    order = []
    seen = set()
    queue = deque(sorted(a.initial))
    seen.update(a.initial)
    while queue:
        q = queue.popleft()
        order.append(q)
        row = a.delta[q]
        for letter in sorted(row):
            for r in sorted(row[letter]):
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
    reverse = {}
    for q in order:
        for targets in a.delta[q].values():
            for r in targets:
                reverse.setdefault(r, set()).add(q)
    alive = set(q for q in a.accepting if q in seen)
    stack = list(alive)
    while stack:
        r = stack.pop()
        for q in reverse.get(r, ()):
            if q not in alive:
                alive.add(q)
                stack.append(q)
    keep = [q for q in order if q in alive]
    if not keep:
        return _empty(a.alphabet)
    renumber = {q: i for i, q in enumerate(keep)}
    delta = []
    for q in keep:
        row = {}
        for letter, targets in a.delta[q].items():
            kept = frozenset(renumber[r] for r in targets if r in renumber)
            if kept:
                row[letter] = kept
        delta.append(row)
    return Nfa(
        len(keep),
        a.alphabet,
        tuple(delta),
        frozenset(renumber[q] for q in a.initial if q in renumber),
        frozenset(renumber[q] for q in a.accepting if q in renumber),
    )


def valid_tracks(alphabet: LayeredAlphabet) -> Nfa:
    """All annotated words in which every track is marked exactly once."""
    full = (1 << alphabet.width) - 1
    mask_bits = full

    def step(mask, a):
        bits = a & mask_bits
        if bits & mask:
            return None
        return mask | bits

    return _from_step(alphabet, 0, step, lambda mask: mask == full)


def universal(alphabet: LayeredAlphabet) -> Nfa:
    """Every letter sequence, including ones violating the track discipline."""
    row = {a: frozenset((0,)) for a in alphabet.letters}
    return Nfa(1, alphabet, (row,), frozenset((0,)), frozenset((0,)))


def _check_same_alphabet(a, b):
    if a.alphabet != b.alphabet:
        raise ValueError(f"alphabet mismatch: {a.alphabet} vs {b.alphabet}")


def product_intersect(a: Nfa, b: Nfa) -> Nfa:
    _check_same_alphabet(a, b)
    index = {}
    pairs = []
    for p in sorted(a.initial):
        for q in sorted(b.initial):
            index[(p, q)] = len(pairs)
            pairs.append((p, q))
    initial = frozenset(range(len(pairs)))
    delta = []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        row_a, row_b = a.delta[p], b.delta[q]
        row = {}
        for letter, ta in row_a.items():
            tb = row_b.get(letter)
            if not tb:
                continue
            targets = []
            for r in sorted(ta):
                for s in sorted(tb):
                    j = index.get((r, s))
                    if j is None:
                        j = index[(r, s)] = len(pairs)
                        pairs.append((r, s))
                    targets.append(j)
            row[letter] = frozenset(targets)
        delta.append(row)
        i += 1
    accepting = frozenset(j for j, (p, q) in enumerate(pairs) if p in a.accepting and q in b.accepting)
    return trim(Nfa(len(pairs), a.alphabet, tuple(delta), initial, accepting))


def union(a: Nfa, b: Nfa) -> Nfa:
    _check_same_alphabet(a, b)
    off = a.n_states
    shifted = tuple({k: frozenset(r + off for r in v) for k, v in row.items()} for row in b.delta)
    return trim(
        Nfa(
            a.n_states + b.n_states,
            a.alphabet,
            a.delta + shifted,
            a.initial | frozenset(q + off for q in b.initial),
            a.accepting | frozenset(q + off for q in b.accepting),
        )
    )


def determinize(a: Nfa, state_cap: int = DEFAULT_STATE_CAP) -> tuple:
    """Subset construction over the full alphabet.

    Returns ``(delta, subsets)`` of a complete DFA; state 0 is the initial subset.
    The empty subset appears as an ordinary (sink) state when reachable.
    """
    start = frozenset(a.initial)
    index = {start: 0}
    subsets = [start]
    delta = []
    i = 0
    letters = a.alphabet.letters
    while i < len(subsets):
        current = subsets[i]
        rows = [a.delta[q] for q in current]
        row = {}
        for letter in letters:
            nxt = set()
            for r in rows:
                t = r.get(letter)
                if t:
                    nxt |= t
            nxt = frozenset(nxt)
            j = index.get(nxt)
            if j is None:
                if len(subsets) >= state_cap:
                    raise ResourceError(f"determinization exceeded {state_cap} states")
                j = index[nxt] = len(subsets)
                subsets.append(nxt)
            row[letter] = frozenset((j,))
        delta.append(row)
        i += 1
    return tuple(delta), subsets


def determinize_complement(a: Nfa, state_cap: int = DEFAULT_STATE_CAP) -> Nfa:
    """Complete DFA for the complement of ``L(a)`` among all letter sequences."""
    delta, subsets = determinize(a, state_cap)
    accepting = frozenset(j for j, s in enumerate(subsets) if not (s & a.accepting))
    return Nfa(len(subsets), a.alphabet, delta, frozenset((0,)), accepting)


def _drop_bit(letter, i):
    low = letter & ((1 << i) - 1)
    return ((letter >> (i + 1)) << i) | low


def project_exists(a: Nfa, track: str) -> Nfa:
    """Erase ``track``: accept a word iff some marking of the track is accepted by ``a``."""
    if track not in a.alphabet.tracks:
        raise ValueError(f"unknown track {track!r}")
    i = a.alphabet.tracks.index(track)
    alphabet = LayeredAlphabet(a.alphabet.base, a.alphabet.tracks[:i] + a.alphabet.tracks[i + 1 :])
    delta = []
    for row in a.delta:
        new_row = {}
        for letter, targets in row.items():
            key = _drop_bit(letter, i)
            new_row[key] = new_row.get(key, frozenset()) | targets
        delta.append(new_row)
    return trim(Nfa(a.n_states, alphabet, tuple(delta), a.initial, a.accepting))


def cylindrify(a: Nfa, tracks: Sequence[str]) -> Nfa:
    """Re-express ``a`` over ``tracks`` (a superset, any order); new tracks are unconstrained
    apart from the exactly-one-mark discipline."""
    old = a.alphabet
    tracks = tuple(tracks)
    missing = set(old.tracks) - set(tracks)
    if missing:
        raise ValueError(f"tracks {sorted(missing)} would be dropped")
    new = LayeredAlphabet(old.base, tracks)
    positions = [tracks.index(t) for t in old.tracks]
    restrict = []
    for letter in new.letters:
        b, bits = letter >> new.width, letter & ((1 << new.width) - 1)
        old_bits = 0
        for j, p in enumerate(positions):
            if bits >> p & 1:
                old_bits |= 1 << j
        restrict.append((b << old.width) | old_bits)
    delta = []
    for row in a.delta:
        new_row = {}
        for letter in new.letters:
            t = row.get(restrict[letter])
            if t:
                new_row[letter] = t
        delta.append(new_row)
    lifted = Nfa(a.n_states, new, tuple(delta), a.initial, a.accepting)
    if len(tracks) == len(old.tracks):
        return trim(lifted)
    return product_intersect(lifted, valid_tracks(new))


def is_empty_with_witness(a: Nfa, min_length: int = 0) -> Optional[tuple]:
    """``None`` if no sequence of length >= ``min_length`` is accepted, else a shortest one.

    Breadth-first from the initial states in ascending order, letters ascending.
    """
    if min_length not in (0, 1):
        raise ValueError("min_length must be 0 or 1")
    if min_length == 0 and a.initial & a.accepting:
        return ()
    parent = {}
    queue = deque()
    for q in sorted(a.initial):
        node = (q, False)
        parent[node] = None
        queue.append(node)
    while queue:
        node = queue.popleft()
        q, _ = node
        row = a.delta[q]
        for letter in sorted(row):
            for r in sorted(row[letter]):
                nxt = (r, True)
                if nxt in parent:
                    continue
                parent[nxt] = (node, letter)
                if r in a.accepting:
                    out = []
                    cur = nxt
                    while parent[cur] is not None:
                        cur, letter_in = parent[cur]
                        out.append(letter_in)
                    return tuple(reversed(out))
                queue.append(nxt)
    return None


# --- formula compilation ---------------------------------------------------


def _atom_dfa(alphabet, f):
    w = alphabet.width
    low = (1 << w) - 1
    full = low

    def finish(step):
        def guarded(mask, a):
            bits = a & low
            if bits & mask:
                return None
            if not step(mask, a >> w, bits):
                return None
            return mask | bits

        return _from_step(alphabet, 0, guarded, lambda mask: mask == full)

    if isinstance(f, Eq):
        if f.left == f.right:
            return valid_tracks(alphabet)
        bx, by = alphabet.bit(f.left), alphabet.bit(f.right)
        return finish(lambda mask, b, bits: bool(bits & bx) == bool(bits & by))
    if len(f.args) == 1:
        if f.rel not in alphabet.base:
            raise VocabularyError(f"letter {f.rel!r} is not in the word alphabet {alphabet.base}")
        want = alphabet.base.index(f.rel)
        bx = alphabet.bit(f.args[0])
        return finish(lambda mask, b, bits: not (bits & bx) or b == want)
    if f.rel != "<":
        raise VocabularyError(f"binary symbol {f.rel!r}: over words only '<' is allowed")
    x, y = f.args
    if x == y:
        return _empty(alphabet)
    bx, by = alphabet.bit(x), alphabet.bit(y)
    # y may only be marked once x has been passed strictly earlier
    return finish(lambda mask, b, bits: not (bits & by) or (mask & bx and not bits & bx))


class _Compiler:
    def __init__(self, base, state_cap):
        self.base = tuple(base)
        self.state_cap = state_cap

    def alphabet(self, tracks):
        return LayeredAlphabet(self.base, tracks)

    def negate(self, a, tracks):
        comp = determinize_complement(a, self.state_cap)
        return product_intersect(comp, valid_tracks(self.alphabet(tracks)))

    def compile(self, f, tracks):
        alphabet = self.alphabet(tracks)
        if isinstance(f, TrueC):
            return valid_tracks(alphabet)
        if isinstance(f, FalseC):
            return _empty(alphabet)
        if isinstance(f, (Atom, Eq)):
            return _atom_dfa(alphabet, f)
        if isinstance(f, Not):
            return self.negate(self.compile(f.child, tracks), tracks)
        if isinstance(f, And):
            return product_intersect(self.compile(f.left, tracks), self.compile(f.right, tracks))
        if isinstance(f, Or):
            return union(self.compile(f.left, tracks), self.compile(f.right, tracks))
        if isinstance(f, Implies):
            return union(self.compile(Not(f.left), tracks), self.compile(f.right, tracks))
        if isinstance(f, Exists):
            inner = tuple(t for t in tracks if t != f.var) + (f.var,)
            projected = project_exists(self.compile(f.body, inner), f.var)
            if f.var in tracks:
                return cylindrify(projected, tracks)
            return projected
        if isinstance(f, Forall):
            return self.compile(Not(Exists(f.var, Not(f.body))), tracks)
        raise TypeError(f"not a formula: {f!r}")


def formula_to_nfa(
    f: Formula,
    tracks: Sequence[str],
    letters: Sequence[str],
    state_cap: int = DEFAULT_STATE_CAP,
) -> Nfa:
    """Automaton accepting the annotated words over ``letters`` that satisfy ``f``."""
    tracks = tuple(tracks)
    for name, k in symbols(f).items():
        if k == 2 and name != "<":
            raise VocabularyError(f"not a word vocabulary: binary symbol {name!r}")
        if k == 1 and name not in letters:
            raise VocabularyError(f"letter {name!r} is not among {tuple(letters)}")
    extra = set(free_vars(f)) - set(tracks)
    if extra:
        raise ValueError(f"free variables {sorted(extra)} have no track")
    return _Compiler(letters, state_cap).compile(f, tracks)


def decode_word(alphabet: LayeredAlphabet, letters: Sequence[int]) -> tuple:
    return tuple(alphabet.decode(a)[0] for a in letters)


def encode_word(alphabet: LayeredAlphabet, word: Sequence[str], marks=None) -> tuple:
    """Letters for ``word``; ``marks`` maps track name to its position."""
    marks = marks or {}
    out = []
    for i, sym in enumerate(word):
        out.append(alphabet.letter(sym, [v for v, p in marks.items() if p == i]))
    return tuple(out)


def _require_sentence(s):
    fv = free_vars(s)
    if fv:
        raise ValueError(f"expected a sentence, free variables {list(fv)}")


def word_sat(s: Formula, letters: Sequence[str], state_cap: int = DEFAULT_STATE_CAP) -> Optional[tuple]:
    """A shortest nonempty word over ``letters`` satisfying ``s``, or ``None``."""
    _require_sentence(s)
    a = formula_to_nfa(s, (), letters, state_cap)
    witness = is_empty_with_witness(a, min_length=1)
    if witness is None:
        return None
    return decode_word(a.alphabet, witness)


def word_equiv(
    s1: Formula, s2: Formula, letters: Sequence[str], state_cap: int = DEFAULT_STATE_CAP
) -> Optional[tuple]:
    """``None`` if ``s1`` and ``s2`` agree on every nonempty word over ``letters``;
    otherwise a shortest word on which they differ."""
    _require_sentence(s1)
    _require_sentence(s2)
    a = formula_to_nfa(s1, (), letters, state_cap)
    b = formula_to_nfa(s2, (), letters, state_cap)
    only_a = product_intersect(a, determinize_complement(b, state_cap))
    only_b = product_intersect(b, determinize_complement(a, state_cap))
    witness = is_empty_with_witness(union(only_a, only_b), min_length=1)
    if witness is None:
        return None
    return decode_word(a.alphabet, witness)
