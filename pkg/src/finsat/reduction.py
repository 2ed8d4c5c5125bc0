"""From Turing machines to first-order sentences and back.

The grid encoding: the domain is used twice, once ordered by ``<'`` (time,
rows) and once by ``<`` (tape cells, columns).  ``P_zero(r, c)``,
``P_one(r, c)`` and ``P_empty(r, c)`` give the content of cell ``c`` at time
``r``; ``H_q(r, c)`` says the head is on ``c`` in state ``q`` at time ``r``.
The word part ``E, Z, O, <`` holds the input, copied into the first row.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import DecodeError, MachineError, NotAModelError
from .structures import Structure, evaluate, word_axioms, order_axioms
from .syntax import (
    And,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Vocabulary,
    atom,
    conj,
    disj,
    exists,
    forall,
)

BLANK = "_"
SYMBOLS = ("0", "1", BLANK)
MOVES = ("L", "R", "S")

LETTER = {"0": "Z", "1": "O", BLANK: "E"}
CELL = {"0": "P_zero", "1": "P_one", BLANK: "P_empty"}
WORD_VOCABULARY = Vocabulary.word(("E", "O", "Z"))

_STATE_RE = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True, eq=False)
class TmSpec:
    """Deterministic machine over ``{0, 1, _}`` with a one-way infinite tape."""

    states: tuple
    start: str
    halting: frozenset
    transitions: Mapping  # (state, symbol) -> (state, symbol, move)

    def __post_init__(self):
        validate_tm(self)

    def __eq__(self, other):
        if not isinstance(other, TmSpec):
            return NotImplemented
        return self.to_text() == other.to_text()

    def __hash__(self):
        return hash(self.to_text())

    def to_text(self) -> str:
        lines = [
            "states: " + " ".join(self.states),
            f"start: {self.start}",
            "halt: " + " ".join(q for q in self.states if q in self.halting),
        ]
        for q in self.states:
            for a in SYMBOLS:
                t = self.transitions.get((q, a))
                if t is not None:
                    lines.append(f"trans: {q} {a} -> {t[0]} {t[1]} {t[2]}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Content hash of the canonical text; keys the fragment caches."""
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def validate_tm(m: TmSpec) -> None:
    states = set(m.states)
    if len(states) != len(m.states):
        raise MachineError("duplicate state names")
    for q in m.states:
        if not _STATE_RE.match(q):
            raise MachineError(f"state name {q!r} must match [A-Za-z0-9_]+")
    if m.start not in states:
        raise MachineError(f"start state {m.start!r} is not declared")
    if not m.halting:
        raise MachineError("at least one halting state is required")
    for h in m.halting:
        if h not in states:
            raise MachineError(f"halting state {h!r} is not declared")
    for (q, a), (r, b, mv) in m.transitions.items():
        if q not in states or r not in states:
            raise MachineError(f"transition {q} {a} -> {r} mentions an undeclared state")
        if a not in SYMBOLS or b not in SYMBOLS:
            raise MachineError(f"transition {q} {a} -> {r} {b}: symbols are 0, 1, _")
        if mv not in MOVES:
            raise MachineError(f"transition {q} {a}: move must be L, R or S")
        if q in m.halting:
            raise MachineError(f"halting state {q!r} has an outgoing transition")
    for q in m.states:
        if q in m.halting:
            continue
        for a in SYMBOLS:
            if (q, a) not in m.transitions:
                raise MachineError(f"state {q!r} has no transition on {a!r}")


def parse_tm(text: str) -> TmSpec:
    states = start = halting = None
    transitions = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise MachineError(f"line {lineno}: expected 'key: value'")
        key, fields = key.strip(), rest.split()
        if key == "states":
            states = tuple(fields)
        elif key == "start":
            if len(fields) != 1:
                raise MachineError(f"line {lineno}: start takes one state")
            start = fields[0]
        elif key == "halt":
            halting = frozenset(fields)
        elif key == "trans":
            if len(fields) != 6 or fields[2] != "->":
                raise MachineError(f"line {lineno}: expected 'trans: q a -> r b M'")
            q, a, _, r, b, mv = fields
            if (q, a) in transitions:
                raise MachineError(f"line {lineno}: second transition for ({q}, {a}); machine must be deterministic")
            transitions[(q, a)] = (r, b, mv)
        else:
            raise MachineError(f"line {lineno}: unknown key {key!r}")
    if states is None or start is None or halting is None:
        raise MachineError("machine needs 'states', 'start' and 'halt' lines")
    return TmSpec(states, start, halting, transitions)


# --- simulation ------------------------------------------------------------


@dataclass(frozen=True)
class Config:
    state: str
    head: int
    tape: tuple


@dataclass(frozen=True)
class RunTrace:
    configs: tuple

    def __len__(self):
        return len(self.configs)

    def padded(self, width: int) -> "RunTrace":
        """Same run with every tape prefix blank-padded (or cut) to ``width`` cells."""
        out = []
        for c in self.configs:
            tape = (c.tape + (BLANK,) * width)[:width]
            if c.head >= width:
                raise ValueError("head outside the requested width")
            out.append(Config(c.state, c.head, tape))
        return RunTrace(tuple(out))

    def render(self) -> str:
        lines = []
        for i, c in enumerate(self.configs):
            cells = " ".join(f"[{a}]" if j == c.head else f" {a} " for j, a in enumerate(c.tape))
            lines.append(f"{i:3d} {c.state:>6} {cells}".rstrip())
        return "\n".join(lines)


@dataclass(frozen=True)
class Halted:
    steps: int
    cells_used: int
    trace: RunTrace


@dataclass(frozen=True)
class Running:
    steps: int


def _check_input(bits):
    if any(b not in "01" for b in bits):
        raise ValueError(f"input must be a bit string, got {bits!r}")


def simulate(m: TmSpec, input_bits: str, max_steps: int) -> Union[Halted, Running]:
    """Run ``m`` on ``input_bits`` for at most ``max_steps`` transitions.

    A left move at cell 0 is a dead configuration and counts as running.
    """
    _check_input(input_bits)
    tape = list(input_bits)
    head, state = 0, m.start
    visited = 0
    history = []

    def snapshot():
        history.append((state, head, tuple(tape)))

    snapshot()
    steps = 0
    while state not in m.halting:
        if steps >= max_steps:
            return Running(steps)
        while len(tape) <= head:
            tape.append(BLANK)
        state, tape[head], move = m.transitions[(state, tape[head])]
        if move == "L":
            if head == 0:
                # falling off the one-way tape is a dead end, never a halt;
                # the grid sentence has no model for it either
                return Running(max_steps)
            head -= 1
        elif move == "R":
            head += 1
        visited = max(visited, head)
        steps += 1
        snapshot()
    cells = max(len(input_bits), visited + 1)
    configs = tuple(Config(q, h, (t + (BLANK,) * cells)[:cells]) for q, h, t in history)
    return Halted(steps, cells, RunTrace(configs))


def min_grid_size(m: TmSpec, input_bits: str, max_steps: int = 10_000) -> Optional[int]:
    """Smallest domain that can hold the halting run, or ``None`` if it does not halt in time."""
    run = simulate(m, input_bits, max_steps)
    if isinstance(run, Running):
        return None
    return max(run.steps + 1, run.cells_used, 1)


# --- sentences -------------------------------------------------------------


def first(rel: str, z: str, bound: str = "w") -> Formula:
    """``z`` is the least element of ``rel``."""
    return Forall(bound, Not(atom(rel, bound, z)))


def last(rel: str, z: str, bound: str = "w") -> Formula:
    return Forall(bound, Not(atom(rel, z, bound)))


def succ(rel: str, z: str, w: str, bound: str = "u") -> Formula:
    """``w`` is the immediate ``rel``-successor of ``z``."""
    return And(atom(rel, z, w), Not(Exists(bound, And(atom(rel, z, bound), atom(rel, bound, w)))))


def build_phi_x(input_bits: str) -> Formula:
    """Over words: the word is ``input_bits`` (Z for 0, O for 1) followed by blanks."""
    _check_input(input_bits)
    n = len(input_bits)
    if n == 0:
        return Forall("y", atom("E", "y"))
    xs = [f"x{i}" for i in range(1, n + 1)]
    parts = [first("<", xs[0])]
    parts += [succ("<", xs[i], xs[i + 1]) for i in range(n - 1)]
    parts += [atom("Z", x) for x, b in zip(xs, input_bits) if b == "0"]
    parts += [atom("O", x) for x, b in zip(xs, input_bits) if b == "1"]
    parts.append(Forall("y", Implies(atom("<", xs[-1], "y"), atom("E", "y"))))
    return exists(xs, conj(*parts))


def head_symbol(state: str) -> str:
    return "H_" + state


def grid_vocabulary(m: TmSpec) -> Vocabulary:
    return Vocabulary(
        unary=("E", "O", "Z"),
        binary=("<", "<'", *CELL.values(), *(head_symbol(q) for q in m.states)),
    )


def _cell_copy(r, s, c):
    return conj(*[Implies(atom(p, r, c), atom(p, s, c)) for p in CELL.values()])


def phi_m_parts(m: TmSpec) -> dict:
    """The conjuncts of ``build_phi_M`` keyed by their role, in conjunction order."""
    heads = [head_symbol(q) for q in m.states]
    cells = list(CELL.values())
    parts = {}
    parts["word"] = word_axioms(WORD_VOCABULARY)
    parts["time_order"] = order_axioms("<'")
    parts["cell_content"] = And(
        forall("rc", disj(*[atom(p, "r", "c") for p in cells])),
        forall(
            "rc",
            conj(*[Not(And(atom(p, "r", "c"), atom(q, "r", "c"))) for i, p in enumerate(cells) for q in cells[i + 1 :]]),
        ),
    )
    parts["one_head"] = And(
        Forall("r", Exists("c", disj(*[atom(h, "r", "c") for h in heads]))),
        forall(
            "rcd",
            conj(
                *[
                    Implies(And(atom(h, "r", "c"), atom(g, "r", "d")), Eq("c", "d"))
                    for h in heads
                    for g in heads
                ],
                *[Not(And(atom(h, "r", "c"), atom(g, "r", "c"))) for i, h in enumerate(heads) for g in heads[i + 1 :]],
            ),
        ),
    )
    parts["input"] = Exists(
        "x",
        And(
            first("<'", "x"),
            Forall(
                "y",
                conj(
                    Implies(atom("Z", "y"), atom("P_zero", "x", "y")),
                    Implies(atom("O", "y"), atom("P_one", "x", "y")),
                    Implies(atom("E", "y"), atom("P_empty", "x", "y")),
                ),
            ),
        ),
    )
    parts["start"] = exists("rc", conj(first("<'", "r"), first("<", "c"), atom(head_symbol(m.start), "r", "c")))

    steps = []
    for q in m.states:
        if q in m.halting:
            continue
        for a in SYMBOLS:
            r_next, b, move = m.transitions[(q, a)]
            h_next = head_symbol(r_next)
            if move == "S":
                moved = atom(h_next, "s", "c")
            elif move == "R":
                moved = Exists("d", And(succ("<", "c", "d"), atom(h_next, "s", "d")))
            else:
                moved = Exists("d", And(succ("<", "d", "c"), atom(h_next, "s", "d")))
            steps.append(
                forall(
                    "rsc",
                    Implies(
                        conj(succ("<'", "r", "s"), atom(head_symbol(q), "r", "c"), atom(CELL[a], "r", "c")),
                        And(atom(CELL[b], "s", "c"), moved),
                    ),
                )
            )
    no_head = Not(disj(*[atom(h, "r", "c") for h in heads]))
    steps.append(forall("rsc", Implies(And(succ("<'", "r", "s"), no_head), _cell_copy("r", "s", "c"))))
    parts["transitions"] = conj(*steps)

    halting = [q for q in m.states if q in m.halting]
    parts["halt_persist"] = conj(
        *[
            forall(
                "rsc",
                Implies(
                    And(succ("<'", "r", "s"), atom(head_symbol(q), "r", "c")),
                    And(atom(head_symbol(q), "s", "c"), _cell_copy("r", "s", "c")),
                ),
            )
            for q in halting
        ]
    )
    parts["halt_last"] = Exists(
        "r", And(last("<'", "r"), Exists("c", disj(*[atom(head_symbol(q), "r", "c") for q in halting])))
    )
    return parts


def build_phi_M(m: TmSpec) -> Formula:
    """Finite models are exactly grid encodings of halting runs of ``m``."""
    return conj(*phi_m_parts(m).values())


def reduce_pair(m: TmSpec, input_bits: str) -> Formula:
    return And(build_phi_M(m), build_phi_x(input_bits))


# --- decoding --------------------------------------------------------------


def _sorted_by(order_pairs, n):
    below = [0] * n
    for _, b in order_pairs:
        below[b] += 1
    return sorted(range(n), key=below.__getitem__)


def decode_run(s: Structure, m: TmSpec, check: bool = True) -> RunTrace:
    """Read the run off a model of ``build_phi_M(m)``; trailing halting repeats are dropped."""
    if check and not evaluate(build_phi_M(m), s):
        raise NotAModelError("structure does not satisfy phi_M for this machine")
    rows = _sorted_by(s.binary["<'"], s.size)
    cols = _sorted_by(s.binary["<"], s.size)
    content = {}
    for sym, rel in CELL.items():
        for r, c in s.binary[rel]:
            if (r, c) in content:
                raise DecodeError(f"cell ({r}, {c}) holds two symbols")
            content[(r, c)] = sym
    col_index = {c: j for j, c in enumerate(cols)}
    configs = []
    for r in rows:
        tape = []
        for c in cols:
            if (r, c) not in content:
                raise DecodeError(f"cell ({r}, {c}) is empty")
            tape.append(content[(r, c)])
        found = [(q, c) for q in m.states for (rr, c) in s.binary[head_symbol(q)] if rr == r]
        if len(found) != 1:
            raise DecodeError(f"row {r} has {len(found)} head atoms")
        q, c = found[0]
        configs.append(Config(q, col_index[c], tuple(tape)))
    while len(configs) > 1 and configs[-2].state in m.halting:
        configs.pop()
    return RunTrace(tuple(configs))

