"""Bounded finite model finding.

``ground`` expands a sentence over the domain ``{0, ..., n-1}`` and turns it
into clauses, introducing one auxiliary variable per distinct ground
subformula (no distribution to CNF).  ``solve_ground`` is a plain DPLL with
unit propagation over two watched literals; it branches on the lowest
unassigned variable, false first, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ResourceError, VocabularyError
from .structures import Structure, evaluate
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
    check_vocabulary,
    free_vars,
    vocabulary_of,
)


@dataclass(frozen=True)
class GroundAtom:
    symbol: str
    elements: tuple


@dataclass
class ClauseSet:
    num_vars: int
    clauses: list
    # GroundAtom -> variable; atoms occupy variables 1..len(atom_map)
    atom_map: dict = field(default_factory=dict)
    size: int = 1
    vocabulary: Vocabulary = field(default_factory=Vocabulary)
    fix_order: Optional[str] = None

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(str(lit) for lit in c) + (" 0" if c else "0"))
        return "\n".join(lines) + "\n"


class _Grounder:
    def __init__(self, n, vocab, fix_order):
        self.n = n
        self.fix_order = fix_order
        self.atoms = {}
        for name in vocab.unary:
            for a in range(n):
                self.atoms[(name, (a,))] = len(self.atoms) + 1
        for name in vocab.binary:
            if name == fix_order:
                continue
            for a in range(n):
                for b in range(n):
                    self.atoms[(name, (a, b))] = len(self.atoms) + 1
        self.next_var = len(self.atoms) + 1
        self.clauses = []
        self.gates = {}
        self.memo = {}
        self.fv = {}
        self.keep = []  # keeps formula nodes alive while their ids are memo keys

    def free(self, f):
        key = id(f)
        got = self.fv.get(key)
        if got is None:
            got = self.fv[key] = free_vars(f)
            self.keep.append(f)
        return got

    def ground(self, f, env):
        if isinstance(f, Atom):
            args = tuple(env[v] for v in f.args)
            if f.rel == self.fix_order:
                return args[0] < args[1]
            return self.atoms[(f.rel, args)]
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, TrueC):
            return True
        if isinstance(f, FalseC):
            return False
        if isinstance(f, Not):
            lit = self.ground(f.child, env)
            if lit is True or lit is False:
                return not lit
            return -lit
        key = (id(f), tuple(env[v] for v in self.free(f)))
        got = self.memo.get(key)
        if got is not None:
            return got
        if isinstance(f, (And, Forall)):
            lits = []
            self.gather(f, env, True, lits)
            got = self.gate(True, lits)
        elif not isinstance(f, (Or, Exists, Implies)):
            raise TypeError(f"not a formula: {f!r}")
        else:
            lits = []
            self.gather(f, env, False, lits)
            got = self.gate(False, lits)
        self.memo[key] = got
        return got

    def gather(self, f, env, conjunctive, out):
        """Flatten nested And/Forall (or Or/Exists/Implies) into ``out``."""
        if conjunctive and isinstance(f, And) or not conjunctive and isinstance(f, Or):
            self.gather(f.left, env, conjunctive, out)
            self.gather(f.right, env, conjunctive, out)
        elif not conjunctive and isinstance(f, Implies):
            lit = self.ground(f.left, env)
            out.append((not lit) if (lit is True or lit is False) else -lit)
            self.gather(f.right, env, conjunctive, out)
        elif conjunctive and isinstance(f, Forall) or not conjunctive and isinstance(f, Exists):
            saved = env.get(f.var)
            for e in range(self.n):
                env[f.var] = e
                self.gather(f.body, env, conjunctive, out)
            if saved is None:
                del env[f.var]
            else:
                env[f.var] = saved
        else:
            out.append(self.ground(f, env))

    def gate(self, conjunctive, lits):
        absorbing = not conjunctive  # False kills a conjunction, True a disjunction
        seen = set()
        for lit in lits:
            if lit is absorbing:
                return absorbing
            if lit is True or lit is False:
                continue
            if -lit in seen:
                return absorbing
            seen.add(lit)
        if not seen:
            return conjunctive
        if len(seen) == 1:
            return next(iter(seen))
        ordered = tuple(sorted(seen))
        key = (conjunctive, ordered)
        aux = self.gates.get(key)
        if aux is not None:
            return aux
        aux = self.gates[key] = self.next_var
        self.next_var += 1
        if conjunctive:
            for lit in ordered:
                self.clauses.append((-aux, lit))
            self.clauses.append((aux,) + tuple(-lit for lit in ordered))
        else:
            for lit in ordered:
                self.clauses.append((aux, -lit))
            self.clauses.append((-aux,) + ordered)
        return aux


def ground(
    s: Formula, n: int, vocab: Optional[Vocabulary] = None, fix_order: Optional[str] = None
) -> ClauseSet:
    """Clauses satisfiable iff ``s`` has a model of size ``n`` over ``vocab``."""
    if n < 1:
        raise ValueError("domain size must be at least 1")
    fv = free_vars(s)
    if fv:
        raise ValueError(f"expected a sentence, free variables {list(fv)}")
    if vocab is None:
        vocab = vocabulary_of(s)
    else:
        check_vocabulary(s, vocab)
    if fix_order is not None:
        if fix_order != "<":
            raise ValueError("only '<' can be fixed to the natural order")
        if fix_order not in vocab.binary:
            raise VocabularyError("fix_order symbol '<' is not in the vocabulary")
    g = _Grounder(n, vocab, fix_order)
    top = g.ground(s, {})
    clauses = g.clauses
    if top is False:
        clauses.append(())
    elif top is not True:
        clauses.append((top,))
    atom_map = {GroundAtom(sym, args): v for (sym, args), v in g.atoms.items()}
    return ClauseSet(g.next_var - 1, clauses, atom_map, n, vocab, fix_order)


def solve_ground(cs: ClauseSet, conflict_budget: Optional[int] = None) -> Optional[list]:
    """A satisfying assignment (``values[v]`` for ``v`` in ``1..num_vars``; index 0 unused)
    or ``None`` if the clauses are unsatisfiable."""
    n = cs.num_vars
    assign = [0] * (n + 1)
    watches = [[] for _ in range(2 * n + 1)]  # index lit + n
    clauses = []
    units = []
    for c in cs.clauses:
        lits = list(dict.fromkeys(c))
        if any(-lit in lits for lit in lits):
            continue
        if not lits:
            return None
        if len(lits) == 1:
            units.append(lits[0])
            continue
        idx = len(clauses)
        clauses.append(lits)
        watches[lits[0] + n].append(idx)
        watches[lits[1] + n].append(idx)

    trail = []
    qhead = 0

    def value(lit):
        v = assign[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def enqueue(lit):
        assign[lit if lit > 0 else -lit] = 1 if lit > 0 else -1
        trail.append(lit)

    def propagate():
        nonlocal qhead
        while qhead < len(trail):
            false_lit = -trail[qhead]
            qhead += 1
            ws = watches[false_lit + n]
            i = 0
            while i < len(ws):
                c = clauses[ws[i]]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if value(first) == 1:
                    i += 1
                    continue
                for k in range(2, len(c)):
                    if value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches[c[1] + n].append(ws[i])
                        ws[i] = ws[-1]
                        ws.pop()
                        break
                else:
                    if value(first) == -1:
                        return False
                    enqueue(first)
                    i += 1
        return True

    def undo(start):
        nonlocal qhead
        for lit in trail[start:]:
            assign[lit if lit > 0 else -lit] = 0
        del trail[start:]
        qhead = start

    for lit in units:
        v = value(lit)
        if v == -1:
            return None
        if v == 0:
            enqueue(lit)
    if not propagate():
        return None

    decisions = []  # [var, trail index at decision, flipped]
    conflicts = 0
    ptr = 1
    while True:
        while ptr <= n and assign[ptr] != 0:
            ptr += 1
        if ptr > n:
            return [False] + [a == 1 for a in assign[1:]]
        decisions.append([ptr, len(trail), False])
        enqueue(-ptr)
        while not propagate():
            conflicts += 1
            if conflict_budget is not None and conflicts > conflict_budget:
                raise ResourceError(f"solver exceeded its budget of {conflict_budget} conflicts")
            while decisions and decisions[-1][2]:
                undo(decisions.pop()[1])
            if not decisions:
                return None
            var, start, _ = decisions[-1]
            undo(start)
            decisions[-1][2] = True
            enqueue(var)
            ptr = var


def _structure_from(cs, values):
    unary = {name: set() for name in cs.vocabulary.unary}
    binary = {name: set() for name in cs.vocabulary.binary}
    for ga, var in cs.atom_map.items():
        if values[var]:
            if len(ga.elements) == 1:
                unary[ga.symbol].add(ga.elements[0])
            else:
                binary[ga.symbol].add(ga.elements)
    if cs.fix_order is not None:
        binary[cs.fix_order] = {(a, b) for a in range(cs.size) for b in range(a + 1, cs.size)}
    return Structure(cs.size, unary, binary)


def find_model(
    s: Formula,
    n: int,
    vocab: Optional[Vocabulary] = None,
    fix_order: Optional[str] = None,
    conflict_budget: Optional[int] = None,
    check: bool = True,
) -> Optional[Structure]:
    """A model of ``s`` with exactly ``n`` elements, or ``None``.

    ``fix_order="<"`` interprets ``<`` as the natural order on the domain.  This
    is only sound when ``s`` forces ``<`` to be a strict total order; that is the
    caller's responsibility.
    """
    cs = ground(s, n, vocab, fix_order)
    values = solve_ground(cs, conflict_budget)
    if values is None:
        return None
    model = _structure_from(cs, values)
    if check and not evaluate(s, model):
        raise AssertionError("solver returned a structure that is not a model")
    return model


def find_model_up_to(s: Formula, max_n: int, **options) -> Optional[tuple]:
    """``(n, model)`` for the least ``n <= max_n`` with a model, else ``None``."""
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    for n in range(1, max_n + 1):
        model = find_model(s, n, **options)
        if model is not None:
            return n, model
    return None
