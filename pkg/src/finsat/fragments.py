"""Fragments of first-order logic and the hardness pipeline.

A fragment is a decidable set of sentences with an enumeration; it may come
with a computable conjunction map.  ``translate_over_words`` searches a
fragment for a sentence that agrees with a given one on all words, and
``hardness_instance`` assembles the sentence whose finite satisfiability
encodes halting.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .automata import DEFAULT_STATE_CAP, word_equiv
from .enumeration import enumerate_sentences
from .errors import FragmentError, ResourceError
from .reduction import TmSpec, build_phi_M, build_phi_x, grid_vocabulary
from .solver import find_model
from .structures import Structure
from .syntax import (
    QUANTIFIERS,
    And,
    Formula,
    Implies,
    Not,
    Or,
    FalseC,
    Vocabulary,
    mk_power,
    parse,
    symbols,
    to_text,
)

WORD_LETTERS = ("E", "O", "Z")


@dataclass(frozen=True)
class FragmentSpec:
    name: str
    member: Callable[[Formula], bool]
    # (vocabulary, index) -> sentence; its range intersected with member covers the fragment
    enumerate: Callable[[Vocabulary, int], Formula]
    conjoin: Optional[Callable[[Formula, Formula], Formula]] = None
    # machine digest -> a sentence of the fragment equivalent to build_phi_M(machine)
    phi_m_cache: Optional[dict] = None


def _has_implication(f):
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Implies):
            return True
        if isinstance(g, Not):
            stack.append(g.child)
        elif isinstance(g, (And, Or)):
            stack.extend((g.left, g.right))
        elif isinstance(g, QUANTIFIERS):
            stack.append(g.body)
    return False


def eliminate_implications(f: Formula) -> Formula:
    """Rewrite every ``a -> b`` as ``!a | b``."""
    if isinstance(f, Implies):
        return Or(Not(eliminate_implications(f.left)), eliminate_implications(f.right))
    if isinstance(f, Not):
        return Not(eliminate_implications(f.child))
    if isinstance(f, (And, Or)):
        return type(f)(eliminate_implications(f.left), eliminate_implications(f.right))
    if isinstance(f, QUANTIFIERS):
        return type(f)(f.var, eliminate_implications(f.body))
    return f


# --- cache files -----------------------------------------------------------


def load_cache(text: str) -> dict:
    """Parse ``digest<TAB>sentence`` lines."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        digest, sep, sentence = line.partition("\t")
        if not sep:
            raise FragmentError(f"cache line {lineno}: expected '<digest>\\t<sentence>'")
        out[digest.strip()] = sentence.strip()
    return out


def dump_cache(entries: dict) -> str:
    return "".join(f"{digest}\t{text}\n" for digest, text in sorted(entries.items()))


def bundled_cache(name: str) -> dict:
    path = resources.files("finsat") / "data" / f"{name}.cache"
    if not path.is_file():
        return {}
    return load_cache(path.read_text())


# --- built-in fragments ----------------------------------------------------


def full_fo() -> FragmentSpec:
    return FragmentSpec("full-fo", lambda s: True, enumerate_sentences, And)


def implication_free() -> FragmentSpec:
    return FragmentSpec(
        "implication-free",
        lambda s: not _has_implication(s),
        enumerate_sentences,
        And,
        bundled_cache("implication-free"),
    )


def reject_all() -> FragmentSpec:
    return FragmentSpec("reject-all", lambda s: False, enumerate_sentences, And)


def counterexample_fragment(size_bound: int = 4) -> FragmentSpec:
    """``{false}`` together with every ``phi^n`` where ``phi`` has a model of size ``n``.

    Decidable membership and decidable finite satisfiability, but no conjunction map.
    """
    return FragmentSpec(
        "counterexample",
        lambda s: counterexample_member(s, size_bound) is not None,
        enumerate_sentences,
        None,
    )


FRAGMENTS = {
    "full-fo": full_fo,
    "implication-free": implication_free,
    "reject-all": reject_all,
    "counterexample": counterexample_fragment,
}


def get_fragment(name: str) -> FragmentSpec:
    try:
        return FRAGMENTS[name]()
    except KeyError:
        raise FragmentError(f"unknown fragment {name!r}; choose from {sorted(FRAGMENTS)}") from None


# --- translation -----------------------------------------------------------


def translate_over_words(
    frag: FragmentSpec,
    s: Formula,
    budget: int,
    letters: Sequence[str] = WORD_LETTERS,
    try_self: bool = True,
    state_cap: int = DEFAULT_STATE_CAP,
) -> Optional[Formula]:
    """A member of ``frag`` equivalent to ``s`` on all words over ``letters``.

    ``s`` itself is tried first when it is a member (``try_self``); after that the
    first ``budget`` enumerated sentences are tested in order.  Returns ``None``
    when the budget runs out.
    """
    vocab = Vocabulary.word(letters)
    if try_self and frag.member(s):
        return s
    for i in range(budget):
        psi = frag.enumerate(vocab, i)
        if not set(symbols(psi)) <= set(vocab.symbols):
            continue
        if not frag.member(psi):
            continue
        if word_equiv(psi, s, letters, state_cap) is None:
            return psi
    return None


def _left_spine(s):
    n = 1
    while isinstance(s, And):
        s = s.left
        n += 1
    return n


def counterexample_member(s: Formula, size_bound: int) -> Optional[int]:
    """``0`` for ``false``; ``n`` if ``s`` is ``phi^n`` with ``phi`` having a model of
    size ``n`` (largest such ``n``); ``None`` if ``s`` is not in the fragment."""
    if isinstance(s, FalseC):
        return 0
    for n in range(_left_spine(s), 0, -1):
        phi = s if n == 1 else s.right
        if n > 1 and mk_power(phi, n) != s:
            continue
        if n > size_bound:
            raise ResourceError(f"candidate power {n} exceeds the size bound {size_bound}")
        if find_model(phi, n) is not None:
            return n
    return None


@dataclass(frozen=True)
class FragmentSat:
    verdict: str  # "satisfiable" | "unsatisfiable" | "not-in-fragment"
    power: Optional[int] = None
    model: Optional[Structure] = None


def counterexample_finite_sat(s: Formula, size_bound: int) -> FragmentSat:
    n = counterexample_member(s, size_bound)
    if n is None:
        return FragmentSat("not-in-fragment")
    if n == 0:
        return FragmentSat("unsatisfiable", 0)
    phi = s if n == 1 else s.right
    return FragmentSat("satisfiable", n, find_model(phi, n))


def hardness_instance(
    frag: FragmentSpec,
    m: TmSpec,
    input_bits: str,
    budget: int,
    cache: Optional[dict] = None,
) -> Optional[Formula]:
    """A sentence of ``frag`` that is finitely satisfiable iff ``m`` halts on ``input_bits``.

    The machine part is fixed per machine: taken from ``cache`` (or the fragment's
    own cache), else ``build_phi_M(m)`` itself when the fragment contains it.
    Returns ``None`` when translating the input part exhausts ``budget``.
    """
    if frag.conjoin is None:
        raise FragmentError(f"fragment {frag.name!r} has no conjunction map")
    cache = cache if cache is not None else (frag.phi_m_cache or {})
    digest = m.digest()
    if digest in cache:
        phi_m = cache[digest]
        if isinstance(phi_m, str):
            phi_m = parse(phi_m, grid_vocabulary(m))
    else:
        phi_m = build_phi_M(m)
        if not frag.member(phi_m):
            raise FragmentError(f"fragment {frag.name!r} has no cached machine sentence for {digest[:12]}")
    phi_x = translate_over_words(frag, build_phi_x(input_bits), budget)
    if phi_x is None:
        return None
    return frag.conjoin(phi_m, phi_x)


def write_cache_file(path: Union[str, Path], machines: Sequence[TmSpec], rewrite=eliminate_implications):
    entries = {m.digest(): to_text(rewrite(build_phi_M(m))) for m in machines}
    Path(path).write_text(dump_cache(entries))
    return entries
