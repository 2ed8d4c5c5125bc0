"""Finite satisfiability for first-order sentences over relational vocabularies."""

from .errors import *  # noqa: F401,F403
from .syntax import Vocabulary, parse, to_text, free_vars, is_sentence, mk_power
from .structures import Structure, evaluate, holds, word_to_structure, structure_to_word
from .enumeration import enumerate_sentences, sentence_text
from .automata import formula_to_nfa, word_sat, word_equiv
from .reduction import TmSpec, parse_tm, simulate, reduce_pair, build_phi_x, build_phi_M, decode_run
from .solver import ground, solve_ground, find_model, find_model_up_to
from .fragments import FragmentSpec, get_fragment, translate_over_words, hardness_instance

__version__ = "0.1.0"
