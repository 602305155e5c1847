"""Common belief over KD45: parsing, model checking, proof checking,
countermodel search and the uni-modal to KD45_n model construction."""

from .syntax import (
    And, Atom, Bot, C, CHat, ClosureSet, Formula, Implies, Neg, Or, ParseError, TOP, Top,
    parse, proper_closure, subformulas, to_string,
)
from .kripke import (
    KripkeModel, ModelError, UniModalModel, check_frame_properties, cn_frame_property,
    generated_submodel, is_shift_reflexive, loads_model, dumps_model,
    reflexive_transitive_closure, transitive_closure, union_relation,
)
from .semantics import ClosureMode, extension, satisfies, valid_on_model
from .bisim import are_bisimilar, max_bisimulation
from .proof import build_chat_n, build_cn, check_proof, is_tautology_instance, match_axiom
from .search import SearchConfig, certify_valid_up_to, enumerate_kd45, find_countermodel
from .construct import certify_input, fold_construct, verify_construction, x_elimination

__version__ = "0.1.0"
