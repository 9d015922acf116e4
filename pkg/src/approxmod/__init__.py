"""Recursive types with a later modality: equality, subtyping, the
lambda-A type system, Kripke semantics and the matching modal logics."""

from .syntax import (TOP, App, Arrow, Lam, Later, Mu, ParseError, TVar, Var, parse_term, parse_type,
                     print_term, print_type)
from .equality import EqMode, canon, comp_types, type_eq
from .subtyping import SubDeriv, check_subderiv, prove_sub
from .lam import bohm_tree, head_normalize, normalize
from .typing import TypDeriv, check_typderiv
from .classify import classify
from .kripke import Frame, FrameClass, model_check, validate_frame
from .logic import Proof, System, check_proof, countermodel, decide, prove

__all__ = [
    "TOP", "App", "Arrow", "Lam", "Later", "Mu", "ParseError", "TVar", "Var", "parse_term", "parse_type",
    "print_term", "print_type", "EqMode", "canon", "comp_types", "type_eq", "SubDeriv", "check_subderiv",
    "prove_sub", "bohm_tree", "head_normalize", "normalize", "TypDeriv", "check_typderiv", "classify",
    "Frame", "FrameClass", "model_check", "validate_frame", "Proof", "System", "check_proof",
    "countermodel", "decide", "prove",
]

__version__ = "0.1.0"
