"""Multi-tape two-level morphology: rule interpreter, morphotactic parser
and grammar packs."""

from .engine import Derivation, InputError, analyze, generate, generate_derivations
from .featlogic import FeatureStructure, Var, parse_fs, unify
from .morphotactics import emit, parse
from .packfmt import GrammarPack, PackError, load_pack, parse_pack, validate

__all__ = [
    "Derivation", "FeatureStructure", "GrammarPack", "InputError", "PackError", "Var",
    "analyze", "emit", "generate", "generate_derivations", "load_pack", "parse",
    "parse_fs", "parse_pack", "unify", "validate",
]
