"""Minimal implicational logic: tree proofs, DAG certificates and their checker."""

from .formula import (
    Atom, Bitstring, Formula, Imp, ParseError, SubformulaOrder, SyntaxTree, decode, encode,
    parse_formula, remove, right_ancestral, subformula_order, subformulas, union,
)
from .nd import (
    Derivation, DerivationError, DependencyError, MappingError, RuleShapeError, branches,
    conclusion, emnd_map, e_part_types, height, is_expanded, is_normal, levels,
    open_assumptions, proof_search, validate_derivation,
)
from .redundancy import MatrixOccurrences, RedundancyParams, find_repeats, lri
from .rdag import (
    CompressParams, RDagProof, collapse, compress, detach_link, from_derivation, initials,
    validate_structure,
)
from .checker import Outcome, Verdict, check, local_entailment, rdh
from .oracle import decide, enumerate_formulas, fib_closed, fib_family

__version__ = "0.1.0"
