"""Typed S-expression DSL for grid-observation policies."""

from .ast import Node, Program
from .grammar import (
    BASE_RULES,
    ArityError,
    DSLError,
    DuplicateName,
    Grammar,
    Rule,
    TypeMismatch,
    TypeTag,
    UnknownSymbol,
    UnsatisfiableType,
    base_grammar,
    hole_rule,
)
from .interpreter import Comparison, EvalTrace, compile_program, evaluate, trace_evaluate
from .parser import ParseError, parse_program, parse_program_file, print_program, read_program_file
from .sampling import sample_program
from .typecheck import Violation, is_well_typed, type_check
from .values import Action, Cell, Observation

__all__ = [
    "Action", "ArityError", "BASE_RULES", "Cell", "Comparison", "DSLError", "DuplicateName",
    "EvalTrace", "Grammar", "Node", "Observation", "ParseError", "Program", "Rule",
    "TypeMismatch", "TypeTag", "UnknownSymbol", "UnsatisfiableType", "Violation",
    "base_grammar", "compile_program", "evaluate", "hole_rule", "is_well_typed",
    "parse_program", "parse_program_file", "print_program", "read_program_file",
    "sample_program", "trace_evaluate", "type_check",
]
