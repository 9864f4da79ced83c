"""PDDL toolchain and evaluation harness for LLM-generated planning files."""

from .ast import ActionDecl, And, Atom, DomainAst, Not, PredicateDecl, ProblemAst
from .extract import ExtractionError, extract_pddl_blocks
from .grammar import emit_grammar, grammar_accepts
from .parser import ParseError, parse_domain, parse_problem
from .planner import Limits, Plan, apply, ground, solve
from .printer import print_domain, print_problem
from .semantics import SemanticError, check, format_feedback
from .validator import format_validator_feedback, semantic_verdict, validate

__version__ = "0.1.0"
