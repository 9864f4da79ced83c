"""Constrained-decoding grammar for the supported PDDL subset.

The grammar is written in Lark's EBNF dialect, which is also what grammar-
guided decoders such as Outlines consume, and it builds under Lark's LALR(1)
parser without conflicts. :func:`grammar_accepts` is a post-hoc recognizer
over that text; it shares no code with :mod:`pddl_formalizer.parser`.
"""

from __future__ import annotations

from functools import lru_cache

from lark import Lark
from lark.exceptions import GrammarError, LarkError

PDDL_GRAMMAR = r"""// PDDL subset: requirements :strips and :typing, typed lists, and/not formulas.
start: domain | problem

// ---- domain file ----
domain: "(" DEFINE "(" DOMAIN NAME ")" requirements? types? predicates? action* ")"
requirements: "(" ":requirements"i REQUIREMENT* ")"
types: "(" ":types"i typed_names ")"
predicates: "(" ":predicates"i predicate_decl* ")"
predicate_decl: "(" NAME typed_variables ")"
action: "(" ":action"i NAME parameters? precondition? effect? ")"
parameters: ":parameters"i "(" typed_variables ")"
precondition: ":precondition"i formula
effect: ":effect"i formula

formula: atom
       | "(" ")"
       | "(" AND formula* ")"
       | "(" NOT atom ")"
atom: "(" NAME term* ")"
?term: NAME | VARIABLE

// ---- problem file ----
problem: "(" DEFINE "(" PROBLEM NAME ")" "(" ":domain"i NAME ")" requirements? objects? init? goal ")"
objects: "(" ":objects"i typed_names ")"
init: "(" ":init"i ground_atom* ")"
goal: "(" ":goal"i ground_formula ")"
ground_formula: ground_atom
              | "(" ")"
              | "(" AND ground_formula* ")"
              | "(" NOT ground_atom ")"
ground_atom: "(" NAME NAME* ")"

// ---- typed lists: "a b - t c" types a and b as t, c as object ----
typed_names: typed_name*
typed_name: NAME | NAME "-" NAME
typed_variables: typed_variable*
typed_variable: VARIABLE | VARIABLE "-" NAME

// ---- terminals ----
DEFINE: "define"i
DOMAIN: "domain"i
PROBLEM: "problem"i
AND: "and"i
NOT: "not"i
REQUIREMENT: ":strips"i | ":typing"i
NAME: /[a-z][a-z0-9_\-]*/i
VARIABLE: /\?[a-z][a-z0-9_\-]*/i
COMMENT: /;[^\n]*/
WHITESPACE: /\s+/

%ignore COMMENT
%ignore WHITESPACE
"""


class GrammarUsageError(ValueError):
    """The grammar text handed to the recognizer does not build."""


def emit_grammar() -> str:
    return PDDL_GRAMMAR


@lru_cache(maxsize=8)
def _recognizer(grammar: str) -> Lark:
    try:
        return Lark(grammar, parser="lalr", start="start")
    except (GrammarError, LarkError) as exc:
        raise GrammarUsageError(f"grammar does not build as LALR(1): {exc}") from exc


def grammar_accepts(grammar: str, text: str) -> bool:
    """True iff ``text`` is derivable from ``grammar``."""
    parser = _recognizer(grammar)
    try:
        parser.parse(text)
    except LarkError:
        return False
    return True
