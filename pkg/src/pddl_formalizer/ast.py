"""Syntax trees for the STRIPS/typing subset of PDDL.

All nodes are frozen dataclasses holding tuples, so structural equality and
hashing come for free. Identifiers are stored lower-cased; requirement flags
are stored without the leading colon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

ROOT_TYPE = "object"


def is_variable(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate, *self.terms)) + ")"


@dataclass(frozen=True)
class Not:
    atom: Atom

    def __str__(self) -> str:
        return f"(not {self.atom})"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join(("and", *map(str, self.parts))) + ")"


Formula = Union[Atom, Not, And]


def literals(formula: Formula) -> list[tuple[bool, Atom]]:
    """Flatten a formula into ``(positive, atom)`` pairs, in textual order."""
    if isinstance(formula, Atom):
        return [(True, formula)]
    if isinstance(formula, Not):
        return [(False, formula.atom)]
    out: list[tuple[bool, Atom]] = []
    for part in formula.parts:
        out.extend(literals(part))
    return out


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionDecl:
    name: str
    params: tuple[tuple[str, str], ...] = ()
    precondition: Formula = And()
    effect: Formula = And()


@dataclass(frozen=True)
class DomainAst:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[tuple[str, str], ...] = ()
    predicates: tuple[PredicateDecl, ...] = ()
    actions: tuple[ActionDecl, ...] = ()

    def predicate(self, name: str) -> PredicateDecl | None:
        for decl in self.predicates:
            if decl.name == name:
                return decl
        return None

    def action(self, name: str) -> ActionDecl | None:
        for decl in self.actions:
            if decl.name == name:
                return decl
        return None


@dataclass(frozen=True)
class ProblemAst:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[Atom, ...] = ()
    goal: Formula = And()
    requirements: tuple[str, ...] = ()
