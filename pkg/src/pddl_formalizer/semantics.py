"""Symbol, arity and type checking for a domain/problem pair.

:func:`check` never raises; every finding is returned as a
:class:`SemanticError`. Findings with ``severity == "warning"`` do not make a
pair ill-formed (unsupported requirement flags are the only warnings).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .ast import ROOT_TYPE, DomainAst, Formula, ProblemAst, is_variable, literals
from .parser import ParseError

SUPPORTED_REQUIREMENTS = ("strips", "typing")

UNDEFINED_PREDICATE = "undefined-predicate"
UNDEFINED_TYPE = "undefined-type"
UNDEFINED_OBJECT = "undefined-object"
UNDEFINED_VARIABLE = "undefined-variable"
ARITY_MISMATCH = "arity-mismatch"
TYPE_MISMATCH = "type-mismatch"
DOMAIN_NAME_MISMATCH = "domain-name-mismatch"
UNSUPPORTED_REQUIREMENT = "unsupported-requirement"


@dataclass(frozen=True)
class SemanticError:
    kind: str
    file: str  # "domain" | "problem"
    context: str  # e.g. "action unstack", "init", "goal"
    symbol: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.file} file, {self.context}: {self.message}"


def errors_only(findings: Iterable[SemanticError]) -> list[SemanticError]:
    return [f for f in findings if f.severity == "error"]


class TypeHierarchy:
    """Declared types with ``object`` as the universal supertype."""

    def __init__(self, declared: Sequence[tuple[str, str]]):
        self.parent = {name: parent for name, parent in declared if name != ROOT_TYPE}

    def known(self, name: str) -> bool:
        return name == ROOT_TYPE or name in self.parent

    def is_subtype(self, sub: str, sup: str) -> bool:
        if sup == ROOT_TYPE or sub == sup:
            return True
        seen = set()
        current = sub
        while current in self.parent and current not in seen:
            seen.add(current)
            current = self.parent[current]
            if current == sup:
                return True
        return False


class _Checker:
    def __init__(self, domain: DomainAst, problem: ProblemAst):
        self.domain = domain
        self.problem = problem
        self.types = TypeHierarchy(domain.types)
        self.predicates = {p.name: p for p in domain.predicates}
        self.found: list[SemanticError] = []

    def report(self, kind: str, file: str, context: str, symbol: str, message: str, severity: str = "error") -> None:
        err = SemanticError(kind, file, context, symbol, message, severity)
        if err not in self.found:
            self.found.append(err)

    def requirements(self, file: str, reqs: Sequence[str]) -> None:
        for req in reqs:
            if req not in SUPPORTED_REQUIREMENTS:
                self.report(
                    UNSUPPORTED_REQUIREMENT, file, "requirements", f":{req}",
                    f"requirement :{req} is not supported (only :strips and :typing)", "warning",
                )

    def declared_types(self, file: str, context: str, items: Sequence[tuple[str, str]]) -> None:
        for _, type_name in items:
            if not self.types.known(type_name):
                self.report(UNDEFINED_TYPE, file, context, type_name, f"undefined type {type_name} (declare it in :types)")

    def atom_uses(self, file: str, context: str, formula: Formula, term_types: dict[str, str]) -> None:
        """Check predicate, arity, and per-argument symbol and type for every literal."""
        for _, atom in literals(formula):
            decl = self.predicates.get(atom.predicate)
            if decl is None:
                self.report(
                    UNDEFINED_PREDICATE, file, context, atom.predicate,
                    f"undefined predicate {atom.predicate} (declare it in :predicates)",
                )
            elif decl.arity != len(atom.terms):
                self.report(
                    ARITY_MISMATCH, file, context, atom.predicate,
                    f"predicate {atom.predicate} takes {decl.arity} argument(s) but is used with {len(atom.terms)} in {atom}",
                )
            for i, term in enumerate(atom.terms):
                term_type = term_types.get(term)
                if term_type is None:
                    if is_variable(term):
                        self.report(
                            UNDEFINED_VARIABLE, file, context, term,
                            f"undefined variable {term} (declare it in :parameters)",
                        )
                    elif file == "domain":
                        self.report(
                            UNDEFINED_OBJECT, file, context, term,
                            f"undefined object {term} (constants are not supported; use a parameter)",
                        )
                    else:
                        self.report(UNDEFINED_OBJECT, file, context, term, f"undefined object {term} (declare it in :objects)")
                    continue
                if decl is None or decl.arity != len(atom.terms):
                    continue
                expected = decl.params[i][1]
                if not self.types.is_subtype(term_type, expected):
                    self.report(
                        TYPE_MISMATCH, file, context, term,
                        f"argument {term} of {atom.predicate} has type {term_type} but {expected} is expected",
                    )

    def run(self) -> list[SemanticError]:
        d, p = self.domain, self.problem
        self.requirements("domain", d.requirements)
        for name, parent in d.types:
            if not self.types.known(parent):
                self.report(UNDEFINED_TYPE, "domain", "types", parent, f"undefined type {parent} (declare it in :types)")
        for pred in d.predicates:
            self.declared_types("domain", f"predicate {pred.name}", pred.params)
        for action in d.actions:
            context = f"action {action.name}"
            self.declared_types("domain", context, action.params)
            params = dict(action.params)
            self.atom_uses("domain", context, action.precondition, params)
            self.atom_uses("domain", context, action.effect, params)

        if p.domain_name != d.name:
            self.report(
                DOMAIN_NAME_MISMATCH, "problem", "domain", p.domain_name,
                f"problem refers to domain {p.domain_name} but the domain file defines {d.name}",
            )
        self.requirements("problem", p.requirements)
        self.declared_types("problem", "objects", p.objects)
        objects = dict(p.objects)
        for atom in p.init:
            self.atom_uses("problem", "init", atom, objects)
        self.atom_uses("problem", "goal", p.goal, objects)
        return self.found


def check(domain: DomainAst, problem: ProblemAst) -> list[SemanticError]:
    return _Checker(domain, problem).run()


def is_well_formed(domain: DomainAst, problem: ProblemAst) -> bool:
    return not errors_only(check(domain, problem))


# ---------------------------------------------------------------------------
# feedback text

_PARSE_PHRASES = {
    "unbalanced-parenthesis": "unbalanced parenthesis",
    "truncated-input": "truncated input (the file ends before the definition is complete)",
}
_FILE_RANK = {"domain": 0, "problem": 1}

Finding = Union[SemanticError, ParseError]


def _sort_key(item: Finding) -> tuple:
    if isinstance(item, ParseError):
        return (_FILE_RANK.get(item.file or "", 2), 0, "", item.line, item.column, item.kind)
    return (_FILE_RANK.get(item.file, 2), 1, item.context, 0, 0, item.kind, item.symbol)


def _line(item: Finding) -> str:
    if isinstance(item, ParseError):
        phrase = _PARSE_PHRASES.get(item.kind, item.message)
        return f"{item.file or 'unknown'} file, line {item.line}, column {item.column}: {phrase}"
    text = str(item)
    return text + " (warning)" if item.severity == "warning" else text


def format_feedback(errors: Iterable[Finding]) -> str:
    """One line per finding, ordered by file, then context, then kind."""
    return "\n".join(_line(e) for e in sorted(errors, key=_sort_key))
