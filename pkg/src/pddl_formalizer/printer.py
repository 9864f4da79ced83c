"""Pretty-printer producing text that re-parses to the same AST."""

from __future__ import annotations

from itertools import groupby

from .ast import ROOT_TYPE, ActionDecl, And, DomainAst, Formula, ProblemAst


def _typed_list(items: tuple[tuple[str, str], ...]) -> str:
    groups = [(t, [name for name, _ in g]) for t, g in groupby(items, key=lambda item: item[1])]
    chunks: list[str] = []
    for i, (type_name, names) in enumerate(groups):
        # a bare trailing group means "object"; anywhere else it would inherit the next type
        if type_name == ROOT_TYPE and i == len(groups) - 1:
            chunks.append(" ".join(names))
        else:
            chunks.append(" ".join(names) + f" - {type_name}")
    return " ".join(chunks)


def format_formula(formula: Formula) -> str:
    return str(formula)


def _action(action: ActionDecl) -> str:
    lines = [
        f"\t(:action {action.name}",
        f"\t\t:parameters ({_typed_list(action.params)})",
        f"\t\t:precondition {format_formula(action.precondition)}",
        f"\t\t:effect {format_formula(action.effect)}",
        "\t)",
    ]
    return "\n".join(lines)


def print_domain(ast: DomainAst) -> str:
    lines = ["(define", f"\t(domain {ast.name})"]
    if ast.requirements:
        lines.append("\t(:requirements " + " ".join(f":{r}" for r in ast.requirements) + ")")
    if ast.types:
        lines.append(f"\t(:types {_typed_list(ast.types)})")
    if ast.predicates:
        lines.append("\t(:predicates")
        for pred in ast.predicates:
            params = _typed_list(pred.params)
            lines.append(f"\t\t({pred.name}{' ' + params if params else ''})")
        lines.append("\t)")
    lines.extend(_action(a) for a in ast.actions)
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(ast: ProblemAst) -> str:
    lines = ["(define", f"\t(problem {ast.name})", f"\t(:domain {ast.domain_name})"]
    if ast.requirements:
        lines.append("\t(:requirements " + " ".join(f":{r}" for r in ast.requirements) + ")")
    lines.append(f"\t(:objects {_typed_list(ast.objects)})")
    lines.append("\t(:init")
    lines.extend(f"\t\t{atom}" for atom in ast.init)
    lines.append("\t)")
    goal = ast.goal
    if isinstance(goal, And) and goal.parts:
        lines.append("\t(:goal (and")
        lines.extend(f"\t\t{part}" for part in goal.parts)
        lines.append("\t))")
    else:
        lines.append(f"\t(:goal {format_formula(goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"
