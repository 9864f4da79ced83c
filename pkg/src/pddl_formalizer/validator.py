"""Replay a plan against reference PDDL and judge predicted files."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import DomainAst, ProblemAst, literals
from .planner import (
    AtomTable,
    Inapplicable,
    Plan,
    Solved,
    SolveOutcome,
    WorldState,
    apply,
    format_atom,
    instantiate,
)
from .semantics import TypeHierarchy

VALID = "valid"
PRECONDITION_VIOLATION = "precondition-violation"
GOAL_NOT_SATISFIED = "goal-not-satisfied"
UNKNOWN_ACTION = "unknown-action"
ARITY_ERROR = "arity-error"

SEMANTICALLY_CORRECT = "semantically-correct"
SEMANTICALLY_INCORRECT = "semantically-incorrect"
SYNTACTICALLY_INCORRECT = "syntactically-incorrect"

# higher is better; used by pass@N and best-round tracking
VERDICT_RANK = {SYNTACTICALLY_INCORRECT: 0, SEMANTICALLY_INCORRECT: 1, SEMANTICALLY_CORRECT: 2}


@dataclass(frozen=True)
class ValidationReport:
    verdict: str
    failing_step: tuple[int, str] | None = None  # (1-based index, step text)
    detail: str = ""
    unmet_conditions: tuple[str, ...] = ()
    unsatisfied_goals: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.verdict == VALID


def _step_text(name: str, args: tuple[str, ...]) -> str:
    return "(" + " ".join((name, *args)) + ")"


def _goal_masks(problem: ProblemAst, table: AtomTable) -> tuple[int, int]:
    pos = neg = 0
    for positive, atom in literals(problem.goal):
        bit = 1 << table.intern((atom.predicate, *atom.terms))
        if positive:
            pos |= bit
        else:
            neg |= bit
    return pos, neg


def _unsatisfied(state: WorldState, pos: int, neg: int, table: AtomTable) -> tuple[str, ...]:
    missing = [format_atom(a) for a in table.decode(pos & ~state.bits)]
    present = [f"(not {format_atom(a)})" for a in table.decode(neg & state.bits)]
    return tuple(missing + present)


def validate(truth_domain: DomainAst, truth_problem: ProblemAst, plan: Plan) -> ValidationReport:
    """Simulate ``plan`` from the reference initial state; report the first failure."""
    table = AtomTable()
    state = WorldState(table.mask((a.predicate, *a.terms) for a in truth_problem.init))
    goal_pos, goal_neg = _goal_masks(truth_problem, table)
    actions = {a.name.lower(): a for a in truth_domain.actions}
    objects = dict(truth_problem.objects)
    types = TypeHierarchy(truth_domain.types)

    for index, (name, args) in enumerate(plan.steps, 1):
        text = _step_text(name, args)
        action = actions.get(name.lower())
        if action is None:
            return ValidationReport(UNKNOWN_ACTION, (index, text), f"step {index} {text}: action {name} is not defined in the reference domain")
        if len(args) != len(action.params):
            return ValidationReport(
                ARITY_ERROR, (index, text),
                f"step {index} {text}: action {action.name} takes {len(action.params)} argument(s), got {len(args)}",
            )
        args = tuple(a.lower() for a in args)
        for arg, (_, type_name) in zip(args, action.params):
            if arg not in objects:
                return ValidationReport(UNKNOWN_ACTION, (index, text), f"step {index} {text}: object {arg} is not declared in the reference problem")
            if not types.is_subtype(objects[arg], type_name):
                return ValidationReport(
                    UNKNOWN_ACTION, (index, text),
                    f"step {index} {text}: object {arg} of type {objects[arg]} cannot fill a {type_name} parameter",
                )
        ground = instantiate(action, args, table)
        try:
            state = apply(state, ground)
        except Inapplicable as exc:
            unmet = [format_atom(a) for a in table.decode(exc.missing)]
            unmet += [f"(not {format_atom(a)})" for a in table.decode(exc.violated)]
            return ValidationReport(
                PRECONDITION_VIOLATION, (index, text),
                f"step {index} {text}: precondition not satisfied: {' '.join(unmet)}",
                unmet_conditions=tuple(unmet),
                unsatisfied_goals=_unsatisfied(state, goal_pos, goal_neg, table),
            )

    unsatisfied = _unsatisfied(state, goal_pos, goal_neg, table)
    if unsatisfied:
        return ValidationReport(
            GOAL_NOT_SATISFIED, None,
            f"after {len(plan)} step(s) the goal is not satisfied: {' '.join(unsatisfied)}",
            unsatisfied_goals=unsatisfied,
        )
    return ValidationReport(VALID)


def format_validator_feedback(report: ValidationReport) -> str:
    if report.valid:
        return "The plan is valid for the reference domain and problem."
    lines = []
    if report.verdict == PRECONDITION_VIOLATION:
        index, text = report.failing_step
        lines.append(f"Plan step {index} {text} cannot be executed.")
        lines.append("Unsatisfied preconditions: " + " ".join(report.unmet_conditions))
    elif report.verdict in (UNKNOWN_ACTION, ARITY_ERROR):
        index, text = report.failing_step
        lines.append(f"Plan step {index} {text} does not match any action of the reference domain.")
        lines.append(report.detail)
    else:
        lines.append("Every plan step can be executed, but the final state does not reach the goal.")
    if report.unsatisfied_goals:
        lines.append("Goal conditions still false: " + " ".join(report.unsatisfied_goals))
    return "\n".join(lines)


def semantic_verdict(
    truth_domain: DomainAst,
    truth_problem: ProblemAst,
    predicted_domain: DomainAst | None,
    predicted_problem: ProblemAst | None,
    solve_outcome: SolveOutcome | None,
) -> str:
    """Classify predicted files: syntax failure, found-and-valid plan, or neither.

    Pass ``None`` for a predicted file that failed to parse.
    """
    return judge(truth_domain, truth_problem, predicted_domain, predicted_problem, solve_outcome)[0]


def judge(
    truth_domain: DomainAst,
    truth_problem: ProblemAst,
    predicted_domain: DomainAst | None,
    predicted_problem: ProblemAst | None,
    solve_outcome: SolveOutcome | None,
) -> tuple[str, ValidationReport | None]:
    """Like :func:`semantic_verdict` but also returns the validation report, if any."""
    if predicted_domain is None or predicted_problem is None or solve_outcome is None:
        return SYNTACTICALLY_INCORRECT, None
    if solve_outcome.status == "ill-formed" and solve_outcome.syntax_errors:
        return SYNTACTICALLY_INCORRECT, None
    if isinstance(solve_outcome, Solved):
        report = validate(truth_domain, truth_problem, solve_outcome.plan)
        return (SEMANTICALLY_CORRECT if report.valid else SEMANTICALLY_INCORRECT), report
    return SEMANTICALLY_INCORRECT, None
