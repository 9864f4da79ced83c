"""Grounding and breadth-first search over STRIPS states.

States are Python ints used as bitsets over an :class:`AtomTable`; bit ``i``
set means atom ``i`` is true (closed world: unset means false).
"""

from __future__ import annotations

import re
import time
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence, Union

from .ast import Atom, ActionDecl, DomainAst, ProblemAst, literals
from .parser import ParseError, parse_domain, parse_problem
from .semantics import SemanticError, TypeHierarchy, check, errors_only

GroundAtom = tuple[str, ...]  # (predicate, *objects)

DEFAULT_MAX_EXPANSIONS = 1_000_000
DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_GROUND_ACTIONS = 200_000


def _bits(ids: Iterable[int]) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def _ids(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


class AtomTable:
    """Interning table from ground atoms to dense integer ids."""

    def __init__(self) -> None:
        self.atoms: list[GroundAtom] = []
        self.index: dict[GroundAtom, int] = {}

    def intern(self, atom: GroundAtom) -> int:
        idx = self.index.get(atom)
        if idx is None:
            idx = len(self.atoms)
            self.atoms.append(atom)
            self.index[atom] = idx
        return idx

    def mask(self, atoms: Iterable[GroundAtom]) -> int:
        return _bits(self.intern(a) for a in atoms)

    def decode(self, mask: int) -> list[GroundAtom]:
        return sorted(self.atoms[i] for i in _ids(mask))

    def __len__(self) -> int:
        return len(self.atoms)


def format_atom(atom: GroundAtom) -> str:
    return "(" + " ".join(atom) + ")"


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    add: int
    delete: int

    @property
    def preconditions_pos(self) -> frozenset[int]:
        return _ids(self.pre_pos)

    @property
    def preconditions_neg(self) -> frozenset[int]:
        return _ids(self.pre_neg)

    @property
    def step(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)

    def __str__(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"


@dataclass(frozen=True)
class WorldState:
    bits: int = 0

    @property
    def atoms(self) -> frozenset[int]:
        return _ids(self.bits)

    def holds(self, atom_id: int) -> bool:
        return bool(self.bits >> atom_id & 1)


class Inapplicable(Exception):
    """Raised by :func:`apply`; carries the offending precondition atoms."""

    def __init__(self, action: GroundAction, missing: int, violated: int):
        super().__init__(f"{action} is not applicable")
        self.action = action
        self.missing = missing  # positive preconditions that are false
        self.violated = violated  # negative preconditions that are true


def apply(state: WorldState, action: GroundAction) -> WorldState:
    """STRIPS transition: ``(state - delete) | add``; deletes happen before adds."""
    missing = action.pre_pos & ~state.bits
    violated = action.pre_neg & state.bits
    if missing or violated:
        raise Inapplicable(action, missing, violated)
    return WorldState((state.bits & ~action.delete) | action.add)


def instantiate(action: ActionDecl, args: Sequence[str], table: AtomTable) -> GroundAction:
    binding = dict(zip((v for v, _ in action.params), args))

    def ground(atom: Atom) -> int:
        return table.intern((atom.predicate, *(binding.get(t, t) for t in atom.terms)))

    pre_pos = pre_neg = add = delete = 0
    for positive, atom in literals(action.precondition):
        if positive:
            pre_pos |= 1 << ground(atom)
        else:
            pre_neg |= 1 << ground(atom)
    for positive, atom in literals(action.effect):
        if positive:
            add |= 1 << ground(atom)
        else:
            delete |= 1 << ground(atom)
    # an atom both added and deleted ends up true
    return GroundAction(action.name, tuple(args), pre_pos, pre_neg, add, delete & ~add)


class GroundingLimitError(Exception):
    """More ground actions than the configured maximum."""

    kind = "resource-limit"


@dataclass
class Grounding:
    table: AtomTable
    actions: list[GroundAction]
    init: WorldState
    goal_pos: int
    goal_neg: int

    def satisfies_goal(self, state: WorldState) -> bool:
        return (state.bits & self.goal_pos) == self.goal_pos and not state.bits & self.goal_neg


def ground(
    domain: DomainAst, problem: ProblemAst, max_ground_actions: int = DEFAULT_MAX_GROUND_ACTIONS
) -> Grounding:
    """Instantiate every action over all type-compatible object tuples.

    Assumes ``check(domain, problem)`` reported no errors.
    """
    types = TypeHierarchy(domain.types)
    candidates_by_type: dict[str, list[str]] = {}

    def candidates(type_name: str) -> list[str]:
        if type_name not in candidates_by_type:
            candidates_by_type[type_name] = [o for o, t in problem.objects if types.is_subtype(t, type_name)]
        return candidates_by_type[type_name]

    total = 0
    for action in domain.actions:
        count = 1
        for _, type_name in action.params:
            count *= len(candidates(type_name))
        total += count
        if total > max_ground_actions:
            raise GroundingLimitError(
                f"grounding would produce more than {max_ground_actions} actions"
            )

    table = AtomTable()
    init = WorldState(table.mask((a.predicate, *a.terms) for a in problem.init))
    goal_pos = goal_neg = 0
    for positive, atom in literals(problem.goal):
        bit = 1 << table.intern((atom.predicate, *atom.terms))
        if positive:
            goal_pos |= bit
        else:
            goal_neg |= bit

    actions = []
    for action in domain.actions:
        pools = [candidates(t) for _, t in action.params]
        for args in product(*pools):
            actions.append(instantiate(action, args, table))
    actions.sort(key=lambda a: (a.name, a.args))
    return Grounding(table, actions, init, goal_pos, goal_neg)


# ---------------------------------------------------------------------------
# plans

_STEP_RE = re.compile(r"^\s*(?:\d+\s*:\s*)?\(\s*([^()\s]+)((?:\s+[^()\s]+)*)\s*\)\s*(?:\[[^\]]*\])?\s*$")


class PlanFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Plan:
    steps: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def to_text(self) -> str:
        return "".join("(" + " ".join((name, *args)) + ")\n" for name, args in self.steps)

    @classmethod
    def from_text(cls, text: str) -> "Plan":
        """Read one ``(name arg ...)`` step per line; ``;`` comments and blank lines are skipped."""
        steps = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split(";", 1)[0].strip()
            if not line:
                continue
            m = _STEP_RE.match(line)
            if m is None:
                raise PlanFormatError(f"line {lineno}: cannot read plan step {raw.strip()!r}")
            steps.append((m.group(1).lower(), tuple(a.lower() for a in m.group(2).split())))
        return cls(tuple(steps))


# ---------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class Limits:
    max_expansions: int = DEFAULT_MAX_EXPANSIONS
    timeout: float = DEFAULT_TIMEOUT
    max_ground_actions: int = DEFAULT_MAX_GROUND_ACTIONS


@dataclass(frozen=True)
class Solved:
    plan: Plan
    expansions: int = 0
    status = "solved"


@dataclass(frozen=True)
class Unsolvable:
    expansions: int = 0
    status = "unsolvable"


@dataclass(frozen=True)
class Timeout:
    expansions: int = 0
    reason: str = ""
    status = "timeout"


@dataclass(frozen=True)
class IllFormed:
    errors: tuple = field(default_factory=tuple)
    status = "ill-formed"

    @property
    def syntax_errors(self) -> list[Union[ParseError, SemanticError]]:
        return [e for e in self.errors if isinstance(e, (ParseError, SemanticError))]


SolveOutcome = Union[Solved, Unsolvable, Timeout, IllFormed]


def search(grounding: Grounding, limits: Limits = Limits()) -> SolveOutcome:
    """Breadth-first search with duplicate detection; shortest plan first."""
    compiled = [(a.pre_pos, a.pre_neg, a.add, a.delete) for a in grounding.actions]
    goal_pos, goal_neg = grounding.goal_pos, grounding.goal_neg
    start = grounding.init.bits
    if (start & goal_pos) == goal_pos and not start & goal_neg:
        return Solved(Plan(), 0)

    parent: dict[int, tuple[int, int] | None] = {start: None}
    frontier = deque([start])
    expansions = 0
    deadline = time.monotonic() + limits.timeout
    while frontier:
        state = frontier.popleft()
        expansions += 1
        if expansions > limits.max_expansions:
            return Timeout(expansions - 1, f"expansion limit {limits.max_expansions} reached")
        if not expansions & 0x3FF and time.monotonic() > deadline:
            return Timeout(expansions, f"time limit {limits.timeout:g}s reached")
        for idx, (pre, neg, add, delete) in enumerate(compiled):
            if state & pre != pre or state & neg:
                continue
            succ = (state & ~delete) | add
            if succ in parent:
                continue
            parent[succ] = (state, idx)
            if (succ & goal_pos) == goal_pos and not succ & goal_neg:
                return Solved(_extract(parent, succ, grounding.actions), expansions)
            frontier.append(succ)
    return Unsolvable(expansions)


def _extract(parent: dict, state: int, actions: list[GroundAction]) -> Plan:
    steps = []
    link = parent[state]
    while link is not None:
        prev, idx = link
        steps.append(actions[idx].step)
        link = parent[prev]
    return Plan(tuple(reversed(steps)))


def solve(domain: DomainAst, problem: ProblemAst, limits: Limits = Limits()) -> SolveOutcome:
    errors = errors_only(check(domain, problem))
    if errors:
        return IllFormed(tuple(errors))
    try:
        grounding = ground(domain, problem, limits.max_ground_actions)
    except GroundingLimitError as exc:
        return IllFormed((exc,))
    return search(grounding, limits)


def solve_text(domain_text: str, problem_text: str, limits: Limits = Limits()) -> SolveOutcome:
    """Parse, check and solve raw PDDL text."""
    errors: list[ParseError] = []
    domain = problem = None
    try:
        domain = parse_domain(domain_text)
    except ParseError as err:
        errors.append(err)
    try:
        problem = parse_problem(problem_text)
    except ParseError as err:
        errors.append(err)
    if errors:
        return IllFormed(tuple(errors))
    return solve(domain, problem, limits)
