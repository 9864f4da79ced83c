import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import configurations, fixture, oracle_plan_length, oracle_simulate, towers_list
from pddl_formalizer.ast import ActionDecl, And, Atom, DomainAst, ProblemAst
from pddl_formalizer.dataset import blocksworld_problem
from pddl_formalizer.parser import parse_domain, parse_problem
from pddl_formalizer.planner import (
    AtomTable,
    GroundAction,
    GroundingLimitError,
    IllFormed,
    Inapplicable,
    Limits,
    Plan,
    PlanFormatError,
    Solved,
    Timeout,
    Unsolvable,
    WorldState,
    apply,
    ground,
    instantiate,
    solve,
    solve_text,
)
from pddl_formalizer.validator import validate

DOMAIN = parse_domain(fixture("appendix_domain.pddl"))
P01 = parse_problem(fixture("appendix_p01.pddl"))


def two_block_problem(goal):
    return ProblemAst(
        "two", "blocksworld", (("block1", "object"), ("block2", "object")),
        (Atom("on-table", ("block1",)), Atom("on-table", ("block2",)), Atom("clear", ("block1",)),
         Atom("clear", ("block2",)), Atom("arm-empty")),
        goal,
    )


def test_ground_counts():
    assert len(ground(DOMAIN, P01).actions) == 4 + 4 + 16 + 16
    assert len(ground(DOMAIN, two_block_problem(And())).actions) == 2 + 2 + 4 + 4


def test_ground_no_actions():
    empty = DomainAst("blocksworld", predicates=DOMAIN.predicates)
    assert ground(empty, P01).actions == []


def test_ground_add_delete_disjoint_and_sorted():
    g = ground(DOMAIN, P01)
    assert all(a.add & a.delete == 0 for a in g.actions)
    keys = [(a.name, a.args) for a in g.actions]
    assert keys == sorted(keys)


def test_ground_respects_types():
    domain = parse_domain("(define (domain d) (:types a b) (:predicates (p ?x - a)) (:action act :parameters (?x - a) :effect (p ?x)))")
    problem = parse_problem("(define (problem q) (:domain d) (:objects x1 x2 - a y - b) (:goal (p x1)))")
    assert [a.args for a in ground(domain, problem).actions] == [("x1",), ("x2",)]


def test_grounding_limit():
    with pytest.raises(GroundingLimitError):
        ground(DOMAIN, P01, max_ground_actions=39)
    outcome = solve(DOMAIN, P01, Limits(max_ground_actions=10))
    assert isinstance(outcome, IllFormed) and outcome.syntax_errors == []


def test_monotone_grounding():
    small = ground(DOMAIN, two_block_problem(And()))
    bigger = blocksworld_problem("three", [[1], [2], [3]], [[1], [2], [3]])
    big = ground(DOMAIN, bigger)
    assert {(a.name, a.args) for a in small.actions} <= {(a.name, a.args) for a in big.actions}


def test_solve_p01_empty_plan():
    outcome = solve(DOMAIN, P01)
    assert isinstance(outcome, Solved) and len(outcome.plan) == 0


def test_solve_two_block_stack():
    outcome = solve(DOMAIN, two_block_problem(And((Atom("on", ("block1", "block2")),))))
    assert outcome.plan.steps == (("pickup", ("block1",)), ("stack", ("block1", "block2")))


def test_solve_unsolvable_mutex_goal():
    goal = And((Atom("on-table", ("block1",)), Atom("holding", ("block1",))))
    assert isinstance(solve(DOMAIN, two_block_problem(goal)), Unsolvable)


def test_solve_ill_formed():
    bad = parse_domain(fixture("revision_syntax_incorrect.pddl"))
    outcome = solve(bad, P01)
    assert isinstance(outcome, IllFormed) and outcome.syntax_errors


def test_expansion_limit_gives_timeout():
    problem = blocksworld_problem("hard", [[1, 2, 3, 4]], [[4, 3, 2, 1]])
    outcome = solve(DOMAIN, problem, Limits(max_expansions=5))
    assert isinstance(outcome, Timeout)


def test_solve_text_reports_parse_errors():
    outcome = solve_text(fixture("appendix_domain.pddl")[:-3], fixture("appendix_p01.pddl"))
    assert isinstance(outcome, IllFormed) and outcome.syntax_errors[0].kind == "unbalanced-parenthesis"


def test_apply_pickup_on_p01():
    g = ground(DOMAIN, P01)
    pickup = next(a for a in g.actions if a.step == ("pickup", ("block1",)))
    after = apply(g.init, pickup)
    atoms = set(g.table.decode(after.bits))
    assert ("holding", "block1") in atoms
    for gone in [("arm-empty",), ("clear", "block1"), ("on-table", "block1")]:
        assert gone not in atoms


def test_apply_noop_and_inapplicable():
    state = WorldState(0b1011)
    assert apply(state, GroundAction("noop", (), 0, 0, 0, 0)) == state
    g = ground(DOMAIN, P01)
    stack = next(a for a in g.actions if a.step == ("stack", ("block1", "block2")))
    with pytest.raises(Inapplicable):
        apply(g.init, stack)


def test_delete_then_add_and_negative_preconditions():
    domain = parse_domain(
        "(define (domain d) (:predicates (p) (q))"
        " (:action flip :precondition (not (q)) :effect (and (p) (not (p)) (q))))"
    )
    table = AtomTable()
    action = instantiate(domain.actions[0], (), table)
    after = apply(WorldState(0), action)
    assert set(table.decode(after.bits)) == {("p",), ("q",)}
    with pytest.raises(Inapplicable):
        apply(after, action)


def test_plan_text_round_trip():
    plan = Plan((("pickup", ("block1",)), ("stack", ("block1", "block2"))))
    assert Plan.from_text(plan.to_text()) == plan
    assert Plan.from_text("; comment\n0: (PICKUP Block1)\n\n1: (stack block1 block2)\n") == plan
    with pytest.raises(PlanFormatError):
        Plan.from_text("pickup block1")


def test_determinism():
    problem = blocksworld_problem("d", [[1, 2], [3]], [[3, 2, 1]])
    assert solve(DOMAIN, problem) == solve(DOMAIN, problem)


ALL_3 = configurations(3)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(ALL_3), st.sampled_from(ALL_3))
def test_optimal_against_oracle(init, goal):
    problem = blocksworld_problem("o", towers_list(init), towers_list(goal))
    outcome = solve(DOMAIN, problem)
    assert isinstance(outcome, Solved)
    assert len(outcome.plan) == oracle_plan_length(init, goal)
    assert oracle_simulate(init, goal, outcome.plan.steps)
    assert validate(DOMAIN, problem, outcome.plan).valid


def test_oracle_enumeration_counts():
    # unordered sets of towers over n labelled blocks: 1, 3, 13, 73
    assert [len(configurations(n)) for n in (1, 2, 3, 4)] == [1, 3, 13, 73]
