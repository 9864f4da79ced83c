"""Shared test material: fixture access, AST strategies, and independent BlocksWorld oracles.

The oracles below model BlocksWorld directly on block numbers and never touch
the package's parser, grounder or search code.
"""

from __future__ import annotations

import itertools
from collections import deque
from pathlib import Path

from hypothesis import strategies as st

from pddl_formalizer.ast import ActionDecl, And, Atom, DomainAst, Not, PredicateDecl, ProblemAst
from pddl_formalizer.parser import RESERVED

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# random ASTs

names = st.from_regex(r"[a-z][a-z0-9_\-]{0,5}", fullmatch=True).filter(
    lambda n: n not in RESERVED and n != "object"
)


def _unique(strategy, min_size=0, max_size=4):
    return st.lists(strategy, min_size=min_size, max_size=max_size, unique=True)


@st.composite
def domain_asts(draw) -> DomainAst:
    type_names = draw(_unique(names, max_size=3))
    types = []
    for i, t in enumerate(type_names):
        parent = draw(st.sampled_from(["object", *type_names[:i]]))
        types.append((t, parent))
    type_pool = ["object", *type_names]

    pred_names = draw(_unique(names, max_size=4))
    predicates = []
    for p in pred_names:
        arity = draw(st.integers(0, 3))
        params = tuple((f"?v{i}", draw(st.sampled_from(type_pool))) for i in range(arity))
        predicates.append(PredicateDecl(p, params))

    def formula(variables: list[str]):
        if not predicates:
            return st.just(And())
        def literal():
            @st.composite
            def build(d):
                decl = d(st.sampled_from(predicates))
                terms = tuple(d(st.sampled_from(variables)) if variables else "c" for _ in range(decl.arity))
                atom = Atom(decl.name, terms)
                return Not(atom) if d(st.booleans()) else atom
            return build()
        return st.one_of(
            st.lists(literal(), max_size=4).map(lambda parts: And(tuple(parts))),
            literal().filter(lambda f: isinstance(f, Atom)),
        )

    actions = []
    for a in draw(_unique(names, max_size=3)):
        params = tuple((f"?p{i}", draw(st.sampled_from(type_pool))) for i in range(draw(st.integers(0, 3))))
        variables = [v for v, _ in params]
        actions.append(ActionDecl(a, params, draw(formula(variables)), draw(formula(variables))))

    requirements = tuple(draw(st.sampled_from([(), ("strips",), ("strips", "typing"), ("typing",)])))
    return DomainAst(draw(names), requirements, tuple(types), tuple(predicates), tuple(actions))


@st.composite
def problem_asts(draw) -> ProblemAst:
    obj_names = draw(_unique(names, max_size=5))
    type_pool = draw(_unique(names, max_size=2)) + ["object"]
    objects = tuple((o, draw(st.sampled_from(type_pool))) for o in obj_names)
    pool = obj_names or ["c"]
    atoms = st.builds(
        lambda p, terms: Atom(p, tuple(terms)),
        names,
        st.lists(st.sampled_from(pool), max_size=3),
    )
    init = tuple(draw(_unique(atoms, max_size=6)))
    literal = st.one_of(atoms, atoms.map(Not))
    goal = draw(st.one_of(st.lists(literal, max_size=4).map(lambda ps: And(tuple(ps))), atoms))
    requirements = tuple(draw(st.sampled_from([(), ("strips",)])))
    return ProblemAst(draw(names), draw(names), objects, init, goal, requirements)


# ---------------------------------------------------------------------------
# BlocksWorld oracle on block numbers
#
# A state is (towers, holding): towers is a frozenset of bottom-to-top tuples,
# holding is a block number or None.


def configurations(n: int) -> list[frozenset]:
    """Every arrangement of blocks 1..n into towers (hand empty)."""
    found = set()
    for order in itertools.permutations(range(1, n + 1)):
        for cuts in itertools.product((False, True), repeat=n - 1):
            towers, current = [], [order[0]]
            for block, cut in zip(order[1:], cuts):
                if cut:
                    towers.append(tuple(current))
                    current = [block]
                else:
                    current.append(block)
            towers.append(tuple(current))
            found.add(frozenset(towers))
    return sorted(found, key=lambda c: sorted(c))


def _successors(state):
    towers, holding = state
    if holding is None:
        for tower in towers:
            rest = towers - {tower}
            top = tower[-1]
            if len(tower) == 1:
                yield ("pickup", (top,)), (rest, top)
            else:
                yield ("unstack", (top, tower[-2])), (rest | {tower[:-1]}, top)
    else:
        yield ("putdown", (holding,)), (towers | {(holding,)}, None)
        for tower in towers:
            yield ("stack", (holding, tower[-1])), ((towers - {tower}) | {tower + (holding,)}, None)


def oracle_plan_length(init: frozenset, goal: frozenset) -> int:
    """Shortest plan length by exhaustive breadth-first enumeration."""
    start = (init, None)
    target = (goal, None)
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        state, depth = queue.popleft()
        if state == target:
            return depth
        for _, nxt in _successors(state):
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, depth + 1))
    raise AssertionError("blocksworld goal unreachable")


def _block(name: str) -> int:
    assert name.startswith("block")
    return int(name[5:])


def oracle_simulate(init: frozenset, goal: frozenset, steps) -> bool:
    """True iff the named plan steps are executable from ``init`` and end in ``goal``."""
    state = (init, None)
    for name, args in steps:
        move = (name, tuple(_block(a) for a in args))
        for label, nxt in _successors(state):
            if label == move:
                state = nxt
                break
        else:
            return False
    return state == (goal, None)


def towers_list(config: frozenset) -> list[list[int]]:
    return [list(t) for t in sorted(config)]


# ---------------------------------------------------------------------------
# scripted model outputs


def small_instances(count: int, num_blocks: int = 3):
    from pddl_formalizer.dataset import generate_blocksworld

    return [generate_blocksworld(num_blocks, seed=k, instance_id=f"p{k:02d}") for k in range(1, count + 1)]


def wrap(domain: str | None, problem: str | None) -> str:
    parts = ["<think>\nreasoning\n</think>\n"]
    if domain is not None:
        parts.append(f"<domain_file>\n{domain}\n</domain_file>\n")
    if problem is not None:
        parts.append(f"<problem_file>\n{problem}\n</problem_file>\n")
    return "".join(parts)


def truth_texts(inst) -> tuple[str, str]:
    from pddl_formalizer.printer import print_domain, print_problem

    return print_domain(inst.truth_domain).strip(), print_problem(inst.truth_problem).strip()


def correct_output(inst) -> str:
    return wrap(*truth_texts(inst))


def invalid_plan_output(inst) -> str:
    """Parses and solves, but the plan ends holding a block, so it never meets the real goal."""
    from dataclasses import replace

    from pddl_formalizer.printer import print_problem

    domain, _ = truth_texts(inst)
    first = inst.truth_problem.objects[0][0]
    problem = replace(inst.truth_problem, goal=And((Atom("holding", (first,)),)))
    return wrap(domain, print_problem(problem))


def broken_output(inst) -> str:
    domain, problem = truth_texts(inst)
    return wrap(domain, problem.rstrip()[:-1])


# ---------------------------------------------------------------------------
# seeded AST generator (plain RNG, for fixed-count acceptance runs)

_SYLLABLES = ["blk", "on", "top", "hold", "arm", "loc", "pkg", "cup", "go", "put", "x", "y"]


def _rand_name(rng, taken=()):
    while True:
        name = "-".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(1, 2))) + str(rng.randint(0, 99))
        if name not in taken:
            return name


def random_domain(rng) -> DomainAst:
    taken: set[str] = set()

    def fresh():
        n = _rand_name(rng, taken)
        taken.add(n)
        return n

    types = []
    for _ in range(rng.randint(0, 3)):
        types.append((fresh(), rng.choice(["object"] + [t for t, _ in types])))
    pool = ["object"] + [t for t, _ in types]
    predicates = [
        PredicateDecl(fresh(), tuple((f"?v{i}", rng.choice(pool)) for i in range(rng.randint(0, 3))))
        for _ in range(rng.randint(0, 5))
    ]

    def literal(variables):
        decl = rng.choice(predicates)
        atom = Atom(decl.name, tuple(rng.choice(variables) for _ in range(decl.arity)))
        return Not(atom) if rng.random() < 0.3 else atom

    def formula(variables):
        if not predicates or not variables and any(p.arity for p in predicates):
            return And()
        if rng.random() < 0.2:
            lit = literal(variables)
            return lit.atom if isinstance(lit, Not) else lit
        return And(tuple(literal(variables) for _ in range(rng.randint(0, 4))))

    actions = []
    for _ in range(rng.randint(0, 4)):
        params = tuple((f"?p{i}", rng.choice(pool)) for i in range(rng.randint(1, 3)))
        variables = [v for v, _ in params]
        actions.append(ActionDecl(fresh(), params, formula(variables), formula(variables)))
    requirements = rng.choice([(), ("strips",), ("strips", "typing")])
    return DomainAst(fresh(), requirements, tuple(types), tuple(predicates), tuple(actions))


def random_problem(rng) -> ProblemAst:
    objects = tuple((f"o{i}", rng.choice(["object", "thing"])) for i in range(rng.randint(0, 6)))
    names_ = [o for o, _ in objects] or ["o0"]
    preds = [_rand_name(rng) for _ in range(3)]

    def atom():
        return Atom(rng.choice(preds), tuple(rng.choice(names_) for _ in range(rng.randint(0, 2))))

    init = tuple(dict.fromkeys(atom() for _ in range(rng.randint(0, 8))))
    goal = And(tuple(atom() if rng.random() < 0.7 else Not(atom()) for _ in range(rng.randint(0, 4))))
    return ProblemAst(_rand_name(rng), _rand_name(rng), objects, init, goal)
