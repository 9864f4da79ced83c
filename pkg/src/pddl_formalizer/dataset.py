"""BlocksWorld task generation and on-disk dataset loading.

Layout of one domain directory::

    <root>/<domain>/domain.nl     natural-language domain description
    <root>/<domain>/domain.pddl   reference domain file
    <root>/<domain>/pNN.nl        natural-language problem description
    <root>/<domain>/pNN.pddl      reference problem file
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .ast import And, Atom, DomainAst, Not, ProblemAst, literals
from .parser import ParseError, parse_domain, parse_problem
from .printer import print_problem
from .semantics import check, errors_only

log = logging.getLogger(__name__)

MIN_BLOCKS = 3
MAX_BLOCKS = 8

Towers = Sequence[Sequence[int]]  # each tower listed bottom to top, blocks numbered from 1


def _package_text(name: str) -> str:
    return resources.files("pddl_formalizer").joinpath(name).read_text(encoding="utf-8")


BLOCKSWORLD_DOMAIN_TEXT = _package_text("blocksworld_domain.pddl")
BLOCKSWORLD_DOMAIN_DESCRIPTION = _package_text("prompts/blocksworld_domain_description.txt")


class DatasetError(Exception):
    """A dataset directory is missing required files or has a broken domain."""


class UnsupportedDescriptionError(ValueError):
    pass


@dataclass(frozen=True)
class TaskInstance:
    id: str
    domain_description: str
    problem_description: str
    truth_domain: DomainAst
    truth_problem: ProblemAst
    domain_name: str = "blocksworld"


@dataclass
class DatasetManifest:
    domain_name: str
    instances: list[TaskInstance] = field(default_factory=list)
    description_style: str = "templated"
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [inst.id for inst in self.instances]
        if len(ids) != len(set(ids)):
            raise DatasetError(f"duplicate instance ids in {self.domain_name}")


# ---------------------------------------------------------------------------
# problem description rendering


def _block_number(name: str) -> tuple[int, str]:
    m = re.fullmatch(r"block(\d+)", name)
    return (int(m.group(1)), name) if m else (10**9, name)


def _block_phrase(name: str) -> str:
    m = re.fullmatch(r"block(\d+)", name)
    return f"block {m.group(1)}" if m else name


_CLAUSE_ORDER = {"clear": 0, "arm-empty": 1, "holding": 2, "on": 3, "on-table": 4}


def _clause(atom: Atom) -> str:
    names = [_block_phrase(t) for t in atom.terms]
    if atom.predicate == "clear" and len(names) == 1:
        return f"{names[0]} is clear"
    if atom.predicate == "arm-empty" and not names:
        return "the hand is empty"
    if atom.predicate == "holding" and len(names) == 1:
        return f"I am holding {names[0]}"
    if atom.predicate == "on" and len(names) == 2:
        return f"{names[0]} is on top of {names[1]}"
    if atom.predicate == "on-table" and len(names) == 1:
        return f"{names[0]} is on the table"
    raise UnsupportedDescriptionError(f"cannot describe {atom}")


def _join(clauses: list[str]) -> str:
    if len(clauses) == 1:
        return clauses[0]
    if len(clauses) == 2:
        return f"{clauses[0]} and {clauses[1]}"
    return ", ".join(clauses[:-1]) + ", and " + clauses[-1]


def _clauses(atoms: Sequence[Atom]) -> list[str]:
    for atom in atoms:
        if atom.predicate not in _CLAUSE_ORDER:
            raise UnsupportedDescriptionError(f"unsupported predicate {atom.predicate}")
    ordered = sorted(atoms, key=lambda a: (_CLAUSE_ORDER[a.predicate], [_block_number(t) for t in a.terms]))
    return [_clause(a) for a in ordered]


def render_problem_description(truth_problem: ProblemAst) -> str:
    """Templated English for a BlocksWorld problem, in the benchmark's clause order."""
    goal = literals(truth_problem.goal)
    if any(not positive for positive, _ in goal):
        raise UnsupportedDescriptionError("negated goal conditions cannot be described")
    if not truth_problem.init or not goal:
        raise UnsupportedDescriptionError("an empty initial state or goal cannot be described")
    init_text = _join(_clauses(truth_problem.init))
    goal_text = _join(_clauses([atom for _, atom in goal]))
    return f"As initial conditions I have that, {init_text}.\nMy goal is to have that {goal_text}."


# ---------------------------------------------------------------------------
# generation


def random_towers(num_blocks: int, rng: random.Random) -> list[list[int]]:
    order = list(range(1, num_blocks + 1))
    rng.shuffle(order)
    towers: list[list[int]] = [[order[0]]]
    for block in order[1:]:
        if rng.random() < 0.5:
            towers.append([block])
        else:
            towers[-1].append(block)
    return towers


def _position_atoms(towers: Towers) -> list[Atom]:
    below: dict[int, int | None] = {}
    for tower in towers:
        for i, block in enumerate(tower):
            below[block] = tower[i - 1] if i else None
    atoms = []
    for block in sorted(below):
        under = below[block]
        if under is None:
            atoms.append(Atom("on-table", (f"block{block}",)))
        else:
            atoms.append(Atom("on", (f"block{block}", f"block{under}")))
    return atoms


def blocksworld_problem(name: str, init: Towers, goal: Towers) -> ProblemAst:
    blocks = sorted(b for tower in init for b in tower)
    if blocks != sorted(b for tower in goal for b in tower):
        raise ValueError("initial and goal configurations must use the same blocks")
    tops = sorted(tower[-1] for tower in init)
    init_atoms = _position_atoms(init) + [Atom("clear", (f"block{b}",)) for b in tops] + [Atom("arm-empty")]
    return ProblemAst(
        name=name,
        domain_name="blocksworld",
        objects=tuple((f"block{b}", "object") for b in blocks),
        init=tuple(init_atoms),
        goal=And(tuple(_position_atoms(goal))),
    )


def blocksworld_instance(instance_id: str, init: Towers, goal: Towers) -> TaskInstance:
    problem = blocksworld_problem(f"blocksworld-{instance_id}", init, goal)
    return TaskInstance(
        id=instance_id,
        domain_description=BLOCKSWORLD_DOMAIN_DESCRIPTION,
        problem_description=render_problem_description(problem),
        truth_domain=parse_domain(BLOCKSWORLD_DOMAIN_TEXT),
        truth_problem=problem,
    )


def generate_blocksworld(num_blocks: int, seed: int, instance_id: str = "p01") -> TaskInstance:
    if num_blocks < 1:
        raise ValueError("num_blocks must be at least 1")
    rng = random.Random(seed)
    init = random_towers(num_blocks, rng)
    goal = random_towers(num_blocks, rng)
    return blocksworld_instance(instance_id, init, goal)


def anchor_instance() -> TaskInstance:
    """Four blocks on the table, goal: the same; matches the benchmark's first problem."""
    table = [[1], [2], [3], [4]]
    return blocksworld_instance("p01", table, table)


def generate_dataset(count: int, seed: int) -> list[TaskInstance]:
    """``p01`` is the fixed anchor instance; the rest draw 3-8 blocks uniformly."""
    rng = random.Random(seed)
    instances = []
    for index in range(1, count + 1):
        if index == 1:
            instances.append(anchor_instance())
            continue
        num_blocks = rng.randint(MIN_BLOCKS, MAX_BLOCKS)
        instances.append(generate_blocksworld(num_blocks, rng.randrange(2**32), f"p{index:02d}"))
    return instances


def write_dataset(instances: Sequence[TaskInstance], root: Path, domain_name: str = "blocksworld") -> Path:
    out = Path(root) / domain_name
    out.mkdir(parents=True, exist_ok=True)
    (out / "domain.nl").write_text(BLOCKSWORLD_DOMAIN_DESCRIPTION, encoding="utf-8")
    (out / "domain.pddl").write_text(BLOCKSWORLD_DOMAIN_TEXT, encoding="utf-8")
    for inst in instances:
        (out / f"{inst.id}.nl").write_text(inst.problem_description + "\n", encoding="utf-8")
        (out / f"{inst.id}.pddl").write_text(print_problem(inst.truth_problem), encoding="utf-8")
    return out


# ---------------------------------------------------------------------------
# loading


def _natural_key(path: Path) -> tuple:
    m = re.fullmatch(r"p(\d+)", path.stem)
    return (int(m.group(1)) if m else 10**9, path.stem)


def load_dataset(root: Path | str) -> DatasetManifest:
    """Load one domain directory; bad instances are skipped with a warning."""
    root = Path(root)
    domain_pddl, domain_nl = root / "domain.pddl", root / "domain.nl"
    for required in (domain_pddl, domain_nl):
        if not required.is_file():
            raise DatasetError(f"missing {required}")
    try:
        domain = parse_domain(domain_pddl.read_text(encoding="utf-8"))
    except ParseError as err:
        raise DatasetError(f"{domain_pddl}: {err}") from err
    description = domain_nl.read_text(encoding="utf-8")

    manifest = DatasetManifest(domain_name=root.name)
    for pddl in sorted(root.glob("p*.pddl"), key=_natural_key):
        nl = pddl.with_suffix(".nl")
        if not nl.is_file():
            manifest.warnings.append(f"{pddl.stem}: missing {nl.name}, skipped")
            continue
        try:
            problem = parse_problem(pddl.read_text(encoding="utf-8"))
        except ParseError as err:
            manifest.warnings.append(f"{pddl.stem}: {err}, skipped")
            continue
        errors = errors_only(check(domain, problem))
        if errors:
            manifest.warnings.append(f"{pddl.stem}: reference files fail checking ({errors[0]}), skipped")
            continue
        manifest.instances.append(
            TaskInstance(
                id=pddl.stem,
                domain_description=description,
                problem_description=nl.read_text(encoding="utf-8").rstrip("\n"),
                truth_domain=domain,
                truth_problem=problem,
                domain_name=root.name,
            )
        )
    for warning in manifest.warnings:
        log.warning("dataset %s: %s", root.name, warning)
    return manifest


def load_datasets(root: Path | str) -> list[DatasetManifest]:
    """Accept either a single domain directory or a directory of domain directories."""
    root = Path(root)
    if (root / "domain.pddl").is_file():
        return [load_dataset(root)]
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} does not exist")
    manifests = [load_dataset(d) for d in sorted(root.iterdir()) if (d / "domain.pddl").is_file()]
    if not manifests:
        raise DatasetError(f"no domain directories found under {root}")
    return manifests
