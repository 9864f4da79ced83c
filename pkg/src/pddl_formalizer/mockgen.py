"""Synthetic mock scripts: plausible model outputs, some correct and some faulty.

Each (instance, stage, attempt) entry is drawn from a string-seeded RNG, so a
script is a pure function of the instances, the pipelines, and the seed.
"""

from __future__ import annotations

import random
from typing import Sequence

from . import prompts
from .ast import And, ProblemAst, literals
from .dataset import TaskInstance
from .llm import MockScript
from .pipelines import NONE, PASS_AT_N, SEQUENTIAL, SUMMARY, PipelineConfig
from .printer import print_domain, print_problem

CORRECT = "correct"
PARSE_FAULT = "parse-fault"
SEMANTIC_FAULT = "semantic-fault"
UNDEFINED_FAULT = "undefined-fault"
MISSING_TAGS = "missing-tags"

# rough mix of outcomes for one generation
OUTCOME_WEIGHTS = {CORRECT: 5, PARSE_FAULT: 2, SEMANTIC_FAULT: 2, UNDEFINED_FAULT: 1, MISSING_TAGS: 1}


def _rng(seed: int, *parts: object) -> random.Random:
    return random.Random(":".join(str(p) for p in (seed, *parts)))


def _truncate(text: str) -> str:
    return text.rstrip().rstrip(")")


def _partial_goal(problem: ProblemAst) -> ProblemAst:
    atoms = [atom for _, atom in literals(problem.goal)]
    keep = atoms[:1] if len(atoms) > 1 else []
    # an empty or smaller goal yields plans that miss the real goal
    return ProblemAst(problem.name, problem.domain_name, problem.objects, problem.init, And(tuple(keep)), problem.requirements)


def faulty_files(instance: TaskInstance, outcome: str) -> tuple[str, str]:
    domain = print_domain(instance.truth_domain)
    problem = print_problem(instance.truth_problem)
    if outcome == PARSE_FAULT:
        return domain, _truncate(problem)
    if outcome == SEMANTIC_FAULT:
        return domain, print_problem(_partial_goal(instance.truth_problem))
    if outcome == UNDEFINED_FAULT:
        return domain.replace("(arm-empty)", "(hand-empty)", 1), problem
    return domain, problem


def _wrap_both(domain: str, problem: str) -> str:
    return f"<think>\nWorking through the description.\n</think>\n<domain_file>\n{domain}\n</domain_file>\n<problem_file>\n{problem}\n</problem_file>\n"


def response(instance: TaskInstance, stage: str, outcome: str) -> str:
    domain, problem = faulty_files(instance, outcome)
    if outcome == MISSING_TAGS:
        return "<think>\nI am not sure.\n</think>\nThe domain has four actions.\n"
    if stage == prompts.SUMMARY:
        return f"<summary>\n{instance.domain_description}\n{instance.problem_description}\n</summary>\n"
    if stage == prompts.DOMAIN_ONLY:
        return f"<domain_file>\n{domain}\n</domain_file>\n"
    if stage == prompts.PROBLEM_ONLY:
        return f"<problem_file>\n{problem}\n</problem_file>\n"
    return _wrap_both(domain, problem)


def _draw(rng: random.Random) -> str:
    return rng.choices(list(OUTCOME_WEIGHTS), weights=list(OUTCOME_WEIGHTS.values()))[0]


def synthesize(instances: Sequence[TaskInstance], configs: Sequence[PipelineConfig], seed: int = 0) -> MockScript:
    """A script covering every request the given pipelines can issue."""
    attempts_needed: dict[str, int] = {}
    for config in configs:
        stages = {NONE: [prompts.FULL], SUMMARY: [prompts.SUMMARY, prompts.FULL], SEQUENTIAL: [prompts.DOMAIN_ONLY, prompts.PROBLEM_ONLY]}[config.pre_inference]
        count = config.n if config.inference == PASS_AT_N else 1
        for stage in stages:
            attempts_needed[stage] = max(attempts_needed.get(stage, 0), count)
        if config.is_revision:
            attempts_needed[prompts.REVISION] = max(attempts_needed.get(prompts.REVISION, 0), config.rounds)

    script = MockScript()
    for instance in instances:
        for stage, count in sorted(attempts_needed.items()):
            first = 1 if stage == prompts.REVISION else 0
            for attempt in range(first, count):
                outcome = _draw(_rng(seed, instance.domain_name, instance.id, stage, attempt))
                script.add(instance.id, stage, attempt, response(instance, stage, outcome))
    return script
