from helpers import small_instances
from pddl_formalizer.llm import MockBackend
from pddl_formalizer.mockgen import (
    CORRECT,
    MISSING_TAGS,
    PARSE_FAULT,
    SEMANTIC_FAULT,
    UNDEFINED_FAULT,
    response,
    synthesize,
)
from pddl_formalizer.pipelines import PASS_AT_N, REVISE_SOLVER, PipelineConfig, assess, run_pipeline
from pddl_formalizer.extract import find_block
from pddl_formalizer.validator import SEMANTICALLY_CORRECT, SEMANTICALLY_INCORRECT, SYNTACTICALLY_INCORRECT

INSTANCES = small_instances(4)


def verdict(inst, outcome):
    text = response(inst, "full", outcome)
    d, p = find_block(text, "domain"), find_block(text, "problem")
    if d is None or p is None:
        return SYNTACTICALLY_INCORRECT
    return assess(inst, d, p).verdict


def test_outcome_kinds():
    inst = INSTANCES[1]
    assert verdict(inst, CORRECT) == SEMANTICALLY_CORRECT
    assert verdict(inst, PARSE_FAULT) == SYNTACTICALLY_INCORRECT
    assert verdict(inst, UNDEFINED_FAULT) == SYNTACTICALLY_INCORRECT
    assert verdict(inst, MISSING_TAGS) == SYNTACTICALLY_INCORRECT
    assert verdict(inst, SEMANTIC_FAULT) in (SEMANTICALLY_INCORRECT, SEMANTICALLY_CORRECT)


def test_synthesized_script_covers_every_request():
    configs = [
        PipelineConfig(pre_inference="summary"),
        PipelineConfig(pre_inference="sequential"),
        PipelineConfig(inference=PASS_AT_N, n=3),
        PipelineConfig(inference=REVISE_SOLVER, rounds=3),
    ]
    script = synthesize(INSTANCES, configs, seed=1)
    backend = MockBackend(script)
    for inst in INSTANCES:
        for config in configs:
            run_pipeline(config, inst, backend)
    assert script.to_json() == synthesize(INSTANCES, configs, seed=1).to_json()
    assert script.to_json() != synthesize(INSTANCES, configs, seed=2).to_json()
