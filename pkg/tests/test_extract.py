import pytest

from pddl_formalizer.extract import ExtractionError, extract_pddl_blocks, find_block

D = "(define (domain d) (:predicates (p)))"
P = "(define (problem q) (:domain d) (:goal (and)))"


def test_underscore_tags():
    out = f"<domain_file>{D}</domain_file><problem_file>{P}</problem_file>"
    assert extract_pddl_blocks(out) == (D, P)


def test_space_tags_and_case():
    out = f"<Domain File>\n{D}\n</Domain File>\n<problem file>\n{P}\n</problem file>"
    assert extract_pddl_blocks(out) == (D, P)


def test_no_candidates():
    with pytest.raises(ExtractionError):
        extract_pddl_blocks("I could not do it.")


def test_missing_problem_block():
    with pytest.raises(ExtractionError):
        extract_pddl_blocks(f"<domain_file>{D}</domain_file>")


def test_think_span_is_ignored():
    decoy = "<domain_file>(define (domain wrong))</domain_file>"
    out = f"<think>draft: {decoy}</think>\n<domain_file>{D}</domain_file>\n<problem_file>{P}</problem_file>"
    assert extract_pddl_blocks(out) == (D, P)


def test_reply_with_only_closing_think():
    # prompts end with an open <think>, so replies often start mid-reasoning
    out = f"reasoning <domain_file>(define (domain wrong))</domain_file></think><domain_file>{D}</domain_file><problem_file>{P}</problem_file>"
    assert extract_pddl_blocks(out) == (D, P)


def test_fenced_fallback():
    out = f"Here:\n```pddl\n{D}\n```\nand\n```PDDL\n{P}\n```\n"
    assert extract_pddl_blocks(out) == (D, P)


def test_fenced_block_with_both_files():
    out = f"```pddl\n{D}\n\n{P}\n```"
    assert extract_pddl_blocks(out) == (D, P)


def test_last_block_wins():
    newer = "(define (domain d2))"
    out = f"<domain_file>{D}</domain_file> then <domain_file>{newer}</domain_file>"
    assert find_block(out, "domain") == newer
    assert find_block(out, "problem") is None
