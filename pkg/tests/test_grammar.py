import random

import pytest
from hypothesis import given, settings

from helpers import domain_asts, fixture, problem_asts
from pddl_formalizer.grammar import GrammarUsageError, emit_grammar, grammar_accepts
from pddl_formalizer.parser import ParseError, parse_domain, parse_problem
from pddl_formalizer.printer import print_domain, print_problem

GRAMMAR = emit_grammar()
SUPPORTED = {"strips", "typing"}


def test_emit_is_stable():
    assert emit_grammar() == GRAMMAR
    assert "start" in GRAMMAR


@pytest.mark.parametrize("name", ["appendix_domain.pddl", "appendix_p01.pddl", "py2pddl_domain.pddl", "py2pddl_problem.pddl"])
def test_accepts_reference_files(name):
    assert grammar_accepts(GRAMMAR, fixture(name))


@pytest.mark.parametrize(
    "text",
    [
        "(define (domain",
        "(define (domain d) (:requirements :fluents))",
        "(define (domain d) (:predicates (p)) (:action a :precondition (or (p) (p))))",
        "(define (problem q) (:domain d) (:init (p ?x)) (:goal (and)))",
    ],
)
def test_rejects(text):
    assert not grammar_accepts(GRAMMAR, text)


def test_malformed_grammar_is_usage_error():
    with pytest.raises(GrammarUsageError):
        grammar_accepts("start: (((", "x")


def test_truncation_mutants_rejected():
    rng = random.Random(3)
    for name in ("appendix_domain.pddl", "appendix_p01.pddl"):
        text = fixture(name).rstrip()
        for _ in range(10):
            cut = rng.randrange(1, len(text) - 1)
            assert not grammar_accepts(GRAMMAR, text[:cut])


@settings(max_examples=100, deadline=None)
@given(domain_asts())
def test_agreement_on_printed_domains(ast):
    assert grammar_accepts(GRAMMAR, print_domain(ast))


@settings(max_examples=100, deadline=None)
@given(problem_asts())
def test_agreement_on_printed_problems(ast):
    assert grammar_accepts(GRAMMAR, print_problem(ast))


def test_parse_success_implies_acceptance_on_mutants():
    # delete random spans from the reference files; whenever the parser still
    # succeeds within the supported subset, the grammar must accept too
    rng = random.Random(11)
    for name, parse in (("appendix_domain.pddl", parse_domain), ("appendix_p01.pddl", parse_problem)):
        text = fixture(name)
        for _ in range(150):
            i = rng.randrange(len(text))
            j = min(len(text), i + rng.randrange(1, 12))
            mutant = text[:i] + text[j:]
            try:
                ast = parse(mutant)
            except ParseError:
                continue
            if not set(ast.requirements) <= SUPPORTED:
                continue  # outside the subset the grammar covers
            assert grammar_accepts(GRAMMAR, mutant), mutant
