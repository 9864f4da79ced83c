"""Prompt text for every pipeline stage.

The full-file prompts reproduce the benchmark templates exactly; the other
stages reuse the same description block and tag conventions.
"""

from __future__ import annotations

from importlib import resources

BASELINE = "baseline"
KNOWLEDGE = "knowledge"

FULL = "full"
DOMAIN_ONLY = "domain-only"
PROBLEM_ONLY = "problem-only"
SUMMARY = "summary"
REVISION = "revision"


def _read(name: str) -> str:
    return resources.files("pddl_formalizer").joinpath("prompts").joinpath(name).read_text(encoding="utf-8")


KNOWLEDGE_PREAMBLE = _read("knowledge_preamble.txt")

# baseline asks for space-separated tags, the knowledge prompt for underscores
_TAGS = {
    BASELINE: ("<domain file>", "</domain file>", "<problem file>", "</problem file>"),
    KNOWLEDGE: ("<domain_file>", "</domain_file>", "<problem_file>", "</problem_file>"),
}


def _descriptions(domain_description: str, problem_description: str) -> str:
    return f"Domain description:\n{domain_description}\n\nProblem description:\n{problem_description}\n\n"


def wrap_instruction(style: str, stage: str = FULL) -> str:
    d_open, d_close, p_open, p_close = _TAGS[style]
    if stage == DOMAIN_ONLY:
        return (
            "Write only the domain file in minimal PDDL. Do not write the problem file yet.\n"
            f"Wrap PDDL domain file inside {d_open}...{d_close}.\n"
        )
    if stage == PROBLEM_ONLY:
        return (
            "Write the problem file in minimal PDDL for the domain file above.\n"
            f"Wrap PDDL problem file inside {p_open}...{p_close}.\n"
        )
    return (
        "Write the domain and problem files in minimal PDDL.\n"
        f"Wrap PDDL domain file inside {d_open}...{d_close} and PDDL problem file inside {p_open}...{p_close}.\n"
    )


SUMMARY_INSTRUCTION = (
    "Do not write PDDL yet. First write a textual summary with all the information needed to write "
    "the PDDL domain and problem files: the types of objects, the predicates, every action with its "
    "parameters, preconditions and effects, the objects, the initial state, and the goal state.\n"
    "Wrap the summary inside <summary>...</summary>.\n"
)


def render(
    style: str,
    stage: str,
    domain_description: str,
    problem_description: str,
    context: str | None = None,
) -> str:
    """Prompt text for one stage.

    ``context`` is the generated summary (``full`` stage after a summary) or the
    generated domain file (``problem-only`` stage).
    """
    if style not in _TAGS:
        raise ValueError(f"unknown prompt style {style!r}")
    parts = []
    if style == KNOWLEDGE and stage != SUMMARY:
        parts.append(KNOWLEDGE_PREAMBLE)
    parts.append(_descriptions(domain_description, problem_description))
    if stage == SUMMARY:
        parts.append(SUMMARY_INSTRUCTION)
    else:
        if context is not None:
            label = "Domain file" if stage == PROBLEM_ONLY else "Summary"
            parts.append(f"{label}:\n{context}\n\n")
        parts.append(wrap_instruction(style, stage))
    parts.append("<think>\n")
    return "".join(parts)


def revision_message(style: str, feedback: str) -> str:
    return f"{feedback}\n\nRevise the domain and problem files accordingly.\n{wrap_instruction(style)}<think>\n"
