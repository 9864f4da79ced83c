"""Pull domain/problem PDDL text out of free-form model output."""

from __future__ import annotations

import re

_THINK_SPAN = re.compile(r"<think>.*?</think>", re.DOTALL | re.IGNORECASE)
_THINK_CLOSE = re.compile(r"</think>", re.IGNORECASE)
_FENCE = re.compile(r"```[ \t]*pddl[^\n]*\n(.*?)```", re.DOTALL | re.IGNORECASE)
_DEFINE = re.compile(r"\(\s*define\s*\(\s*(domain|problem)\b", re.IGNORECASE)


class ExtractionError(ValueError):
    """No usable PDDL block in a model response."""


def strip_reasoning(text: str) -> str:
    text = _THINK_SPAN.sub("", text)
    # prompts end with an opening <think>, so the reply may carry only the closer
    close = None
    for close in _THINK_CLOSE.finditer(text):
        pass
    if close is not None:
        text = text[close.end():]
    return text


def _tag_pattern(kind: str) -> re.Pattern[str]:
    return re.compile(rf"<{kind}[_ ]file>(.*?)</{kind}[_ ]file>", re.DOTALL | re.IGNORECASE)


def _split_defines(block: str) -> dict[str, str]:
    found: dict[str, str] = {}
    starts = list(_DEFINE.finditer(block))
    for i, m in enumerate(starts):
        end = starts[i + 1].start() if i + 1 < len(starts) else len(block)
        found[m.group(1).lower()] = block[m.start():end].strip()
    return found


def find_block(llm_output: str, kind: str) -> str | None:
    """Return the last ``kind`` ("domain" or "problem") block, or None."""
    text = strip_reasoning(llm_output)
    tagged = _tag_pattern(kind).findall(text)
    if tagged:
        return tagged[-1].strip()
    candidate = None
    for block in _FENCE.findall(text):
        piece = _split_defines(block).get(kind)
        if piece is not None:
            candidate = piece
    return candidate


def extract_pddl_blocks(llm_output: str) -> tuple[str, str]:
    domain = find_block(llm_output, "domain")
    problem = find_block(llm_output, "problem")
    if domain is None and problem is None:
        raise ExtractionError("no domain or problem file block found in the response")
    if domain is None:
        raise ExtractionError("no domain file block found in the response")
    if problem is None:
        raise ExtractionError("no problem file block found in the response")
    return domain, problem
