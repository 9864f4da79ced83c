"""Generation strategies over the toolchain: single shot, pass@N, and revision loops."""

from __future__ import annotations

import logging
import zlib
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml

from . import prompts
from .ast import DomainAst, ProblemAst
from .dataset import TaskInstance
from .extract import find_block, strip_reasoning
from .grammar import grammar_accepts
from .llm import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_TEMPERATURE,
    Backend,
    GenerationRequest,
    Message,
    ScriptKey,
)
from .parser import ParseError, parse_domain, parse_problem
from .planner import IllFormed, Limits, Solved, SolveOutcome, Timeout, Unsolvable, solve
from .semantics import SemanticError, check, errors_only, format_feedback
from .validator import (
    SEMANTICALLY_CORRECT,
    SYNTACTICALLY_INCORRECT,
    VERDICT_RANK,
    ValidationReport,
    format_validator_feedback,
    judge,
)

log = logging.getLogger(__name__)

NONE = "none"
SUMMARY = "summary"
SEQUENTIAL = "sequential"
PRE_INFERENCE = (NONE, SUMMARY, SEQUENTIAL)

SINGLE = "single"
PASS_AT_N = "pass-at-n"
REVISE_SOLVER = "revise-solver"
REVISE_SOLVER_VALIDATOR = "revise-solver-validator"
INFERENCE = (SINGLE, PASS_AT_N, REVISE_SOLVER, REVISE_SOLVER_VALIDATOR)

BACKEND_ERROR = "backend-error"
EXTRACTION_ERROR = "extraction-error"


@dataclass(frozen=True)
class PipelineConfig:
    prompt_style: str = prompts.BASELINE
    pre_inference: str = NONE
    inference: str = SINGLE
    n: int = 1
    rounds: int = 1
    grammar_check: bool = False
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    name: str = ""

    def __post_init__(self) -> None:
        if self.prompt_style not in (prompts.BASELINE, prompts.KNOWLEDGE):
            raise ValueError(f"unknown prompt style {self.prompt_style!r}")
        if self.pre_inference not in PRE_INFERENCE:
            raise ValueError(f"unknown pre-inference technique {self.pre_inference!r}")
        if self.inference not in INFERENCE:
            raise ValueError(f"unknown inference technique {self.inference!r}")
        if self.n < 1 or self.rounds < 1:
            raise ValueError("n and rounds must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not self.name:
            object.__setattr__(self, "name", self.default_name())

    def default_name(self) -> str:
        parts = [self.prompt_style]
        if self.pre_inference != NONE:
            parts.append(self.pre_inference)
        if self.grammar_check:
            parts.append("grammar")
        if self.inference == PASS_AT_N:
            parts.append(f"pass@{self.n}")
        elif self.inference != SINGLE:
            parts.append(f"{self.inference}-r{self.rounds}")
        return "+".join(parts)

    @property
    def is_revision(self) -> bool:
        return self.inference in (REVISE_SOLVER, REVISE_SOLVER_VALIDATOR)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineConfig":
        values = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown pipeline keys: {', '.join(sorted(unknown))}")
        return cls(**values)

    def to_dict(self) -> dict[str, Any]:
        return {k.replace("_", "-"): v for k, v in asdict(self).items()}


def load_configs(path: Path | str) -> list[PipelineConfig]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    configs = [PipelineConfig.from_dict(item) for item in data.get("pipelines", [])]
    names = [c.name for c in configs]
    if len(names) != len(set(names)):
        raise ValueError("pipeline names must be unique")
    return configs


@dataclass
class AttemptRecord:
    attempt_index: int
    round: int
    raw_output: str = ""
    extracted: tuple[str, str] | None = None
    syntax_errors: list[str] = field(default_factory=list)
    semantic_verdict: str = SYNTACTICALLY_INCORRECT
    feedback_sent: str | None = None
    cause: str | None = None
    solve_status: str | None = None
    plan: list[str] | None = None
    validation: dict[str, Any] | None = None
    stage_outputs: dict[str, str] = field(default_factory=dict)
    generate_calls: int = 0
    grammar: dict[str, bool] | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AttemptRecord":
        data = dict(data)
        if data.get("extracted") is not None:
            data["extracted"] = tuple(data["extracted"])
        return cls(**data)


# ---------------------------------------------------------------------------
# judging one pair of generated files


@dataclass
class Assessment:
    findings: list[ParseError | SemanticError]
    outcome: SolveOutcome | None
    verdict: str
    report: ValidationReport | None


@lru_cache(maxsize=2048)
def _solve_cached(domain: DomainAst, problem: ProblemAst, limits: Limits) -> SolveOutcome:
    return solve(domain, problem, limits)


def assess(instance: TaskInstance, domain_text: str, problem_text: str, limits: Limits = Limits()) -> Assessment:
    """Parse, check, solve and validate generated files against the instance's reference."""
    findings: list[ParseError | SemanticError] = []
    domain = problem = None
    try:
        domain = parse_domain(domain_text)
    except ParseError as err:
        findings.append(err)
    try:
        problem = parse_problem(problem_text)
    except ParseError as err:
        findings.append(err)
    if domain is None or problem is None:
        return Assessment(findings, None, SYNTACTICALLY_INCORRECT, None)
    findings = list(check(domain, problem))
    errors = errors_only(findings)
    outcome = IllFormed(tuple(errors)) if errors else _solve_cached(domain, problem, limits)
    verdict, report = judge(instance.truth_domain, instance.truth_problem, domain, problem, outcome)
    return Assessment(findings, outcome, verdict, report)


def _fill(record: AttemptRecord, domain_text: str | None, problem_text: str | None, instance: TaskInstance, limits: Limits) -> Assessment | None:
    if domain_text is None or problem_text is None:
        missing = [k for k, t in (("domain", domain_text), ("problem", problem_text)) if t is None]
        record.cause = EXTRACTION_ERROR
        record.syntax_errors = [f"no {k} file block found in the response" for k in missing]
        record.semantic_verdict = SYNTACTICALLY_INCORRECT
        return None
    record.extracted = (domain_text, problem_text)
    result = assess(instance, domain_text, problem_text, limits)
    record.syntax_errors = format_feedback(result.findings).splitlines()
    record.semantic_verdict = result.verdict
    if result.outcome is not None:
        record.solve_status = result.outcome.status
        if isinstance(result.outcome, Solved):
            record.plan = [f"({' '.join((name, *args))})" for name, args in result.outcome.plan.steps]
    if result.report is not None:
        record.validation = {"verdict": result.report.verdict, "detail": result.report.detail}
    if result.verdict == SYNTACTICALLY_INCORRECT:
        record.cause = "parse-error" if any(isinstance(f, ParseError) for f in result.findings) else "semantic-error"
    return result


def solver_feedback(record: AttemptRecord, result: Assessment | None) -> str:
    """What the planner alone can tell the model about an attempt."""
    if result is None:
        return (
            "Your answer did not contain both PDDL files wrapped in the requested tags "
            f"({'; '.join(record.syntax_errors)})."
        )
    outcome = result.outcome
    if outcome is None or (isinstance(outcome, IllFormed) and outcome.syntax_errors):
        errors = [f for f in result.findings if not isinstance(f, SemanticError) or f.severity == "error"]
        return "The planner rejected the PDDL files with the following errors:\n" + format_feedback(errors)
    if isinstance(outcome, IllFormed):
        return f"The planner could not process the PDDL files: {outcome.errors[0]}."
    if isinstance(outcome, Unsolvable):
        return "The planner parsed the PDDL files but found no plan: the goal cannot be reached from the initial state."
    if isinstance(outcome, Timeout):
        return "The planner parsed the PDDL files but could not find a plan within its search limits."
    return f"Plan search succeeded: the planner found a plan with {len(outcome.plan)} step(s)."


def revision_feedback(config: PipelineConfig, record: AttemptRecord, result: Assessment | None) -> str:
    text = solver_feedback(record, result)
    if (
        config.inference == REVISE_SOLVER_VALIDATOR
        and result is not None
        and result.report is not None
        and not result.report.valid
    ):
        text += (
            "\nHowever, the plan is wrong when checked against the reference domain and problem:\n"
            + format_validator_feedback(result.report)
        )
    return text


def grammar_gate(record: AttemptRecord, grammar: str) -> AttemptRecord:
    """Run the grammar recognizer on the extracted files and flag disagreement with the parser."""
    if record.extracted is None:
        return record
    verdicts: dict[str, bool] = {}
    warnings = list(record.warnings)
    for kind, text, parse in zip(("domain", "problem"), record.extracted, (parse_domain, parse_problem)):
        accepted = grammar_accepts(grammar, text)
        verdicts[kind] = accepted
        try:
            parse(text)
            parsed = True
        except ParseError:
            parsed = False
        if accepted != parsed:
            msg = f"grammar {'accepts' if accepted else 'rejects'} the {kind} file but the parser {'accepts' if parsed else 'rejects'} it"
            log.warning("toolchain disagreement: %s", msg)
            warnings.append(msg)
    return replace(record, grammar=verdicts, warnings=warnings)


# ---------------------------------------------------------------------------
# running pipelines


class _BackendFailure(Exception):
    pass


@dataclass
class _Context:
    config: PipelineConfig
    instance: TaskInstance
    backend: Backend
    limits: Limits
    seed: int | None
    grammar: str | None = None

    def request(self, messages: list[Message], stage: str, attempt: int) -> GenerationRequest:
        seed = None
        if self.seed is not None:
            seed = zlib.crc32(f"{self.seed}:{self.instance.id}:{stage}:{attempt}".encode())
        return GenerationRequest(
            tuple(messages),
            temperature=self.config.temperature,
            max_tokens=self.config.max_tokens,
            seed=seed,
            key=ScriptKey(self.instance.id, stage, attempt),
        )

    def call(self, request: GenerationRequest, record: AttemptRecord) -> str:
        record.generate_calls += 1
        response = self.backend.generate(request)
        if not response.ok:
            raise _BackendFailure(response.error or "backend error")
        if response.finish_reason == "length":
            record.warnings.append("response truncated at max_tokens")
        return response.content

    def prompt(self, stage: str, context: str | None = None) -> Message:
        inst = self.instance
        text = prompts.render(
            self.config.prompt_style, stage, inst.domain_description, inst.problem_description, context
        )
        return Message("user", text)

    def gate(self, record: AttemptRecord) -> AttemptRecord:
        if self.config.grammar_check and self.grammar is not None:
            return grammar_gate(record, self.grammar)
        return record


_STAGES = {
    NONE: (prompts.FULL,),
    SUMMARY: (prompts.SUMMARY, prompts.FULL),
    SEQUENTIAL: (prompts.DOMAIN_ONLY, prompts.PROBLEM_ONLY),
}


def build_prompt(
    config: PipelineConfig,
    instance: TaskInstance,
    stage: str,
    context: str | None = None,
    attempt: int = 0,
    seed: int | None = None,
) -> GenerationRequest:
    """First-turn request for one stage of ``config`` on ``instance``."""
    if stage not in _STAGES[config.pre_inference]:
        raise ValueError(f"stage {stage!r} is not used by pre-inference {config.pre_inference!r}")
    text = prompts.render(
        config.prompt_style, stage, instance.domain_description, instance.problem_description, context
    )
    ctx = _Context(config, instance, None, Limits(), seed)
    return ctx.request([Message("user", text)], stage, attempt)


def _summary_text(output: str) -> str:
    body = strip_reasoning(output)
    start, end = body.lower().find("<summary>"), body.lower().rfind("</summary>")
    if start != -1 and end > start:
        return body[start + len("<summary>"):end].strip()
    return body.strip()


def _single(ctx: _Context, attempt_index: int):
    """One round-0 attempt. Returns (record, conversation, texts, assessment)."""
    record = AttemptRecord(attempt_index=attempt_index, round=0)
    conversation: list[Message] = []
    texts: tuple[str | None, str | None] = (None, None)
    pre = ctx.config.pre_inference
    try:
        if pre == SEQUENTIAL:
            first = [ctx.prompt(prompts.DOMAIN_ONLY)]
            out = ctx.call(ctx.request(first, prompts.DOMAIN_ONLY, attempt_index), record)
            record.stage_outputs[prompts.DOMAIN_ONLY] = out
            domain_text = find_block(out, "domain")
            conversation = first + [Message("assistant", out)]
            if domain_text is None:
                record.raw_output = out
                _fill(record, None, "", ctx.instance, ctx.limits)
                return ctx.gate(record), conversation, texts, None
            try:
                parse_domain(domain_text)
            except ParseError as err:
                # a broken domain file short-circuits the problem stage
                record.raw_output = out
                record.extracted = None
                record.syntax_errors = format_feedback([err]).splitlines()
                record.cause = "parse-error"
                texts = (domain_text, None)
                return ctx.gate(record), conversation, texts, Assessment([err], None, SYNTACTICALLY_INCORRECT, None)
            second = [ctx.prompt(prompts.PROBLEM_ONLY, context=domain_text)]
            out = ctx.call(ctx.request(second, prompts.PROBLEM_ONLY, attempt_index), record)
            record.stage_outputs[prompts.PROBLEM_ONLY] = out
            conversation = second + [Message("assistant", out)]
            texts = (domain_text, find_block(out, "problem"))
        else:
            summary = None
            if pre == SUMMARY:
                first = [ctx.prompt(prompts.SUMMARY)]
                out = ctx.call(ctx.request(first, prompts.SUMMARY, attempt_index), record)
                record.stage_outputs[prompts.SUMMARY] = out
                summary = _summary_text(out)
            messages = [ctx.prompt(prompts.FULL, context=summary)]
            out = ctx.call(ctx.request(messages, prompts.FULL, attempt_index), record)
            conversation = messages + [Message("assistant", out)]
            texts = (find_block(out, "domain"), find_block(out, "problem"))
    except _BackendFailure as exc:
        record.cause = BACKEND_ERROR
        record.syntax_errors = [f"backend error: {exc}"]
        return record, conversation, texts, None
    record.raw_output = out
    result = _fill(record, *texts, ctx.instance, ctx.limits)
    return ctx.gate(record), conversation, texts, result


def _context(config, instance, backend, limits, seed, grammar) -> _Context:
    if config.grammar_check and grammar is None:
        from .grammar import emit_grammar

        grammar = emit_grammar()
    return _Context(config, instance, backend, limits, seed, grammar)


def run_single(
    config: PipelineConfig,
    instance: TaskInstance,
    backend: Backend,
    *,
    limits: Limits = Limits(),
    seed: int | None = None,
    grammar: str | None = None,
    attempt_index: int = 0,
) -> AttemptRecord:
    ctx = _context(config, instance, backend, limits, seed, grammar)
    return _single(ctx, attempt_index)[0]


def run_pass_at_n(
    config: PipelineConfig,
    instance: TaskInstance,
    backend: Backend,
    *,
    limits: Limits = Limits(),
    seed: int | None = None,
    grammar: str | None = None,
) -> list[AttemptRecord]:
    """N independent attempts; always issues all N, no shared context."""
    ctx = _context(config, instance, backend, limits, seed, grammar)
    return [_single(ctx, i)[0] for i in range(config.n)]


def run_revision(
    config: PipelineConfig,
    instance: TaskInstance,
    backend: Backend,
    *,
    limits: Limits = Limits(),
    seed: int | None = None,
    grammar: str | None = None,
) -> list[AttemptRecord]:
    """Round 0 is a single attempt; each later round feeds diagnostics back in the same conversation."""
    ctx = _context(config, instance, backend, limits, seed, grammar)
    record, conversation, texts, result = _single(ctx, 0)
    attempts = [record]
    for round_index in range(1, config.rounds):
        if record.semantic_verdict == SEMANTICALLY_CORRECT or record.cause == BACKEND_ERROR:
            break
        feedback = revision_feedback(config, record, result)
        record.feedback_sent = feedback
        conversation = conversation + [Message("user", prompts.revision_message(config.prompt_style, feedback))]
        record = AttemptRecord(attempt_index=round_index, round=round_index)
        try:
            out = ctx.call(ctx.request(conversation, prompts.REVISION, round_index), record)
        except _BackendFailure as exc:
            record.cause = BACKEND_ERROR
            record.syntax_errors = [f"backend error: {exc}"]
            attempts.append(record)
            break
        conversation = conversation + [Message("assistant", out)]
        record.raw_output = out
        # a revision may restate only the file it changed
        texts = (find_block(out, "domain") or texts[0], find_block(out, "problem") or texts[1])
        result = _fill(record, *texts, instance, limits)
        record = ctx.gate(record)
        attempts.append(record)
    return attempts


def run_pipeline(
    config: PipelineConfig,
    instance: TaskInstance,
    backend: Backend,
    *,
    limits: Limits = Limits(),
    seed: int | None = None,
    grammar: str | None = None,
) -> list[AttemptRecord]:
    kwargs = dict(limits=limits, seed=seed, grammar=grammar)
    if config.inference == PASS_AT_N:
        return run_pass_at_n(config, instance, backend, **kwargs)
    if config.is_revision:
        return run_revision(config, instance, backend, **kwargs)
    return [run_single(config, instance, backend, **kwargs)]


def best_verdict(attempts: list[AttemptRecord]) -> str:
    if not attempts:
        return SYNTACTICALLY_INCORRECT
    return max((a.semantic_verdict for a in attempts), key=VERDICT_RANK.__getitem__)


def final_verdict(config: PipelineConfig, attempts: list[AttemptRecord]) -> str:
    """Pass@N takes the best attempt; revision takes the last round that got an answer."""
    if config.inference == PASS_AT_N:
        return best_verdict(attempts)
    if config.is_revision:
        answered = [a for a in attempts if a.cause != BACKEND_ERROR]
        return answered[-1].semantic_verdict if answered else SYNTACTICALLY_INCORRECT
    return attempts[0].semantic_verdict if attempts else SYNTACTICALLY_INCORRECT
