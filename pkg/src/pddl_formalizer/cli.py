"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 dataset error, 3 backend error,
4 input rejected (parse/check failure, invalid plan, or no plan found).
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .dataset import DatasetError, generate_dataset, load_datasets, write_dataset
from .grammar import emit_grammar
from .harness import RECORDS_FILE, SUMMARY_FILE, evaluate, export, read_records, summarize, summary_csv
from .llm import BackendConfig, BackendError, MockFixtureError, MockScript, make_backend
from .mockgen import synthesize
from .parser import ParseError, parse_domain, parse_problem
from .planner import Limits, Plan, PlanFormatError, Solved, solve_text
from .printer import print_domain, print_problem
from .semantics import SemanticError, check, errors_only, format_feedback
from .validator import format_validator_feedback, validate

EXIT_OK, EXIT_USAGE, EXIT_DATASET, EXIT_BACKEND, EXIT_REJECTED = 0, 1, 2, 3, 4

log = logging.getLogger("pddl_formalizer")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _limits(args) -> Limits:
    return Limits(max_expansions=args.max_expansions, timeout=args.timeout)


def _default_config_path():
    return resources.files("pddl_formalizer").joinpath("pipelines.yaml")


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_dataset(args) -> int:
    if args.domain != "blocksworld":
        raise UsageError(f"unknown domain {args.domain!r} (only blocksworld can be generated)")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    instances = generate_dataset(args.count, args.seed)
    out = write_dataset(instances, Path(args.out), args.domain)
    print(f"wrote {len(instances)} instance(s) to {out}")
    return EXIT_OK


def cmd_parse(args) -> int:
    text = _read(args.file)
    kind = args.kind
    if kind == "auto":
        kind = "problem" if "(problem" in text.replace(" ", "").lower() else "domain"
    try:
        if kind == "domain":
            sys.stdout.write(print_domain(parse_domain(text)))
        else:
            sys.stdout.write(print_problem(parse_problem(text)))
    except ParseError as err:
        print(format_feedback([err]), file=sys.stderr)
        return EXIT_REJECTED
    return EXIT_OK


def cmd_check(args) -> int:
    errors: list = []
    domain = problem = None
    try:
        domain = parse_domain(_read(args.domain))
    except ParseError as err:
        errors.append(err)
    try:
        problem = parse_problem(_read(args.problem))
    except ParseError as err:
        errors.append(err)
    if domain is not None and problem is not None:
        errors = check(domain, problem)
    if errors:
        print(format_feedback(errors), file=sys.stderr)
    parse_failed = any(isinstance(e, ParseError) for e in errors)
    if parse_failed or errors_only([e for e in errors if isinstance(e, SemanticError)]):
        return EXIT_REJECTED
    print("ok")
    return EXIT_OK


def cmd_plan(args) -> int:
    outcome = solve_text(_read(args.domain), _read(args.problem), _limits(args))
    if isinstance(outcome, Solved):
        text = outcome.plan.to_text()
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        print(f"; {len(outcome.plan)} step(s), {outcome.expansions} expansion(s)", file=sys.stderr)
        return EXIT_OK
    if outcome.status == "ill-formed":
        print(format_feedback(outcome.syntax_errors) or "; ".join(map(str, outcome.errors)), file=sys.stderr)
    elif outcome.status == "timeout":
        print(f"no plan: search stopped ({outcome.reason}) after {outcome.expansions} expansion(s)", file=sys.stderr)
    else:
        print(f"no plan: goal unreachable ({outcome.expansions} expansion(s))", file=sys.stderr)
    return EXIT_REJECTED


def cmd_validate(args) -> int:
    try:
        domain = parse_domain(_read(args.domain))
        problem = parse_problem(_read(args.problem))
    except ParseError as err:
        print(format_feedback([err]), file=sys.stderr)
        return EXIT_REJECTED
    try:
        plan = Plan.from_text(_read(args.plan))
    except PlanFormatError as exc:
        print(f"plan file: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    report = validate(domain, problem, plan)
    print(format_validator_feedback(report))
    return EXIT_OK if report.valid else EXIT_REJECTED


def cmd_grammar_emit(args) -> int:
    text = emit_grammar()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _configs(args):
    from .pipelines import load_configs

    path = args.config or _default_config_path()
    try:
        configs = load_configs(path)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad pipeline config {path}: {exc}") from exc
    if args.pipelines:
        wanted = [p.strip() for p in args.pipelines.split(",") if p.strip()]
        unknown = set(wanted) - {c.name for c in configs}
        if unknown:
            raise UsageError(f"unknown pipeline(s): {', '.join(sorted(unknown))}")
        configs = [c for c in configs if c.name in wanted]
    if not configs:
        raise UsageError("no pipelines selected")
    return configs


def cmd_run(args) -> int:
    configs = _configs(args)
    manifests = load_datasets(args.dataset)
    instances = [inst for m in manifests for inst in m.instances]
    if not instances:
        raise DatasetError(f"no usable instances under {args.dataset}")
    try:
        backend_config = BackendConfig.load(args.backend_config, args.backend)
    except (KeyError, OSError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    script = None
    try:
        if backend_config.kind == "mock":
            if args.mock_script:
                script = MockScript.load(args.mock_script)
            elif not backend_config.mock_script:
                script = synthesize(instances, configs, seed=args.mock_seed)
        backend = make_backend(backend_config, script)
    except (OSError, ValueError, KeyError) as exc:
        raise BackendError(f"cannot set up backend {args.backend!r}: {exc}") from exc
    records = evaluate(
        manifests, configs, backend, out_dir=args.out, workers=args.workers, limits=_limits(args), seed=args.seed
    )
    summary = summarize(records)
    export(records, summary, args.out)
    sys.stdout.write(summary_csv(summary))
    return EXIT_OK


def cmd_summarize(args) -> int:
    out = Path(args.out)
    records = read_records(out / RECORDS_FILE)
    if not records:
        log.warning("no records found in %s", out)
    summary = summarize(records)
    export(records, summary, out)
    sys.stdout.write(summary_csv(summary))
    return EXIT_OK


def cmd_make_mock_script(args) -> int:
    configs = _configs(args)
    instances = [inst for m in load_datasets(args.dataset) for inst in m.instances]
    script = synthesize(instances, configs, seed=args.mock_seed)
    Path(args.out).write_text(script.to_json(), encoding="utf-8")
    print(f"wrote {len(script.entries)} entries to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-expansions", type=int, default=Limits().max_expansions)
    p.add_argument("--timeout", type=float, default=Limits().timeout, help="seconds per problem")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pddl-formalizer", description="PDDL formalization toolkit and evaluation harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-dataset", help="generate a BlocksWorld dataset")
    p.add_argument("--domain", default="blocksworld")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="data")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("parse", help="parse a PDDL file and print it in canonical form")
    p.add_argument("file")
    p.add_argument("--kind", choices=("auto", "domain", "problem"), default="auto")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="report semantic errors in a domain/problem pair")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("plan", help="find a shortest plan")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--out")
    _add_limits(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="replay a plan against reference files")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("grammar", help="grammar utilities")
    gsub = p.add_subparsers(dest="grammar_command", required=True, parser_class=_Parser)
    g = gsub.add_parser("emit", help="write the EBNF grammar")
    g.add_argument("--out")
    g.set_defaults(func=cmd_grammar_emit)

    def pipeline_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline config YAML (default: the built-in pipeline set)")
        p.add_argument("--pipelines", help="comma-separated subset of pipeline names")
        p.add_argument("--mock-seed", type=int, default=0, help="seed for synthesized mock scripts")

    p = sub.add_parser("run", help="evaluate pipelines over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", default="mock")
    p.add_argument("--backend-config", help="YAML file with a `backends:` mapping")
    p.add_argument("--mock-script", help="JSON mock script (mock backend only)")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--seed", type=int, default=0, help="per-run sampling seed")
    pipeline_args(p)
    _add_limits(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("summarize", help="recompute summary files from records.jsonl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("make-mock-script", help="write a synthetic mock script for a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    pipeline_args(p)
    p.set_defaults(func=cmd_make_mock_script)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (BackendError, MockFixtureError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
