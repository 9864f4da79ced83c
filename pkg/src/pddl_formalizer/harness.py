"""Batch evaluation, metrics, and report files.

Records are appended to ``records.jsonl`` as pairs complete, so an interrupted
run can be resumed; ``export`` rewrites the file in canonical order and emits
``summary.csv`` and ``curves.csv``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
import threading
import time
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .dataset import DatasetManifest, TaskInstance
from .llm import Backend, MockFixtureError, RemoteBackend
from .pipelines import (
    BACKEND_ERROR,
    PASS_AT_N,
    AttemptRecord,
    PipelineConfig,
    best_verdict,
    final_verdict,
    run_pipeline,
)
from .planner import Limits
from .validator import SEMANTICALLY_CORRECT, SEMANTICALLY_INCORRECT, SYNTACTICALLY_INCORRECT

log = logging.getLogger(__name__)

RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.csv"
CURVES_FILE = "curves.csv"


@dataclass
class EvalRecord:
    domain: str
    instance_id: str
    pipeline: str
    config: dict[str, Any]
    attempts: list[AttemptRecord]
    final_verdict: str
    best_verdict: str
    wall_time: float
    backend: str
    seed: int | None = None
    limits: dict[str, Any] = field(default_factory=dict)
    retry_policy: dict[str, Any] = field(default_factory=dict)
    cause: str | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.domain, self.instance_id, self.pipeline)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalRecord":
        data = dict(data)
        data["attempts"] = [AttemptRecord.from_dict(a) for a in data["attempts"]]
        return cls(**data)


def _natural(text: str) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", text))


def _sort_key(record: EvalRecord) -> tuple:
    return (record.domain, _natural(record.instance_id), record.pipeline)


# ---------------------------------------------------------------------------
# records file


def read_records(path: Path | str) -> list[EvalRecord]:
    """Read a records file, dropping a torn final line left by an interrupted run."""
    path = Path(path)
    if not path.is_file():
        return []
    records = []
    lines = path.read_text(encoding="utf-8").split("\n")
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            records.append(EvalRecord.from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            if index >= len(lines) - 2:
                log.warning("%s: ignoring incomplete last record (%s)", path, exc)
                continue
            raise ValueError(f"{path}:{index + 1}: corrupt record: {exc}") from exc
    return records


class _Appender:
    """Single writer for the records file; one JSON object per line."""

    def __init__(self, path: Path, keep: Sequence[EvalRecord]):
        self._lock = threading.Lock()
        # rewrite the surviving records so a torn tail never sits mid-file
        text = "".join(r.to_json() + "\n" for r in keep)
        path.write_text(text, encoding="utf-8")
        self._fh = path.open("a", encoding="utf-8")

    def write(self, record: EvalRecord) -> None:
        with self._lock:
            self._fh.write(record.to_json() + "\n")
            self._fh.flush()

    def close(self) -> None:
        self._fh.close()


# ---------------------------------------------------------------------------
# evaluation


def _retry_policy(backend: Backend) -> dict[str, Any]:
    if isinstance(backend, RemoteBackend):
        c = backend.config
        return {"retries": c.retries, "backoff": c.backoff, "request_timeout": c.request_timeout}
    return {}


def evaluate_one(
    instance: TaskInstance,
    config: PipelineConfig,
    backend: Backend,
    *,
    limits: Limits = Limits(),
    seed: int | None = None,
    grammar: str | None = None,
) -> EvalRecord:
    started = time.monotonic()
    cause = None
    try:
        attempts = run_pipeline(config, instance, backend, limits=limits, seed=seed, grammar=grammar)
    except MockFixtureError:
        raise
    except Exception as exc:  # isolate failures per pair
        log.exception("pipeline %s failed on %s", config.name, instance.id)
        attempts = []
        cause = f"internal-error: {type(exc).__name__}: {exc}"
    if attempts and all(a.cause == BACKEND_ERROR for a in attempts):
        cause = BACKEND_ERROR
    return EvalRecord(
        domain=instance.domain_name,
        instance_id=instance.id,
        pipeline=config.name,
        config=config.to_dict(),
        attempts=attempts,
        final_verdict=final_verdict(config, attempts),
        best_verdict=best_verdict(attempts),
        wall_time=round(time.monotonic() - started, 4),
        backend=getattr(backend, "name", type(backend).__name__),
        seed=seed,
        limits=asdict(limits),
        retry_policy=_retry_policy(backend),
        cause=cause,
    )


def evaluate(
    datasets: DatasetManifest | Iterable[DatasetManifest],
    configs: Sequence[PipelineConfig],
    backend: Backend,
    *,
    out_dir: Path | str | None = None,
    workers: int = 4,
    limits: Limits = Limits(),
    seed: int | None = 0,
) -> list[EvalRecord]:
    """One record per (instance, config). With ``out_dir``, finished pairs are skipped."""
    if isinstance(datasets, DatasetManifest):
        datasets = [datasets]
    instances = [inst for manifest in datasets for inst in manifest.instances]
    names = [c.name for c in configs]
    if len(names) != len(set(names)):
        raise ValueError("pipeline names must be unique")

    done: dict[tuple[str, str, str], EvalRecord] = {}
    appender = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for record in read_records(out / RECORDS_FILE):
            done[record.key] = record
        appender = _Appender(out / RECORDS_FILE, list(done.values()))
        if done:
            log.info("resuming: %d record(s) already present", len(done))

    grammar = None
    if any(c.grammar_check for c in configs):
        from .grammar import emit_grammar

        grammar = emit_grammar()

    todo = [
        (inst, cfg)
        for inst in instances
        for cfg in configs
        if (inst.domain_name, inst.id, cfg.name) not in done
    ]
    results: list[EvalRecord] = []
    lock = threading.Lock()

    def task(inst: TaskInstance, cfg: PipelineConfig) -> None:
        record = evaluate_one(inst, cfg, backend, limits=limits, seed=seed, grammar=grammar)
        if appender is not None:
            appender.write(record)
        with lock:
            results.append(record)

    try:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            futures = [pool.submit(task, inst, cfg) for inst, cfg in todo]
            wait(futures, return_when=FIRST_EXCEPTION)
            for fut in futures:
                if fut.done() and fut.exception() is not None:
                    for other in futures:
                        other.cancel()
                    raise fut.exception()
    finally:
        if appender is not None:
            appender.close()

    wanted = {(inst.domain_name, inst.id, cfg.name) for inst in instances for cfg in configs}
    merged = {k: r for k, r in done.items() if k in wanted}
    merged.update((r.key, r) for r in results)
    return sorted(merged.values(), key=_sort_key)


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class SummaryRow:
    domain: str
    pipeline: str
    instance_count: int
    syntactic_accuracy: float
    semantic_accuracy: float
    mean_rounds_used: float
    semantically_correct: int
    semantically_incorrect: int
    syntactically_incorrect: int
    backend_errors: int


@dataclass(frozen=True)
class CurvePoint:
    domain: str
    pipeline: str
    axis: str  # "round" for revision pipelines, "k" for pass@N
    step: int
    syntactic_accuracy: float
    semantic_accuracy: float


def _pct(part: int, whole: int) -> float:
    return round(100.0 * part / whole, 4) if whole else 0.0


def _distinct(records: Iterable[EvalRecord]) -> dict[tuple[str, str], list[EvalRecord]]:
    """Group by (domain, pipeline); a repeated instance id keeps its last record."""
    groups: dict[tuple[str, str], dict[str, EvalRecord]] = {}
    for record in records:
        groups.setdefault((record.domain, record.pipeline), {})[record.instance_id] = record
    return {
        key: sorted(group.values(), key=_sort_key)
        for key, group in sorted(groups.items())
    }


def _accuracies(verdicts: list[str]) -> tuple[float, float]:
    syntactic = sum(v != SYNTACTICALLY_INCORRECT for v in verdicts)
    semantic = sum(v == SEMANTICALLY_CORRECT for v in verdicts)
    return _pct(syntactic, len(verdicts)), _pct(semantic, len(verdicts))


def summarize(records: Iterable[EvalRecord]) -> list[SummaryRow]:
    rows = []
    for (domain, pipeline), group in _distinct(records).items():
        verdicts = [r.final_verdict for r in group]
        syntactic, semantic = _accuracies(verdicts)
        rounds = [len(r.attempts) for r in group]
        rows.append(
            SummaryRow(
                domain=domain,
                pipeline=pipeline,
                instance_count=len(group),
                syntactic_accuracy=syntactic,
                semantic_accuracy=semantic,
                mean_rounds_used=round(sum(rounds) / len(rounds), 4),
                semantically_correct=verdicts.count(SEMANTICALLY_CORRECT),
                semantically_incorrect=verdicts.count(SEMANTICALLY_INCORRECT),
                syntactically_incorrect=verdicts.count(SYNTACTICALLY_INCORRECT),
                backend_errors=sum(r.cause == BACKEND_ERROR for r in group),
            )
        )
    return rows


def curves(records: Iterable[EvalRecord]) -> list[CurvePoint]:
    """Accuracy after each revision round, or over the first k pass@N attempts."""
    points = []
    for (domain, pipeline), group in _distinct(records).items():
        config = PipelineConfig.from_dict(group[0].config)
        if config.inference == PASS_AT_N:
            axis, steps = "k", config.n
        elif config.is_revision:
            axis, steps = "round", config.rounds
        else:
            continue
        for step in range(1, steps + 1):
            verdicts = [final_verdict(config, r.attempts[:step]) for r in group]
            syntactic, semantic = _accuracies(verdicts)
            points.append(CurvePoint(domain, pipeline, axis, step if axis == "k" else step - 1, syntactic, semantic))
    return points


# ---------------------------------------------------------------------------
# export


def _csv(rows: Sequence[Any], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        values = asdict(row)
        writer.writerow([f"{values[c]:.2f}" if isinstance(values[c], float) else values[c] for c in columns])
    return buf.getvalue()


def summary_csv(summary: Sequence[SummaryRow]) -> str:
    return _csv(summary, list(SummaryRow.__dataclass_fields__))


def curves_csv(points: Sequence[CurvePoint]) -> str:
    return _csv(points, list(CurvePoint.__dataclass_fields__))


def export(records: Sequence[EvalRecord], summary: Sequence[SummaryRow], out: Path | str) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=_sort_key)
    (out / RECORDS_FILE).write_text("".join(r.to_json() + "\n" for r in ordered), encoding="utf-8")
    (out / SUMMARY_FILE).write_text(summary_csv(summary), encoding="utf-8")
    (out / CURVES_FILE).write_text(curves_csv(curves(ordered)), encoding="utf-8")
