"""Dataset loading, pipeline evaluation and metric reporting.

Accuracy is a rule-based oracle (normalized substring / equality; fallback
answers always score 0), overlap is token recall against the ground truth
after lowercasing, punctuation stripping and stopword removal. Reports carry
every per-record row so the headline averages can be recomputed exactly from
the JSON.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ParseError
from .orchestrator import PipelineTrace, QueryTurn, SessionState
from .pipeline import PipelineRuntime
from .postanswer import FALLBACK_ANSWER
from .timing import SimulatedClock

SCHEMA_VERSION = 1

_PUNCT_RE = re.compile(r"[^\w\s]")
_WS_RE = re.compile(r"\s+")

TAXONOMY_AXES = ("branch", "dynamism", "category", "domain")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("dynarag").joinpath("assets/stopwords.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def normalize_text(text: str) -> str:
    text = _PUNCT_RE.sub(" ", text.lower())
    return _WS_RE.sub(" ", text).strip()


def content_tokens(text: str) -> set[str]:
    return {t for t in normalize_text(text).split() if t not in STOPWORDS}


def score_accuracy(final_answer: str, ground_truth: str) -> int:
    """1 iff the normalized truth appears in the normalized answer."""
    answer = normalize_text(final_answer)
    truth = normalize_text(ground_truth)
    if answer == normalize_text(FALLBACK_ANSWER):
        return 0
    if not truth:
        return 0
    return 1 if (truth == answer or truth in answer) else 0


def score_overlap(final_answer: str, ground_truth: str) -> float:
    """Token recall of the ground truth inside the answer."""
    truth_tokens = content_tokens(ground_truth)
    if not truth_tokens:
        return 0.0
    answer_tokens = content_tokens(final_answer)
    return len(truth_tokens & answer_tokens) / len(truth_tokens)


@dataclass(frozen=True)
class EvalRecord:
    turn: QueryTurn
    ground_truth: str
    taxonomy: dict[str, str]

    @classmethod
    def from_dict(cls, raw: dict, default_deadline_s: float) -> "EvalRecord":
        truth = raw["ground_truth"]
        if not truth:
            raise ValueError("ground_truth must be non-empty")
        turn = QueryTurn(
            session_id=raw["session_id"],
            turn_index=int(raw.get("turn_index", 0)),
            question=raw["question"],
            image_ref=raw.get("image_ref"),
            deadline_s=float(raw.get("deadline_s", default_deadline_s)),
        )
        taxonomy = {
            "dynamism": str(raw.get("taxonomy", {}).get("dynamism", "static")),
            "category": str(raw.get("taxonomy", {}).get("category", "unknown")),
            "domain": str(raw.get("taxonomy", {}).get("domain", "other")),
        }
        return cls(turn=turn, ground_truth=truth, taxonomy=taxonomy)


def load_dataset(path: str | Path, default_deadline_s: float) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(
                    EvalRecord.from_dict(json.loads(line), default_deadline_s)
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return records


@dataclass
class EvalReport:
    accuracy: float  # percentage
    overlap: float   # percentage
    elapse: float    # mean seconds
    n: int
    per_taxonomy: dict[str, dict[str, dict]]
    records: list[dict] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": self.schema_version,
                "accuracy": self.accuracy,
                "overlap": self.overlap,
                "elapse": self.elapse,
                "n": self.n,
                "per_taxonomy": self.per_taxonomy,
                "records": self.records,
            },
            indent=2,
            sort_keys=True,
        )

    def to_markdown(self) -> str:
        lines = [
            "| Group | Accuracy ↑ | Overlap ↑ | Elapse ↓ | n |",
            "|---|---|---|---|---|",
            f"| overall | {self.accuracy:.2f} | {self.overlap:.2f} "
            f"| {self.elapse:.3f} | {self.n} |",
        ]
        for axis in TAXONOMY_AXES:
            for label, values in sorted(self.per_taxonomy.get(axis, {}).items()):
                lines.append(
                    f"| {axis}:{label} | {values['accuracy']:.2f} "
                    f"| {values['overlap']:.2f} | {values['elapse']:.3f} "
                    f"| {values['n']} |"
                )
        return "\n".join(lines) + "\n"


def _aggregate(rows: list[dict]) -> dict:
    n = len(rows)
    if n == 0:
        return {"accuracy": 0.0, "overlap": 0.0, "elapse": 0.0, "n": 0}
    return {
        "accuracy": 100.0 * sum(r["accuracy"] for r in rows) / n,
        "overlap": 100.0 * sum(r["overlap"] for r in rows) / n,
        "elapse": sum(r["elapse"] for r in rows) / n,
        "n": n,
    }


def build_report(rows: list[dict]) -> EvalReport:
    overall = _aggregate(rows)
    per_taxonomy: dict[str, dict[str, dict]] = {}
    for axis in TAXONOMY_AXES:
        groups: dict[str, list[dict]] = {}
        for row in rows:
            groups.setdefault(row[axis], []).append(row)
        per_taxonomy[axis] = {label: _aggregate(g) for label, g in groups.items()}
    return EvalReport(
        accuracy=overall["accuracy"],
        overlap=overall["overlap"],
        elapse=overall["elapse"],
        n=overall["n"],
        per_taxonomy=per_taxonomy,
        records=rows,
    )


class EvalHarness:
    """Run sessions from a dataset through the pipeline and score them."""

    def __init__(self, runtime: PipelineRuntime, simulated_time: bool = True):
        self.runtime = runtime
        self.simulated_time = simulated_time

    def _run_one_session(self, records: list[EvalRecord]) -> list[dict]:
        clock = SimulatedClock() if self.simulated_time else None
        orchestrator = self.runtime.orchestrator(clock=clock)
        session = SessionState(
            session_id=records[0].turn.session_id,
            total_budget_s=self.runtime.config.limits.session_budget_s,
        )
        rows = []
        for record in sorted(records, key=lambda r: r.turn.turn_index):
            turn = record.turn
            wall_start = time.perf_counter()
            try:
                final_answer, trace = orchestrator.answer_turn(turn, session)
            except Exception:  # partial failure scores as fallback
                final_answer = FALLBACK_ANSWER
                trace = None
            wall = time.perf_counter() - wall_start
            if trace is not None:
                session.record(turn.question, final_answer, trace.elapsed_s,
                               trace.entity_name)
            elapse = min(wall, turn.deadline_s)
            rows.append(self._row(record, final_answer, trace, elapse))
        return rows

    @staticmethod
    def _row(record: EvalRecord, final_answer: str,
             trace: PipelineTrace | None, elapse: float) -> dict:
        return {
            "session_id": record.turn.session_id,
            "turn_index": record.turn.turn_index,
            "question": record.turn.question,
            "final_answer": final_answer,
            "ground_truth": record.ground_truth,
            "accuracy": score_accuracy(final_answer, record.ground_truth),
            "overlap": score_overlap(final_answer, record.ground_truth),
            "elapse": elapse,
            "branch": trace.route.branch.value if trace else "failed",
            "fallback": trace.answer.fallback if trace else True,
            "stages": trace.stages if trace else [],
            "dynamism": record.taxonomy["dynamism"],
            "category": record.taxonomy["category"],
            "domain": record.taxonomy["domain"],
        }

    def run(self, records: list[EvalRecord], parallelism: int = 1) -> EvalReport:
        sessions: dict[str, list[EvalRecord]] = {}
        for record in records:
            sessions.setdefault(record.turn.session_id, []).append(record)

        ordered = [sessions[sid] for sid in sorted(sessions)]
        if parallelism <= 1:
            batches = [self._run_one_session(group) for group in ordered]
        else:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                batches = list(pool.map(self._run_one_session, ordered))

        rows = [row for batch in batches for row in batch]
        rows.sort(key=lambda r: (r["session_id"], r["turn_index"]))
        return build_report(rows)


def run_eval(dataset_path: str | Path, runtime_or_config: PipelineRuntime | str | Path,
             parallelism: int = 1, simulated_time: bool = True) -> EvalReport:
    """Evaluate a dataset; the second argument may be a config file path."""
    if isinstance(runtime_or_config, (str, Path)):
        from .config import PipelineConfig
        from .pipeline import build_runtime

        runtime = build_runtime(PipelineConfig.from_file(runtime_or_config))
    else:
        runtime = runtime_or_config
    records = load_dataset(
        dataset_path, runtime.config.limits.turn_deadline_s
    )
    harness = EvalHarness(runtime, simulated_time=simulated_time)
    return harness.run(records, parallelism=parallelism)
