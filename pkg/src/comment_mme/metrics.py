"""Evaluation metrics, aggregation, and the composite submission score.

Per-category precision, recall and F1 use the 0/0 -> 0 convention so
categories with no predicted or no actual positives score zero instead of
raising or returning NaN. The composite score blends the macro F1 with two
efficiency terms:

    score = 0.6 * f1_avg
          + 0.2 * max((t_max - t_model) / t_max, 0)
          + 0.2 * max((g_max - g_model) / g_max, 0)

Runtime is wall-clock milliseconds per sample; GFLOPS is declared provider
metadata times sample count, not a measurement.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import Language, taxonomy_for
from .errors import EmptyInput, EmptyList, LengthMismatch, SchemaError, ZeroSupport
from .provider import ProviderDescriptor


def f1_from_pr(precision: float, recall: float) -> float:
    """Harmonic mean, 0 when both terms are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class CategoryOutcome:
    """Confusion counts and derived metrics for one category."""

    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    support: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "CategoryOutcome":
        if min(tp, fp, fn, tn) < 0:
            raise ValueError("confusion counts must be nonnegative")
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            tn=tn,
            precision=precision,
            recall=recall,
            f1=f1_from_pr(precision, recall),
            support=tp + fn,
        )


def category_outcome(preds: Sequence[int] | np.ndarray, labels: Sequence[int] | np.ndarray) -> CategoryOutcome:
    """Confusion counts of one binary prediction column against its labels."""
    p = np.asarray(preds).astype(bool)
    y = np.asarray(labels).astype(bool)
    if p.shape != y.shape or p.ndim != 1:
        raise LengthMismatch(f"preds {p.shape} vs labels {y.shape}")
    return CategoryOutcome.from_counts(
        tp=int(np.sum(p & y)),
        fp=int(np.sum(p & ~y)),
        fn=int(np.sum(~p & y)),
        tn=int(np.sum(~p & ~y)),
    )


def macro_f1(outcomes: Sequence[CategoryOutcome]) -> float:
    """Unweighted mean F1 over categories."""
    if not outcomes:
        raise EmptyList("cannot average zero categories")
    return sum(o.f1 for o in outcomes) / len(outcomes)


def weighted_f1(outcomes: Sequence[CategoryOutcome]) -> float:
    """Support-weighted mean F1 over categories."""
    if not outcomes:
        raise EmptyList("cannot average zero categories")
    total = sum(o.support for o in outcomes)
    if total == 0:
        raise ZeroSupport("no positive examples in any category")
    return sum(o.support * o.f1 for o in outcomes) / total


@dataclass(frozen=True)
class ScoreInputs:
    """Everything the composite score needs."""

    f1_avg: float
    t_model_ms: float
    t_max_ms: float
    g_model: float
    g_max: float

    def __post_init__(self):
        values = (self.f1_avg, self.t_model_ms, self.t_max_ms, self.g_model, self.g_max)
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ValueError("score inputs must be finite and nonnegative")
        if self.t_max_ms <= 0 or self.g_max <= 0:
            raise ValueError("t_max and g_max must be positive")


def submission_score(inputs: ScoreInputs) -> float:
    """0.6 * accuracy term + 0.2 * latency headroom + 0.2 * compute headroom."""
    t_term = max((inputs.t_max_ms - inputs.t_model_ms) / inputs.t_max_ms, 0.0)
    g_term = max((inputs.g_max - inputs.g_model) / inputs.g_max, 0.0)
    return 0.6 * inputs.f1_avg + 0.2 * t_term + 0.2 * g_term


def measure_runtime(
    pipeline: Callable[[list], object], records: list, repetitions: int = 5
) -> float:
    """Median wall-clock milliseconds per record, after one warm-up pass."""
    if not records:
        raise EmptyInput("cannot time an empty record list")
    if repetitions < 3:
        raise ValueError("need at least 3 repetitions")
    pipeline(records)  # warm-up, discarded
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        pipeline(records)
        elapsed = time.perf_counter() - t0
        samples.append(elapsed * 1000.0 / len(records))
    return statistics.median(samples)


def total_gflops(manifest: Sequence[ProviderDescriptor], n_samples: int) -> float:
    """Sum of declared per-sample costs times the sample count."""
    if n_samples < 0:
        raise ValueError("n_samples must be nonnegative")
    return sum(d.cost_gflops_per_sample for d in manifest) * n_samples


@dataclass(frozen=True)
class ReportRow:
    language: Language
    category: str
    outcome: CategoryOutcome


@dataclass(frozen=True)
class EvalReport:
    """Per-category outcomes plus every aggregate the run reports."""

    rows: tuple[ReportRow, ...]
    macro_f1: float
    weighted_f1: float
    per_language: dict[Language, float]
    runtime_ms_per_sample: float
    total_gflops: float
    score: float

    def __post_init__(self):
        expected: list[tuple[Language, str]] = []
        for language in sorted({r.language for r in self.rows}, key=list(Language).index):
            expected.extend((language, c) for c in taxonomy_for(language).categories)
        actual = [(r.language, r.category) for r in self.rows]
        if actual != expected:
            raise SchemaError(
                "report rows must cover each present language's full taxonomy in order"
            )


def build_report(
    outcomes: dict[tuple[Language, str], CategoryOutcome],
    runtime_ms_per_sample: float,
    gflops: float,
    t_max_ms: float,
    g_max: float,
) -> EvalReport:
    """Assemble rows in canonical order and compute every aggregate."""
    languages = [l for l in Language if any(k[0] == l for k in outcomes)]
    rows: list[ReportRow] = []
    for language in languages:
        for category in taxonomy_for(language).categories:
            key = (language, category)
            if key not in outcomes:
                raise SchemaError(f"missing outcome for {language.value}/{category}")
            rows.append(ReportRow(language, category, outcomes[key]))
    all_outcomes = [r.outcome for r in rows]
    per_language = {
        language: macro_f1([r.outcome for r in rows if r.language == language])
        for language in languages
    }
    f1_avg = macro_f1(all_outcomes)
    score = submission_score(
        ScoreInputs(
            f1_avg=f1_avg,
            t_model_ms=runtime_ms_per_sample,
            t_max_ms=t_max_ms,
            g_model=gflops,
            g_max=g_max,
        )
    )
    return EvalReport(
        rows=tuple(rows),
        macro_f1=f1_avg,
        weighted_f1=weighted_f1(all_outcomes),
        per_language=per_language,
        runtime_ms_per_sample=runtime_ms_per_sample,
        total_gflops=gflops,
        score=score,
    )


_ROW_FIELDS = ("language", "category", "precision", "recall", "f1", "support")


def write_report_csv(report: EvalReport, path: str | Path, header: list[str] | None = None) -> None:
    """Category rows, then a summary block; floats use repr for lossless reads."""
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        for line in header or []:
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_ROW_FIELDS)
        for row in report.rows:
            o = row.outcome
            writer.writerow(
                [
                    row.language.value,
                    row.category,
                    repr(o.precision),
                    repr(o.recall),
                    repr(o.f1),
                    o.support,
                ]
            )
        writer.writerow(["summary", "macro_f1", repr(report.macro_f1)])
        writer.writerow(["summary", "weighted_f1", repr(report.weighted_f1)])
        for language, value in report.per_language.items():
            writer.writerow(["summary", f"macro_f1/{language.value}", repr(value)])
        writer.writerow(["summary", "runtime_ms_per_sample", repr(report.runtime_ms_per_sample)])
        writer.writerow(["summary", "total_gflops", repr(report.total_gflops)])
        writer.writerow(["summary", "submission_score", repr(report.score)])


@dataclass(frozen=True)
class ParsedReport:
    """What read_report_csv recovers: the emitted rows and summary values."""

    rows: tuple[tuple[str, str, float, float, float, int], ...]
    summary: dict[str, float]


def read_report_csv(path: str | Path) -> ParsedReport:
    rows: list[tuple[str, str, float, float, float, int]] = []
    summary: dict[str, float] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        lines = [l for l in f if not l.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or tuple(header) != _ROW_FIELDS:
        raise SchemaError(f"{path}: unexpected report header {header}")
    for record in reader:
        if not record:
            continue
        if record[0] == "summary":
            summary[record[1]] = float(record[2])
        else:
            lang, category, precision, recall, f1, support = record
            rows.append(
                (lang, category, float(precision), float(recall), float(f1), int(support))
            )
    return ParsedReport(rows=tuple(rows), summary=summary)
