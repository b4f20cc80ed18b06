"""Logits and manifest emission in the pipeline's file formats."""

from __future__ import annotations

import json
from pathlib import Path

from .jobs import ExportJob
from .modeling import job_text
from .schema import ManifestEntry, Record, read_dataset, write_logits_jsonl
from .train import Checkpoint, predict_logits


def export_logits(
    checkpoint: Checkpoint,
    dataset: str | Path | list[Record],
    out: str | Path,
    splits: tuple[str, ...] | None = None,
) -> int:
    """Write raw pre-sigmoid scores, one line per matching sample.

    An empty selection still produces the (empty) file, which the
    pipeline loads as a zero-row matrix. Returns the number of rows.
    `dataset` is a JSONL path or already-parsed records.
    """
    records = dataset if isinstance(dataset, list) else read_dataset(dataset)
    subset = [
        r
        for r in records
        if r.lang == checkpoint.language and (splits is None or r.split in splits)
    ]
    texts = [job_text(r, checkpoint.use_context) for r in subset]
    scores = predict_logits(checkpoint, texts)
    rows = [(r.id, scores[i].tolist()) for i, r in enumerate(subset)]
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_logits_jsonl(out_path, checkpoint.language, rows)
    return len(rows)


def write_manifest(job: ExportJob, logits_path: str | Path, out: str | Path) -> None:
    """Single provider-manifest JSON object referencing the logits file.

    The logits path is stored relative to the manifest when possible so
    the pair can move together.
    """
    manifest_path = Path(out)
    logits = Path(logits_path).resolve()
    try:
        stored = str(logits.relative_to(manifest_path.resolve().parent))
    except ValueError:
        stored = str(logits)
    entry = ManifestEntry(
        name=job.name,
        cost_gflops_per_sample=job.cost_gflops_per_sample,
        logits={job.language: stored},
    )
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(json.dumps(entry.to_json(), indent=2) + "\n")
