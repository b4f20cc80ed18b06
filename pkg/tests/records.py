"""Record-building helpers shared across test modules."""

from __future__ import annotations

import json
from pathlib import Path

from comment_mme.corpus import Language, SentenceRecord, Split


def make_record(
    rec_id: str = "j0001",
    language: Language = Language.JAVA,
    text: str = "returns the cached value",
    split: Split = Split.TRAIN,
    labels: frozenset[str] | None = None,
    context: str | None = None,
) -> SentenceRecord:
    return SentenceRecord(
        id=rec_id,
        language=language,
        text=text,
        context=context,
        split=split,
        labels=labels if labels is not None else frozenset({"summary"}),
    )


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")
    return path
