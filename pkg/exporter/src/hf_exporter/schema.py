"""File contracts shared with the classification pipeline.

The pipeline consumes dataset JSONL, logits JSONL, and provider manifest
JSON; these are the only coupling points, so their shapes are mirrored
here verbatim. Score keys are "<lang>/<category>" with the full category
set of the language present on every line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

TAXONOMIES: dict[str, tuple[str, ...]] = {
    "java": (
        "summary",
        "ownership",
        "expand",
        "usage",
        "pointer",
        "deprecation",
        "rational",
    ),
    "python": ("usage", "parameters", "developmentnotes", "expand", "summary"),
    "pharo": (
        "keyimplementationpoints",
        "example",
        "responsibilities",
        "intent",
        "keymessages",
        "collaborators",
    ),
}

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class Record:
    id: str
    lang: str
    text: str
    split: str
    labels: tuple[str, ...]
    context: str | None = None


def read_dataset(path: str | Path) -> list[Record]:
    """Parse dataset JSONL, enforcing the pipeline's schema.

    Duplicate ids are refused outright: downstream logits files key on
    the id, so a duplicate would be ambiguous everywhere.
    """
    p = Path(path)
    records: list[Record] = []
    seen: set[str] = set()
    with p.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{p}:{line_no}: invalid JSON: {e.msg}") from e
            for key in ("id", "lang", "text", "split", "labels"):
                if key not in raw:
                    raise DataError(f"{p}:{line_no}: missing field {key!r}")
            lang = str(raw["lang"])
            if lang not in TAXONOMIES:
                raise DataError(f"{p}:{line_no}: unknown language {lang!r}")
            split = str(raw["split"])
            if split not in SPLITS:
                raise DataError(f"{p}:{line_no}: unknown split {split!r}")
            labels = raw["labels"]
            if not isinstance(labels, list):
                raise DataError(f"{p}:{line_no}: labels must be a list")
            unknown = set(map(str, labels)) - set(TAXONOMIES[lang])
            if unknown:
                raise DataError(f"{p}:{line_no}: labels not in taxonomy: {sorted(unknown)}")
            rec_id = str(raw["id"])
            if rec_id in seen:
                raise DataError(f"{p}:{line_no}: duplicate id {rec_id!r}")
            seen.add(rec_id)
            context = raw.get("context")
            records.append(
                Record(
                    id=rec_id,
                    lang=lang,
                    text=str(raw["text"]),
                    split=split,
                    labels=tuple(str(l) for l in labels),
                    context=None if context is None else str(context),
                )
            )
    return records


def write_logits_jsonl(
    path: str | Path, lang: str, rows: list[tuple[str, list[float]]]
) -> None:
    """One line per sample: {"id": ..., "scores": {"<lang>/<cat>": z}}."""
    categories = TAXONOMIES[lang]
    with Path(path).open("w", encoding="utf-8") as f:
        for rec_id, scores in rows:
            if len(scores) != len(categories):
                raise DataError(
                    f"{rec_id}: expected {len(categories)} scores, got {len(scores)}"
                )
            payload = {
                "id": rec_id,
                "scores": {
                    f"{lang}/{c}": float(z) for c, z in zip(categories, scores)
                },
            }
            f.write(json.dumps(payload) + "\n")


@dataclass(frozen=True)
class ManifestEntry:
    """Provider manifest object as the pipeline's loader expects it."""

    name: str
    cost_gflops_per_sample: float
    logits: dict[str, str] = field(default_factory=dict)  # lang -> path

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "cost_gflops_per_sample": self.cost_gflops_per_sample,
            "logits": dict(self.logits),
        }
