"""Dataset model: languages, taxonomies, record ingestion and label encoding.

The dataset is a JSONL file with one sentence per line:

    {"id": "j1", "lang": "java", "text": "Returns the size.",
     "context": null, "split": "train", "labels": ["summary"]}

Category identifiers are lowercase concatenations (``keyimplementationpoints``);
:data:`DISPLAY_NAMES` maps them back to report-style names. Taxonomy order is
canonical and defines the column order of every matrix downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateId,
    EmptySelection,
    ParseError,
    UnknownCategory,
)


class Language(str, Enum):
    JAVA = "java"
    PYTHON = "python"
    PHARO = "pharo"


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"


_TAXONOMIES: dict[Language, tuple[str, ...]] = {
    Language.JAVA: (
        "summary",
        "ownership",
        "expand",
        "usage",
        "pointer",
        "deprecation",
        "rational",
    ),
    Language.PYTHON: (
        "usage",
        "parameters",
        "developmentnotes",
        "expand",
        "summary",
    ),
    Language.PHARO: (
        "keyimplementationpoints",
        "example",
        "responsibilities",
        "intent",
        "keymessages",
        "collaborators",
    ),
}

DISPLAY_NAMES: dict[str, str] = {
    "summary": "Summary",
    "ownership": "Ownership",
    "expand": "Expand",
    "usage": "Usage",
    "pointer": "Pointer",
    "deprecation": "Deprecation",
    "rational": "Rational",
    "parameters": "Parameters",
    "developmentnotes": "DevelopmentNotes",
    "keyimplementationpoints": "Key Impl. Points",
    "example": "Example",
    "responsibilities": "Responsibilities",
    "intent": "Intent",
    "keymessages": "Key Messages",
    "collaborators": "Collaborators",
}


@dataclass(frozen=True)
class Taxonomy:
    """Ordered category list for one language."""

    language: Language
    categories: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"duplicate categories for {self.language.value}")

    def index(self, category: str) -> int:
        try:
            return self.categories.index(category)
        except ValueError:
            raise UnknownCategory(self.language.value, category) from None

    def __len__(self) -> int:
        return len(self.categories)


def taxonomy_for(language: Language) -> Taxonomy:
    """Return the canonical taxonomy for a language."""
    return Taxonomy(language, _TAXONOMIES[language])


def all_language_categories() -> list[tuple[Language, str]]:
    """All (language, category) pairs in canonical report order."""
    pairs = []
    for lang in Language:
        pairs.extend((lang, c) for c in _TAXONOMIES[lang])
    return pairs


@dataclass(frozen=True)
class SentenceRecord:
    """One comment sentence with its language, split, and multi-hot labels."""

    id: str
    language: Language
    text: str
    context: str | None
    split: Split
    labels: frozenset[str]

    def with_text(self, text: str) -> "SentenceRecord":
        return replace(self, text=text)


@dataclass(frozen=True)
class Dataset:
    records: tuple[SentenceRecord, ...]

    @property
    def per_language_counts(self) -> dict[Language, int]:
        counts = {lang: 0 for lang in Language}
        for rec in self.records:
            counts[rec.language] += 1
        return counts

    def subset(self, language: Language, split: Split | None = None) -> list[SentenceRecord]:
        """Records for a language (and optionally split), ascending by id."""
        out = [
            r
            for r in self.records
            if r.language == language and (split is None or r.split == split)
        ]
        out.sort(key=lambda r: r.id)
        return out

    def languages(self) -> list[Language]:
        """Languages present, in canonical (java, python, pharo) order."""
        present = {r.language for r in self.records}
        return [lang for lang in Language if lang in present]


def _parse_line(line: str, line_no: int, seen_ids: set[str]) -> SentenceRecord:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(line_no, f"invalid JSON: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ParseError(line_no, "record must be a JSON object")

    for field in ("id", "lang", "text", "split", "labels"):
        if field not in raw:
            raise ParseError(line_no, f"missing field {field!r}")

    rec_id = str(raw["id"])
    if rec_id in seen_ids:
        raise DuplicateId(rec_id)

    try:
        language = Language(raw["lang"])
    except ValueError:
        raise ParseError(line_no, f"unknown language {raw['lang']!r}") from None
    try:
        split = Split(raw["split"])
    except ValueError:
        raise ParseError(line_no, f"unknown split {raw['split']!r}") from None

    labels = raw["labels"]
    if not isinstance(labels, list):
        raise ParseError(line_no, "labels must be a list")
    taxonomy = taxonomy_for(language)
    for label in labels:
        if label not in taxonomy.categories:
            raise UnknownCategory(rec_id, str(label))

    context = raw.get("context")
    if context is not None:
        context = str(context)

    seen_ids.add(rec_id)
    return SentenceRecord(
        id=rec_id,
        language=language,
        text=str(raw["text"]),
        context=context,
        split=split,
        labels=frozenset(labels),
    )


def load_dataset(path: str | Path, format: str = "jsonl") -> Dataset:
    """Load and validate a dataset file.

    Unknown labels, unknown languages, and duplicate ids are hard errors:
    silently dropping a label would corrupt every downstream F1.
    """
    if format != "jsonl":
        raise ParseError(0, f"unsupported format {format!r}")
    p = Path(path)
    records: list[SentenceRecord] = []
    seen_ids: set[str] = set()
    with p.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            records.append(_parse_line(line, line_no, seen_ids))
    return Dataset(records=tuple(records))


def record_to_json(record: SentenceRecord) -> dict:
    return {
        "id": record.id,
        "lang": record.language.value,
        "text": record.text,
        "context": record.context,
        "split": record.split.value,
        "labels": sorted(record.labels),
    }


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset back out, one record per line, ordered by id."""
    p = Path(path)
    ordered = sorted(dataset.records, key=lambda r: r.id)
    with p.open("w", encoding="utf-8") as f:
        for rec in ordered:
            f.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


def record_ids(dataset: Dataset, language: Language, split: Split) -> list[str]:
    """Ids of the matching records, ascending (the row order of every matrix)."""
    return [r.id for r in dataset.subset(language, split)]


def label_matrix(dataset: Dataset, language: Language, split: Split) -> np.ndarray:
    """Binary label matrix [n_samples x n_categories] in taxonomy column order.

    Rows are ascending by id; entry (i, c) is 1 iff category c is among the
    labels of sample i. Raises EmptySelection when nothing matches.
    """
    records = dataset.subset(language, split)
    if not records:
        raise EmptySelection(f"no records for {language.value}/{split.value}")
    taxonomy = taxonomy_for(language)
    matrix = np.zeros((len(records), len(taxonomy)), dtype=np.int64)
    for i, rec in enumerate(records):
        for label in rec.labels:
            matrix[i, taxonomy.index(label)] = 1
    return matrix
