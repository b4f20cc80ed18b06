"""Exception types shared across the pipeline.

Every error raised by this package derives from :class:`CommentMMEError`,
so callers can catch one base class at stage boundaries. Constructors take
the identifying pieces (record id, category, line number, ...) and build a
readable message from them.
"""

from __future__ import annotations


class CommentMMEError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CommentMMEError):
    """A run or preprocessing configuration is invalid."""


# --- dataset ingestion -------------------------------------------------


class ParseError(CommentMMEError):
    """A dataset line could not be parsed against the JSONL schema."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class UnknownCategory(CommentMMEError):
    """A label or lookup key falls outside a language's taxonomy."""

    def __init__(self, record_id: str, label: str):
        self.record_id = record_id
        self.label = label
        super().__init__(f"unknown category {label!r} for {record_id!r}")


class DuplicateId(CommentMMEError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"duplicate record id {record_id!r}")


class EmptySelection(CommentMMEError):
    """A (language, split) selection matched no records."""


# --- preprocessing ------------------------------------------------------


class MissingPlaceholder(CommentMMEError):
    """A mask-table placeholder does not occur in the text being unmasked."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(f"placeholder {token!r} not present in text")


# --- providers ----------------------------------------------------------


class SchemaError(CommentMMEError):
    """A logits or manifest file violates its schema."""


class MissingCategory(CommentMMEError):
    """A logits line does not cover the full taxonomy."""

    def __init__(self, record_id: str, category: str):
        self.record_id = record_id
        self.category = category
        super().__init__(f"record {record_id!r}: missing score for {category!r}")


class NonFiniteValue(CommentMMEError):
    def __init__(self, record_id: str, category: str):
        self.record_id = record_id
        self.category = category
        super().__init__(f"record {record_id!r}: non-finite score for {category!r}")


class EmptySplit(CommentMMEError):
    """Training requires a non-empty split for the requested language."""


class DivergedLoss(CommentMMEError):
    """The training loss became non-finite."""


class LanguageMismatch(CommentMMEError):
    """Records or configs do not share the expected language."""


class DimensionMismatch(CommentMMEError):
    """An input vector does not match the adapter's dimensions."""


# --- ensemble / thresholds ----------------------------------------------


class MisalignedMatrices(CommentMMEError):
    """Provider matrices do not share ids, language, or column order."""


class EmptyValidation(CommentMMEError):
    """Weight fitting requires a non-empty validation split."""


class MissingThreshold(CommentMMEError):
    def __init__(self, language: str, category: str):
        self.language = language
        self.category = category
        super().__init__(f"no threshold for {language}/{category}")


# --- metrics ------------------------------------------------------------


class LengthMismatch(CommentMMEError):
    """Prediction and label columns have different lengths."""


class EmptyList(CommentMMEError):
    """An aggregate was requested over zero category outcomes."""


class ZeroSupport(CommentMMEError):
    """Support-weighted aggregation requires at least one positive label."""


class EmptyInput(CommentMMEError):
    """Runtime measurement requires at least one record."""
