"""Language-aware comment text preprocessing.

Rules, applied in a fixed order (mask -> caret repair -> case split -> unmask):

* caret repair: OCR-style corruption replaced carets for dots. Java and
  Python comments never legitimately contain ``^``, so every occurrence is
  replaced. In Pharo ``^`` is the return operator, so only carets tightly
  flanked by word characters (``class^method``) are repaired; a caret at
  return position follows whitespace or line start and never matches.
* masking: documentation syntax that must survive verbatim (doc tags,
  ``{@code ...}`` spans, Sphinx field markers, Pharo keyword selectors and
  operators, dotted version numbers) is swapped for ``MSK<k>`` placeholders
  while the destructive rules run, then restored.
* case splitting: camelCase / PascalCase identifiers get spaces inserted at
  lower-to-upper boundaries; acronym runs stay fused up to the last capital
  before a lowercase letter (``HTTPServer`` -> ``HTTP Server``).

The protected-span tables below are the shipped defaults. Anything not in
them passes through as plain text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Language, SentenceRecord
from .errors import ConfigError, LanguageMismatch, MissingPlaceholder

# Dotted version numbers ("3.2.1") are retained verbatim in every language.
_VERSION_RE = re.compile(r"(?<![\d.])\d+(?:\.\d+)+(?![\d.])")

# Javadoc block tags are masked as bare tokens; inline tags and short HTML
# elements are masked with their whole span so nothing inside them is touched.
JAVA_BLOCK_TAGS = ("param", "return", "see", "deprecated", "throws", "since")
JAVA_HTML_ELEMENTS = ("code", "pre", "p")

PYTHON_FIELD_TAGS = ("param", "return", "returns", "rtype", "type", "raises")

# ":=" is listed before the selector pattern so "x:=5" is read as an
# assignment, not as the selector "x:".
PHARO_OPERATORS = (":=", "[ ]", "|", "#")

_SELECTOR_RE = re.compile(r"(?:[A-Za-z_][A-Za-z0-9_]*:)+")


def _java_patterns() -> list[re.Pattern]:
    tags = "|".join(JAVA_BLOCK_TAGS)
    elements = "|".join(JAVA_HTML_ELEMENTS)
    return [
        re.compile(r"\{@\w+[^{}]*\}"),
        re.compile(rf"<(?:{elements})>.*?</(?:{elements})>"),
        re.compile(rf"</?(?:{elements})\s*/?>"),
        re.compile(rf"@(?:{tags})\b"),
        _VERSION_RE,
    ]


def _python_patterns() -> list[re.Pattern]:
    tags = "|".join(PYTHON_FIELD_TAGS)
    return [
        re.compile(rf":(?:{tags})(?:\s+\w+)?:"),
        _VERSION_RE,
    ]


def _pharo_patterns() -> list[re.Pattern]:
    ops = "|".join(re.escape(op) for op in PHARO_OPERATORS)
    return [
        re.compile(ops),
        _SELECTOR_RE,
        _VERSION_RE,
    ]


_PATTERNS: dict[Language, list[re.Pattern]] = {
    Language.JAVA: _java_patterns(),
    Language.PYTHON: _python_patterns(),
    Language.PHARO: _pharo_patterns(),
}


@dataclass(frozen=True)
class MaskTable:
    """Ordered (placeholder, original) pairs produced by mask_protected."""

    entries: tuple[tuple[str, str], ...] = ()

    def __bool__(self) -> bool:
        return bool(self.entries)


@dataclass(frozen=True)
class PrepConfig:
    """Per-language rule toggles for preprocess()."""

    language: Language
    enable_case_split: bool = True
    enable_caret_fix: bool = True
    enable_segmentation: bool = False

    def __post_init__(self):
        if self.enable_segmentation and self.language != Language.PHARO:
            raise ConfigError(
                f"segmentation only applies to pharo, not {self.language.value}"
            )


def _collect_spans(text: str, patterns: list[re.Pattern]) -> list[tuple[int, int]]:
    """Non-overlapping protected spans; earlier patterns win overlaps."""
    spans: list[tuple[int, int]] = []

    def overlaps(start: int, end: int) -> bool:
        return any(start < e and s < end for s, e in spans)

    for pattern in patterns:
        for m in pattern.finditer(text):
            if m.start() == m.end():
                continue
            if not overlaps(m.start(), m.end()):
                spans.append((m.start(), m.end()))
    spans.sort()
    return spans


def _placeholders(text: str, count: int) -> list[str]:
    # Skip any MSK<k> token that already occurs literally in the input so
    # unmasking can never touch pre-existing text.
    out: list[str] = []
    k = 0
    while len(out) < count:
        token = f"MSK{k}"
        if token not in text:
            out.append(token)
        k += 1
    return out


def mask_protected(text: str, language: Language) -> tuple[str, MaskTable]:
    """Replace every protected span with a unique MSK<k> placeholder."""
    spans = _collect_spans(text, _PATTERNS[language])
    if not spans:
        return text, MaskTable()
    tokens = _placeholders(text, len(spans))
    pieces: list[str] = []
    cursor = 0
    entries: list[tuple[str, str]] = []
    for token, (start, end) in zip(tokens, spans):
        pieces.append(text[cursor:start])
        pieces.append(token)
        entries.append((token, text[start:end]))
        cursor = end
    pieces.append(text[cursor:])
    return "".join(pieces), MaskTable(tuple(entries))


def _token_index(token: str) -> int:
    return int(token[3:])


def unmask(text: str, table: MaskTable) -> str:
    """Substitute placeholders back; inverse of mask_protected.

    Replacement runs in descending placeholder index so MSK1 can never match
    inside MSK10.
    """
    for token, original in sorted(
        table.entries, key=lambda e: _token_index(e[0]), reverse=True
    ):
        if token not in text:
            raise MissingPlaceholder(token)
        text = text.replace(token, original, 1)
    return text


def _unmask_present(text: str, table: MaskTable) -> str:
    """Like unmask, but skips placeholders that landed in another segment."""
    for token, original in sorted(
        table.entries, key=lambda e: _token_index(e[0]), reverse=True
    ):
        if token in text:
            text = text.replace(token, original, 1)
    return text


_PHARO_CARET_RE = re.compile(r"(?<=\w)\^(?=\w)")


def fix_carets(text: str, language: Language) -> str:
    """Repair caret-for-dot corruption.

    Pharo keeps return carets: the contextual rule fires only when the caret
    is directly flanked by word characters, which a return-position caret
    (preceded by line start or whitespace) never is.
    """
    if language in (Language.JAVA, Language.PYTHON):
        return text.replace("^", ".")
    return _PHARO_CARET_RE.sub(".", text)


_LOWER_UPPER_RE = re.compile(r"(?<=[a-z])(?=[A-Z])")
_ACRONYM_WORD_RE = re.compile(r"(?<=[A-Z])(?=[A-Z][a-z])")


def split_cases(text: str) -> str:
    """Insert spaces at camelCase and acronym-to-word boundaries."""
    text = _LOWER_UPPER_RE.sub(" ", text)
    return _ACRONYM_WORD_RE.sub(" ", text)


# A header line: at most five purely alphabetic words then a colon.
_HEADER_RE = re.compile(r"[A-Za-z]+(?:\s+[A-Za-z]+){0,4}:$")

# Sentence-final period: split after "." followed by whitespace. Dots inside
# masked spans (versions, selectors) are hidden behind placeholders here.
_SENTENCE_SPLIT_RE = re.compile(r"(?<=\.)\s+")


def segment_pharo(comment: str) -> list[str]:
    """Split a structured class comment into sentence-level segments.

    Line breaks always split. A line that is a colon-delimited header stays
    whole; other lines split again on sentence-final periods. Keyword
    selectors are masked around the whole procedure so they never split.
    """
    if not comment:
        return []
    masked, table = mask_protected(comment, Language.PHARO)
    segments: list[str] = []
    for line in masked.split("\n"):
        line = line.strip()
        if not line:
            continue
        restored = _unmask_present(line, table)
        if _HEADER_RE.fullmatch(restored):
            segments.append(restored)
            continue
        for piece in _SENTENCE_SPLIT_RE.split(line):
            piece = piece.strip()
            if piece:
                segments.append(_unmask_present(piece, table))
    return segments


def preprocess(record: SentenceRecord, config: PrepConfig) -> SentenceRecord:
    """Apply the full rule pipeline to one record's text.

    Order is fixed: mask_protected -> fix_carets -> split_cases -> unmask.
    All fields except text are preserved.
    """
    if config.language != record.language:
        raise LanguageMismatch(
            f"config is {config.language.value}, record is {record.language.value}"
        )
    masked, table = mask_protected(record.text, record.language)
    if config.enable_caret_fix:
        masked = fix_carets(masked, record.language)
    if config.enable_case_split:
        masked = split_cases(masked)
    return record.with_text(unmask(masked, table))
