"""Per-category decision thresholds.

Instead of binarizing every probability at 0.5, each (language, category)
pair gets its own threshold chosen by exhaustive grid search on validation
data: evaluate F1 at every grid point (prediction = P >= t) and keep the
maximizer, preferring the smallest t on ties. 0.5 itself lies on the
default grid (0.10 + 20 * 0.02), so the tuned table can never do worse on
the split it was tuned on than the fixed-0.5 baseline.

Thresholds JSON: {"<lang>/<category>": {"t", "f1_valid", "fallback"}} plus
a top-level "grid" entry; loaders skip leading "//" comment lines.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Language, all_language_categories, taxonomy_for
from .ensemble import ProbabilityMatrix, _strip_comment_lines
from .errors import MisalignedMatrices, MissingThreshold, SchemaError

GRID_TOL = 1e-12

FALLBACK_T = 0.5


@dataclass(frozen=True)
class ThresholdGrid:
    """Closed interval [start, end] sampled every `step`."""

    start: float = 0.10
    end: float = 0.90
    step: float = 0.02

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("grid start must be below end")
        if self.step <= 0:
            raise ValueError("grid step must be positive")

    def points(self) -> tuple[float, ...]:
        n = int(round((self.end - self.start) / self.step)) + 1
        return tuple(round(self.start + k * self.step, 10) for k in range(n))

    def contains(self, t: float) -> bool:
        k = round((t - self.start) / self.step)
        return abs(self.start + k * self.step - t) <= GRID_TOL and 0 <= k < len(self.points())


def parse_grid(spec: str) -> ThresholdGrid:
    """Parse "start:end:step", e.g. "0.10:0.90:0.02"."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"bad grid spec {spec!r}: expected start:end:step")
    start, end, step = (float(p) for p in parts)
    return ThresholdGrid(start=start, end=end, step=step)


@dataclass(frozen=True)
class ThresholdEntry:
    t: float
    f1_valid: float
    fallback: bool = False


@dataclass(frozen=True)
class ThresholdTable:
    """Tuned threshold per (language, category), with the grid that produced it."""

    grid: ThresholdGrid = field(default_factory=ThresholdGrid)
    entries: dict[tuple[Language, str], ThresholdEntry] = field(default_factory=dict)

    def __post_init__(self):
        for (language, category), entry in self.entries.items():
            taxonomy_for(language).index(category)
            if not (entry.fallback or self.grid.contains(entry.t)):
                raise SchemaError(
                    f"{language.value}/{category}: threshold {entry.t} is off the grid"
                )

    def threshold(self, language: Language, category: str) -> float:
        key = (language, category)
        if key not in self.entries:
            raise MissingThreshold(language.value, category)
        return self.entries[key].t


def thresholds_to_json(table: ThresholdTable) -> dict:
    out: dict = {
        "grid": {"start": table.grid.start, "end": table.grid.end, "step": table.grid.step}
    }
    for language, category in all_language_categories():
        key = (language, category)
        if key not in table.entries:
            continue
        entry = table.entries[key]
        out[f"{language.value}/{category}"] = {
            "t": entry.t,
            "f1_valid": entry.f1_valid,
            "fallback": entry.fallback,
        }
    return out


def thresholds_from_json(obj: dict) -> ThresholdTable:
    raw_grid = obj.get("grid", {})
    grid = ThresholdGrid(
        start=float(raw_grid.get("start", 0.10)),
        end=float(raw_grid.get("end", 0.90)),
        step=float(raw_grid.get("step", 0.02)),
    )
    entries: dict[tuple[Language, str], ThresholdEntry] = {}
    for key, row in obj.items():
        if key == "grid":
            continue
        if "/" not in key:
            raise SchemaError(f"bad threshold key {key!r}: expected <lang>/<category>")
        lang_raw, category = key.split("/", 1)
        entries[(Language(lang_raw), category)] = ThresholdEntry(
            t=float(row["t"]),
            f1_valid=float(row["f1_valid"]),
            fallback=bool(row.get("fallback", False)),
        )
    return ThresholdTable(grid=grid, entries=entries)


def save_thresholds(table: ThresholdTable, path: str | Path, header: list[str] | None = None) -> None:
    body = json.dumps(thresholds_to_json(table), indent=2)
    prefix = "".join(f"// {line}\n" for line in header or [])
    Path(path).write_text(prefix + body + "\n", encoding="utf-8")


def load_thresholds(path: str | Path) -> ThresholdTable:
    text = _strip_comment_lines(Path(path).read_text(encoding="utf-8"))
    return thresholds_from_json(json.loads(text))


def _f1_at(probs: np.ndarray, labels: np.ndarray, t: float) -> float:
    preds = probs >= t
    pos = labels == 1
    tp = int(np.sum(preds & pos))
    fp = int(np.sum(preds & ~pos))
    fn = int(np.sum(~preds & pos))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def tune_thresholds(
    probs: ProbabilityMatrix,
    labels: np.ndarray,
    grid: ThresholdGrid | None = None,
) -> ThresholdTable:
    """Grid-search the F1-maximizing threshold for every category.

    Ties pick the smallest threshold. A category with no positive labels
    gets the 0.5 fallback, flagged in the table.
    """
    grid = grid or ThresholdGrid()
    taxonomy = taxonomy_for(probs.language)
    if labels.ndim != 2 or labels.shape != (len(probs.ids), len(taxonomy)):
        raise MisalignedMatrices(
            f"labels of shape {labels.shape} do not align with the probability matrix"
        )
    points = grid.points()
    entries: dict[tuple[Language, str], ThresholdEntry] = {}
    for j, category in enumerate(taxonomy.categories):
        y = labels[:, j]
        if not np.any(y == 1):
            warnings.warn(
                f"{probs.language.value}/{category}: no positive labels; "
                f"threshold falls back to {FALLBACK_T}",
                stacklevel=2,
            )
            entries[(probs.language, category)] = ThresholdEntry(
                t=FALLBACK_T, f1_valid=0.0, fallback=True
            )
            continue
        column = probs.values[:, j]
        best_t = points[0]
        best_f1 = _f1_at(column, y, points[0])
        for t in points[1:]:
            f1 = _f1_at(column, y, t)
            if f1 > best_f1:
                best_f1 = f1
                best_t = t
        entries[(probs.language, category)] = ThresholdEntry(t=best_t, f1_valid=best_f1)
    return ThresholdTable(grid=grid, entries=entries)


def apply_thresholds(probs: ProbabilityMatrix, table: ThresholdTable) -> np.ndarray:
    """Binarize: prediction(i, c) = 1 iff P(c|x_i) >= t_c."""
    taxonomy = taxonomy_for(probs.language)
    preds = np.zeros(probs.values.shape, dtype=np.int64)
    for j, category in enumerate(taxonomy.categories):
        t = table.threshold(probs.language, category)
        preds[:, j] = (probs.values[:, j] >= t).astype(np.int64)
    return preds
