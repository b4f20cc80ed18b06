"""Weighted sigmoid ensembling of provider logits.

The combined probability for category c on sample x is

    P(c|x) = sum_m w_{m,c} * sigmoid(z_{m,c})

with one weight vector per category, constrained to the probability
simplex (w >= 0, sum w = 1) so the output always lands in [0, 1]. Weight
vectors are fitted per category on a validation split, either by
exhaustive search over a simplex grid or by softmax-parameterized
gradient descent on focal loss.

Weights JSON: {"<lang>/<category>": {"<provider>": float, ...}, ...};
loaders skip leading "//" comment lines.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Language, Taxonomy, all_language_categories, taxonomy_for
from .errors import (
    EmptyValidation,
    MisalignedMatrices,
    NonFiniteValue,
    SchemaError,
)
from .provider import LogitMatrix, focal_grad_prob, sigmoid

SIMPLEX_RESOLUTION = 0.05
GRADIENT_STEPS = 500
GRADIENT_LR = 0.05

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class EnsembleWeights:
    """Per-(language, category) weight vectors over a fixed provider order."""

    providers: tuple[str, ...]
    table: dict[tuple[Language, str], np.ndarray]

    def __post_init__(self):
        if not self.providers:
            raise SchemaError("at least one provider is required")
        if len(set(self.providers)) != len(self.providers):
            raise SchemaError("provider names must be unique")
        for (language, category), w in self.table.items():
            taxonomy_for(language).index(category)
            if w.shape != (len(self.providers),):
                raise SchemaError(
                    f"{language.value}/{category}: expected {len(self.providers)} weights"
                )
            if np.any(w < 0) or abs(float(w.sum()) - 1.0) > _SUM_TOL:
                raise SchemaError(
                    f"{language.value}/{category}: weights must be nonnegative and sum to 1"
                )

    def vector(self, language: Language, category: str) -> np.ndarray:
        key = (language, category)
        if key not in self.table:
            raise SchemaError(f"no weights for {language.value}/{category}")
        return self.table[key]

    def languages(self) -> list[Language]:
        present = {language for language, _ in self.table}
        return [l for l in Language if l in present]


def merge_weights(parts: list[EnsembleWeights]) -> EnsembleWeights:
    """Union of per-language weight tables sharing one provider order."""
    if not parts:
        raise SchemaError("nothing to merge")
    providers = parts[0].providers
    table: dict[tuple[Language, str], np.ndarray] = {}
    for part in parts:
        if part.providers != providers:
            raise SchemaError("cannot merge weight tables with different providers")
        for key, w in part.table.items():
            if key in table:
                raise SchemaError(f"duplicate weights for {key[0].value}/{key[1]}")
            table[key] = w
    return EnsembleWeights(providers=providers, table=table)


def weights_to_json(weights: EnsembleWeights) -> dict:
    """Serializable mapping, rows in canonical language/category order."""
    out: dict[str, dict[str, float]] = {}
    for language, category in all_language_categories():
        key = (language, category)
        if key not in weights.table:
            continue
        w = weights.table[key]
        out[f"{language.value}/{category}"] = {
            name: float(w[i]) for i, name in enumerate(weights.providers)
        }
    return out


def weights_from_json(obj: dict) -> EnsembleWeights:
    if not obj:
        raise SchemaError("empty weight table")
    providers: tuple[str, ...] | None = None
    table: dict[tuple[Language, str], np.ndarray] = {}
    for key, row in obj.items():
        if "/" not in key:
            raise SchemaError(f"bad weight key {key!r}: expected <lang>/<category>")
        lang_raw, category = key.split("/", 1)
        language = Language(lang_raw)
        row_providers = tuple(row)
        if providers is None:
            providers = row_providers
        elif row_providers != providers:
            raise SchemaError(f"{key}: provider set differs from previous rows")
        table[(language, category)] = np.array([float(row[p]) for p in providers])
    assert providers is not None
    return EnsembleWeights(providers=providers, table=table)


def _strip_comment_lines(text: str) -> str:
    lines = [l for l in text.splitlines() if not l.lstrip().startswith("//")]
    return "\n".join(lines)


def save_weights(weights: EnsembleWeights, path: str | Path, header: list[str] | None = None) -> None:
    body = json.dumps(weights_to_json(weights), indent=2)
    prefix = "".join(f"// {line}\n" for line in header or [])
    Path(path).write_text(prefix + body + "\n", encoding="utf-8")


def load_weights(path: str | Path) -> EnsembleWeights:
    text = _strip_comment_lines(Path(path).read_text(encoding="utf-8"))
    return weights_from_json(json.loads(text))


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Combined P(c|x) per (sample, category), values in [0, 1]."""

    language: Language
    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.ids), len(taxonomy_for(self.language))):
            raise SchemaError(
                f"probability matrix shape {self.values.shape} does not match "
                f"{len(self.ids)} ids x {self.language.value} taxonomy"
            )
        if self.values.size:
            if not np.all(np.isfinite(self.values)):
                raise SchemaError("non-finite probabilities")
            if self.values.min() < 0.0 or self.values.max() > 1.0:
                raise SchemaError("probabilities must lie in [0, 1]")


def combine(logits: list[LogitMatrix], weights: EnsembleWeights) -> ProbabilityMatrix:
    """Apply the per-category weighted sigmoid mix to aligned logit matrices.

    Matrices are matched to weight columns by provider name; they must all
    share the same language and id sequence.
    """
    if not logits:
        raise SchemaError("no logit matrices to combine")
    by_name = {m.provider: m for m in logits}
    if set(by_name) != set(weights.providers) or len(by_name) != len(logits):
        raise SchemaError(
            f"providers {sorted(by_name)} do not match weight table {list(weights.providers)}"
        )
    first = logits[0]
    for m in logits[1:]:
        if m.language != first.language:
            raise MisalignedMatrices("logit matrices span different languages")
        if m.ids != first.ids:
            raise MisalignedMatrices("logit matrices cover different sample ids")
    taxonomy = taxonomy_for(first.language)
    n = len(first.ids)
    out = np.zeros((n, len(taxonomy)))
    for j, category in enumerate(taxonomy.categories):
        w = weights.vector(first.language, category)
        column = np.zeros(n)
        for k, name in enumerate(weights.providers):
            column += w[k] * sigmoid(by_name[name].values[:, j])
        out[:, j] = column
    return ProbabilityMatrix(
        language=first.language, ids=first.ids, values=np.clip(out, 0.0, 1.0)
    )


def write_probabilities(matrix: ProbabilityMatrix, path: str | Path) -> None:
    """Same JSONL shape as logits files, but values are probabilities."""
    taxonomy = taxonomy_for(matrix.language)
    with Path(path).open("w", encoding="utf-8") as f:
        for i, rec_id in enumerate(matrix.ids):
            scores = {
                f"{matrix.language.value}/{c}": float(matrix.values[i, j])
                for j, c in enumerate(taxonomy.categories)
            }
            f.write(json.dumps({"id": rec_id, "scores": scores}) + "\n")


def load_probabilities(path: str | Path, taxonomy: Taxonomy) -> ProbabilityMatrix:
    from .provider import load_logits

    raw = load_logits(path, taxonomy)
    if raw.values.size and (raw.values.min() < 0.0 or raw.values.max() > 1.0):
        raise SchemaError(f"{path}: probabilities must lie in [0, 1]")
    return ProbabilityMatrix(language=raw.language, ids=raw.ids, values=raw.values)


# --- weight fitting ---------------------------------------------------------


def simplex_candidates(m: int, resolution: float = SIMPLEX_RESOLUTION) -> np.ndarray:
    """All weight vectors on the (m-1)-simplex with the given resolution,
    in ascending lexicographic order. For m=4 at 0.05 that is 1,771 vectors."""
    if m < 1:
        raise ValueError("need at least one provider")
    k = round(1.0 / resolution)
    if abs(k * resolution - 1.0) > 1e-9:
        raise ValueError("resolution must evenly divide 1.0")

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, parts - 1):
                yield (head, *tail)

    grid = np.array(list(compositions(k, m)), dtype=np.float64)
    return grid / k


def _count_entropy(counts: tuple[int, ...], k: int) -> float:
    """Shannon entropy of counts/k, summed over the sorted multiset so
    permutations of the same weights produce bit-identical values."""
    total = 0.0
    for c in sorted(counts):
        if c:
            w = c / k
            total += -w * math.log(w)
    return total


def _f1_curve(probs_by_candidate: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """F1 at threshold 0.5 for each candidate column (0/0 counts as 0)."""
    preds = probs_by_candidate >= 0.5
    pos = labels.astype(bool)[:, None]
    tp = np.sum(preds & pos, axis=0)
    fp = np.sum(preds & ~pos, axis=0)
    fn = int(pos.sum()) - tp
    denom = 2 * tp + fp + fn
    with np.errstate(invalid="ignore"):
        f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)
    return f1


def fit_weights(
    valid_logits: list[LogitMatrix],
    valid_labels: np.ndarray,
    method: str = "simplex_grid",
    seed: int = 0,
    gamma: float = 2.0,
) -> EnsembleWeights:
    """Fit one weight vector per category of the matrices' language.

    simplex_grid scores every grid candidate by validation F1 of the
    combined probabilities binarized at 0.5; ties prefer higher weight
    entropy, then the lexicographically smallest vector. gradient runs 500
    deterministic full-batch descent steps on mean focal loss over
    softmax-parameterized weights. Categories with no positive validation
    labels fall back to uniform weights with a warning.
    """
    if not valid_logits:
        raise EmptyValidation("no logit matrices")
    first = valid_logits[0]
    for m in valid_logits[1:]:
        if m.language != first.language or m.ids != first.ids:
            raise MisalignedMatrices("validation matrices are not aligned")
    n, n_cat = valid_labels.shape if valid_labels.ndim == 2 else (0, 0)
    taxonomy = taxonomy_for(first.language)
    if n == 0:
        raise EmptyValidation(f"no validation samples for {first.language.value}")
    if (n, n_cat) != (len(first.ids), len(taxonomy)):
        raise MisalignedMatrices("labels do not align with the logit matrices")
    if method not in ("simplex_grid", "gradient"):
        raise ValueError(f"unknown fitting method {method!r}")

    providers = tuple(m.provider for m in valid_logits)
    if len(set(providers)) != len(providers):
        raise SchemaError("duplicate provider names")
    n_providers = len(providers)
    # sigmoids[i, j, m] for sample i, category j, provider m
    sig = np.stack([sigmoid(m.values) for m in valid_logits], axis=2)
    uniform = np.full(n_providers, 1.0 / n_providers)

    table: dict[tuple[Language, str], np.ndarray] = {}
    for j, category in enumerate(taxonomy.categories):
        y = valid_labels[:, j]
        if not np.any(y == 1):
            warnings.warn(
                f"{first.language.value}/{category}: no positive validation labels; "
                "using uniform weights",
                stacklevel=2,
            )
            table[(first.language, category)] = uniform.copy()
            continue
        s = sig[:, j, :]  # [n x m]
        if method == "simplex_grid":
            table[(first.language, category)] = _fit_simplex_grid(s, y)
        else:
            table[(first.language, category)] = _fit_gradient(s, y, seed=seed, gamma=gamma)
    return EnsembleWeights(providers=providers, table=table)


def _fit_simplex_grid(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    m = s.shape[1]
    k = round(1.0 / SIMPLEX_RESOLUTION)
    candidates = simplex_candidates(m)
    f1 = _f1_curve(s @ candidates.T, y)
    best_idx = 0
    best_key = (f1[0], _count_entropy(tuple(np.rint(candidates[0] * k).astype(int)), k))
    for idx in range(1, len(candidates)):
        key = (f1[idx], _count_entropy(tuple(np.rint(candidates[idx] * k).astype(int)), k))
        if key > best_key:
            best_key = key
            best_idx = idx
    return candidates[best_idx]


def _fit_gradient(s: np.ndarray, y: np.ndarray, seed: int, gamma: float) -> np.ndarray:
    n, m = s.shape
    rng = np.random.default_rng(seed)
    theta = rng.normal(0.0, 0.01, size=m)
    for _ in range(GRADIENT_STEPS):
        shifted = theta - theta.max()
        w = np.exp(shifted)
        w /= w.sum()
        p = s @ w
        g_p = focal_grad_prob(p, y, gamma) / n
        # dp_i/dtheta_k = w_k * (s_ik - p_i)
        grad = w * ((s - p[:, None]).T @ g_p)
        theta = theta - GRADIENT_LR * grad
        if not np.all(np.isfinite(theta)):
            raise NonFiniteValue("<gradient>", "weights")
    shifted = theta - theta.max()
    w = np.exp(shifted)
    w /= w.sum()
    return w
