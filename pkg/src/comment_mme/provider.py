"""Probability providers.

A provider is anything that yields per-(sample, category) logits: an
external model whose scores were exported to a logits JSONL file, or the
built-in baseline below. The baseline is a hashed n-gram linear model
trained with focal loss so the whole pipeline runs at desk scale with no
GPU; external encoders plug in through the same file format.

Logits JSONL, one sample per line:

    {"id": "j1", "scores": {"java/summary": 1.3, ..., "java/rational": -0.2}}

Score keys must cover the full taxonomy of the sample's language.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import expit as sigmoid

from .corpus import (
    Dataset,
    Language,
    SentenceRecord,
    Split,
    Taxonomy,
    label_matrix,
    taxonomy_for,
)
from .errors import (
    DimensionMismatch,
    DivergedLoss,
    EmptySplit,
    LanguageMismatch,
    MissingCategory,
    NonFiniteValue,
    SchemaError,
)

PROB_EPS = 1e-7  # probability clamp; keeps log() finite without moving metrics

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999

DEFAULT_FEATURE_DIM = 2**18


@dataclass(frozen=True)
class ProviderDescriptor:
    """Identity and declared compute cost of one provider."""

    name: str
    cost_gflops_per_sample: float
    source: str = "logit_file"  # or "builtin_baseline"

    def __post_init__(self):
        if self.source not in ("logit_file", "builtin_baseline"):
            raise SchemaError(f"unknown provider source {self.source!r}")
        if not math.isfinite(self.cost_gflops_per_sample) or self.cost_gflops_per_sample < 0:
            raise SchemaError(f"provider {self.name!r}: cost must be finite and >= 0")


@dataclass(frozen=True)
class LogitMatrix:
    """Raw pre-sigmoid scores [n_samples x n_categories] for one provider."""

    provider: str
    language: Language
    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.ids), len(taxonomy_for(self.language))):
            raise SchemaError(
                f"logit matrix shape {self.values.shape} does not match "
                f"{len(self.ids)} ids x {self.language.value} taxonomy"
            )
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise SchemaError(f"provider {self.provider!r}: non-finite logits")
        if any(self.ids[i] > self.ids[i + 1] for i in range(len(self.ids) - 1)):
            raise SchemaError("logit rows must be sorted ascending by id")

    def select(self, ids: list[str]) -> "LogitMatrix":
        """Rows for the given ids (which must all be present), re-sorted."""
        index = {rid: i for i, rid in enumerate(self.ids)}
        missing = [rid for rid in ids if rid not in index]
        if missing:
            raise SchemaError(
                f"provider {self.provider!r}: no logits for ids {missing[:5]}"
            )
        ordered = sorted(ids)
        rows = np.array([index[rid] for rid in ordered], dtype=np.intp)
        return replace(self, ids=tuple(ordered), values=self.values[rows])


def load_logits(path: str | Path, taxonomy: Taxonomy, provider: str | None = None) -> LogitMatrix:
    """Read one provider's logits file and assemble the canonical matrix.

    Rows come out sorted ascending by id; columns follow taxonomy order.
    Missing category keys, unknown keys, duplicate ids, and non-finite
    values are all rejected.
    """
    p = Path(path)
    expected_keys = {f"{taxonomy.language.value}/{c}": c for c in taxonomy.categories}
    rows: dict[str, list[float]] = {}
    with p.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"{p}:{line_no}: invalid JSON: {e.msg}") from e
            if not isinstance(raw, dict) or "id" not in raw or "scores" not in raw:
                raise SchemaError(f"{p}:{line_no}: expected {{id, scores}}")
            rec_id = str(raw["id"])
            if rec_id in rows:
                raise SchemaError(f"{p}:{line_no}: duplicate id {rec_id!r}")
            scores = raw["scores"]
            if not isinstance(scores, dict):
                raise SchemaError(f"{p}:{line_no}: scores must be an object")
            for key in scores:
                if key not in expected_keys:
                    raise SchemaError(f"{p}:{line_no}: unknown score key {key!r}")
            row = []
            for category in taxonomy.categories:
                key = f"{taxonomy.language.value}/{category}"
                if key not in scores:
                    raise MissingCategory(rec_id, category)
                value = float(scores[key])
                if not math.isfinite(value):
                    raise NonFiniteValue(rec_id, category)
                row.append(value)
            rows[rec_id] = row
    ids = tuple(sorted(rows))
    values = np.array([rows[i] for i in ids], dtype=np.float64)
    values = values.reshape(len(ids), len(taxonomy))
    return LogitMatrix(
        provider=provider if provider is not None else p.stem,
        language=taxonomy.language,
        ids=ids,
        values=values,
    )


def write_logits(matrix: LogitMatrix, path: str | Path) -> None:
    """Inverse of load_logits; float values round-trip exactly."""
    taxonomy = taxonomy_for(matrix.language)
    with Path(path).open("w", encoding="utf-8") as f:
        for i, rec_id in enumerate(matrix.ids):
            scores = {
                f"{matrix.language.value}/{c}": float(matrix.values[i, j])
                for j, c in enumerate(taxonomy.categories)
            }
            f.write(json.dumps({"id": rec_id, "scores": scores}) + "\n")


# --- focal loss ----------------------------------------------------------


def _clamp(p: np.ndarray | float) -> np.ndarray | float:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def focal_loss(p: float, y: int, gamma: float = 2.0, pos_weight: float = 1.0) -> float:
    """-alpha_t * (1 - p_t)^gamma * log(p_t), with p clamped away from {0, 1}.

    p_t is p for a positive label and 1-p otherwise; alpha_t applies
    pos_weight to positives only. gamma=0 recovers binary cross-entropy.
    """
    p = float(_clamp(p))
    p_t = p if y == 1 else 1.0 - p
    alpha_t = pos_weight if y == 1 else 1.0
    return -alpha_t * (1.0 - p_t) ** gamma * math.log(p_t)


def focal_loss_grad(z: float, y: int, gamma: float = 2.0, pos_weight: float = 1.0) -> float:
    """d focal_loss / d z for p = sigmoid(z) (analytic form)."""
    p = float(_clamp(sigmoid(z)))
    if y == 1:
        # d/dz[-a (1-p)^g log p] with dp/dz = p(1-p)
        return pos_weight * (
            gamma * p * (1.0 - p) ** gamma * math.log(p) - (1.0 - p) ** (gamma + 1)
        )
    return -gamma * (1.0 - p) * p**gamma * math.log(1.0 - p) + p ** (gamma + 1)


def _focal_terms(p: np.ndarray, y: np.ndarray, gamma: float, pos_weight: np.ndarray) -> np.ndarray:
    """Elementwise focal loss for probability/label arrays (vectorized)."""
    p = _clamp(p)
    p_t = np.where(y == 1, p, 1.0 - p)
    alpha_t = np.where(y == 1, pos_weight, 1.0)
    return -alpha_t * (1.0 - p_t) ** gamma * np.log(p_t)


def _focal_grad_z(p: np.ndarray, y: np.ndarray, gamma: float, pos_weight: np.ndarray) -> np.ndarray:
    """Elementwise d loss / d logit (vectorized twin of focal_loss_grad)."""
    p = _clamp(p)
    pos = gamma * p * (1.0 - p) ** gamma * np.log(p) - (1.0 - p) ** (gamma + 1)
    neg = -gamma * (1.0 - p) * p**gamma * np.log(1.0 - p) + p ** (gamma + 1)
    return np.where(y == 1, pos_weight * pos, neg)


def focal_grad_prob(p: np.ndarray, y: np.ndarray, gamma: float, pos_weight: float = 1.0) -> np.ndarray:
    """Elementwise d loss / d p (used by gradient-based weight fitting)."""
    p = _clamp(p)
    pos = pos_weight * (gamma * (1.0 - p) ** (gamma - 1.0) * np.log(p) - (1.0 - p) ** gamma / p)
    neg = -gamma * p ** (gamma - 1.0) * np.log(1.0 - p) + p**gamma / (1.0 - p)
    return np.where(y == 1, pos, neg)


# --- hashed n-gram featurizer ---------------------------------------------


def _hash_token(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _token_stream(text: str) -> list[str]:
    words = text.lower().split()
    return words + [f"{a} {b}" for a, b in zip(words, words[1:])]


def featurize(texts: list[str], feature_dim: int) -> sparse.csr_matrix:
    """Signed feature hashing of word unigrams + bigrams.

    feature_dim must be a power of two; the bucket is the low bits of a
    64-bit blake2b hash and the sign comes from the top bit, so features are
    stable across processes and platforms.
    """
    if feature_dim <= 0 or feature_dim & (feature_dim - 1):
        raise ValueError(f"feature_dim must be a power of two, got {feature_dim}")
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    for text in texts:
        counts: dict[int, float] = {}
        for token in _token_stream(text):
            h = _hash_token(token)
            idx = h & (feature_dim - 1)
            sign = 1.0 if (h >> 63) == 0 else -1.0
            counts[idx] = counts.get(idx, 0.0) + sign
        for idx in sorted(counts):
            indices.append(idx)
            data.append(counts[idx])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(texts), feature_dim),
    )


# --- built-in baseline -----------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for the baseline training loop."""

    gamma: float = 2.0
    pos_weight: np.ndarray | None = None  # per-category; derived from data if None
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 2e-4
    weight_decay: float = 0.01
    adam_epsilon: float = 1e-8
    warmup_fraction: float = 0.10
    patience: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.epochs <= 0 or self.batch_size <= 0 or self.patience <= 0:
            raise ValueError("epochs, batch_size and patience must be positive")


@dataclass(frozen=True)
class BaselineModel:
    """Linear per-category heads over hashed n-gram features."""

    language: Language
    feature_dim: int
    weights: np.ndarray  # [n_categories, feature_dim]
    bias: np.ndarray  # [n_categories]


def default_pos_weight(labels: np.ndarray) -> np.ndarray:
    """Per-category negative/positive ratio, clamped to [1, 100]."""
    n = labels.shape[0]
    pos = labels.sum(axis=0).astype(np.float64)
    neg = n - pos
    with np.errstate(divide="ignore"):
        ratio = np.where(pos > 0, neg / np.maximum(pos, 1), np.inf)
    return np.clip(ratio, 1.0, 100.0)


def _macro_f1_at_half(probs: np.ndarray, labels: np.ndarray) -> float:
    preds = probs >= 0.5
    f1s = []
    for c in range(labels.shape[1]):
        tp = int(np.sum(preds[:, c] & (labels[:, c] == 1)))
        fp = int(np.sum(preds[:, c] & (labels[:, c] == 0)))
        fn = int(np.sum(~preds[:, c] & (labels[:, c] == 1)))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(f1s))


def train_baseline(
    dataset: Dataset,
    language: Language,
    config: TrainConfig,
    feature_dim: int = DEFAULT_FEATURE_DIM,
) -> BaselineModel:
    """Train the hashed n-gram baseline for one language.

    AdamW (beta1=0.9, beta2=0.999, decoupled weight decay on weights only)
    on mean focal loss, linear warmup then linear decay to zero, snapshot
    selection by validation macro-F1 at threshold 0.5, early stopping after
    `patience` epochs without improvement. Deterministic for a fixed seed.
    """
    train_records = dataset.subset(language, Split.TRAIN)
    valid_records = dataset.subset(language, Split.VALID)
    if not train_records:
        raise EmptySplit(f"no train records for {language.value}")
    if not valid_records:
        raise EmptySplit(f"no valid records for {language.value}")

    y_train = label_matrix(dataset, language, Split.TRAIN).astype(np.float64)
    y_valid = label_matrix(dataset, language, Split.VALID)
    x_train = featurize([r.text for r in train_records], feature_dim)
    x_valid = featurize([r.text for r in valid_records], feature_dim)

    n, n_cat = y_train.shape
    pos_weight = (
        np.asarray(config.pos_weight, dtype=np.float64)
        if config.pos_weight is not None
        else default_pos_weight(y_train)
    )
    if pos_weight.shape != (n_cat,):
        raise ValueError(f"pos_weight must have shape ({n_cat},)")

    rng = np.random.default_rng(config.seed)
    weights = np.zeros((n_cat, feature_dim))
    bias = np.zeros(n_cat)
    m_w = np.zeros_like(weights)
    v_w = np.zeros_like(weights)
    m_b = np.zeros_like(bias)
    v_b = np.zeros_like(bias)

    steps_per_epoch = math.ceil(n / config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    warmup_steps = int(config.warmup_fraction * total_steps)

    def lr_at(step: int) -> float:
        if warmup_steps and step < warmup_steps:
            return config.learning_rate * (step + 1) / warmup_steps
        remaining = max(total_steps - step, 0)
        return config.learning_rate * remaining / max(total_steps - warmup_steps, 1)

    best_f1 = -1.0
    best = (weights.copy(), bias.copy())
    stale_epochs = 0
    step = 0
    adam_t = 0

    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb = x_train[batch]
            yb = y_train[batch]
            z = xb @ weights.T + bias
            p = sigmoid(z)
            loss = float(np.mean(_focal_terms(p, yb, config.gamma, pos_weight)))
            if not math.isfinite(loss):
                raise DivergedLoss(f"loss diverged at step {step}")
            g_z = _focal_grad_z(p, yb, config.gamma, pos_weight) / (len(batch) * n_cat)
            g_w = g_z.T @ xb  # [n_cat, feature_dim], stays dense per row
            g_w = np.asarray(g_w)
            g_b = g_z.sum(axis=0)

            lr = lr_at(step)
            adam_t += 1
            bias_corr1 = 1.0 - _ADAM_BETA1**adam_t
            bias_corr2 = 1.0 - _ADAM_BETA2**adam_t
            for grad, param, m, v in ((g_w, weights, m_w, v_w), (g_b, bias, m_b, v_b)):
                m *= _ADAM_BETA1
                m += (1.0 - _ADAM_BETA1) * grad
                v *= _ADAM_BETA2
                v += (1.0 - _ADAM_BETA2) * grad**2
                param -= lr * (m / bias_corr1) / (np.sqrt(v / bias_corr2) + config.adam_epsilon)
            weights -= lr * config.weight_decay * weights  # decoupled; bias exempt
            step += 1

        valid_probs = sigmoid(x_valid @ weights.T + bias)
        epoch_f1 = _macro_f1_at_half(valid_probs, y_valid)
        if epoch_f1 > best_f1:
            best_f1 = epoch_f1
            best = (weights.copy(), bias.copy())
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= config.patience:
                break

    return BaselineModel(
        language=language, feature_dim=feature_dim, weights=best[0], bias=best[1]
    )


def predict_logits(
    model: BaselineModel, records: list[SentenceRecord], provider: str = "baseline"
) -> LogitMatrix:
    """Score records with a trained baseline; rows ascending by id."""
    for rec in records:
        if rec.language != model.language:
            raise LanguageMismatch(
                f"model is {model.language.value}, record {rec.id!r} is {rec.language.value}"
            )
    ordered = sorted(records, key=lambda r: r.id)
    x = featurize([r.text for r in ordered], model.feature_dim)
    z = np.asarray(x @ model.weights.T + model.bias, dtype=np.float64)
    return LogitMatrix(
        provider=provider,
        language=model.language,
        ids=tuple(r.id for r in ordered),
        values=z,
    )


# --- low-rank adapters ------------------------------------------------------


@dataclass(frozen=True)
class LoraAdapter:
    """Frozen weight W plus trainable low-rank update (alpha/r) * B @ A."""

    d_in: int
    d_out: int
    r: int
    alpha: float
    dropout: float
    A: np.ndarray  # [r, d_in], trainable
    B: np.ndarray  # [d_out, r], trainable
    W: np.ndarray  # [d_out, d_in], frozen

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("rank must be >= 1")
        if self.A.shape != (self.r, self.d_in) or self.B.shape != (self.d_out, self.r):
            raise DimensionMismatch("adapter factor shapes do not match (r, d_in, d_out)")
        if self.W.shape != (self.d_out, self.d_in):
            raise DimensionMismatch("frozen weight shape does not match (d_out, d_in)")

    @property
    def scale(self) -> float:
        return self.alpha / self.r


def lora_init(
    W: np.ndarray,
    r: int = 16,
    alpha: float = 32.0,
    dropout: float = 0.1,
    seed: int = 0,
) -> LoraAdapter:
    """Fresh adapter around a frozen matrix: A is small random, B is zero,
    so the effective weight starts exactly at W."""
    d_out, d_in = W.shape
    rng = np.random.default_rng(seed)
    A = rng.normal(0.0, 1.0 / max(r, 1), size=(r, d_in))
    B = np.zeros((d_out, r))
    return LoraAdapter(d_in=d_in, d_out=d_out, r=r, alpha=alpha, dropout=dropout, A=A, B=B, W=W)


def lora_effective_weight(adapter: LoraAdapter) -> np.ndarray:
    return adapter.W + adapter.scale * (adapter.B @ adapter.A)


def lora_forward(
    adapter: LoraAdapter,
    x: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """(W + (alpha/r) B A) x; dropout masks only the adapter path."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (adapter.d_in,):
        raise DimensionMismatch(f"expected input of length {adapter.d_in}, got {x.shape}")
    x_adapter = x
    if training and adapter.dropout > 0.0:
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        keep = rng.random(adapter.d_in) >= adapter.dropout
        x_adapter = x * keep / (1.0 - adapter.dropout)
    return adapter.W @ x + adapter.scale * (adapter.B @ (adapter.A @ x_adapter))


def lora_trainable_parameters(adapter: LoraAdapter) -> tuple[np.ndarray, np.ndarray]:
    """The tensors gradient descent may touch; W stays frozen."""
    return adapter.A, adapter.B


def lora_param_stats(dims: list[tuple[int, int]], r: int) -> tuple[int, int, float]:
    """Adapter parameter accounting over a set of (d_in, d_out) targets.

    Returns (trainable, frozen, trainable fraction) where each target
    contributes r*(d_in + d_out) trainable and d_in*d_out frozen entries.
    """
    if r < 1:
        raise ValueError("rank must be >= 1")
    if not dims:
        raise ValueError("dims must be non-empty")
    trainable = sum(r * (d_in + d_out) for d_in, d_out in dims)
    frozen = sum(d_in * d_out for d_in, d_out in dims)
    return trainable, frozen, trainable / (trainable + frozen)


# --- provider manifests -----------------------------------------------------


@dataclass(frozen=True)
class ProviderManifest:
    """Parsed provider entry: descriptor plus where its logits come from.

    `logits` is a single path (a file that may hold several languages) or a
    {language: path} map. Builtin-baseline entries carry a seed and optional
    train-config overrides instead.
    """

    descriptor: ProviderDescriptor
    logits: dict[Language, Path] = field(default_factory=dict)
    seed: int = 0
    train_overrides: dict = field(default_factory=dict)


def parse_manifest(entry: dict, base_dir: Path | None = None) -> ProviderManifest:
    """Parse one manifest object ({"name", "cost_gflops_per_sample", ...})."""
    if "name" not in entry or "cost_gflops_per_sample" not in entry:
        raise SchemaError("provider manifest needs name and cost_gflops_per_sample")
    source = entry.get("source", "logit_file")
    descriptor = ProviderDescriptor(
        name=str(entry["name"]),
        cost_gflops_per_sample=float(entry["cost_gflops_per_sample"]),
        source=source,
    )
    base = base_dir or Path(".")

    def resolve(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    logits: dict[Language, Path] = {}
    if source == "logit_file":
        raw = entry.get("logits")
        if raw is None:
            raise SchemaError(f"provider {descriptor.name!r}: missing logits path")
        if isinstance(raw, str):
            path = resolve(raw)
            for lang in Language:
                logits[lang] = path
        elif isinstance(raw, dict):
            for key, value in raw.items():
                logits[Language(key)] = resolve(str(value))
        else:
            raise SchemaError(f"provider {descriptor.name!r}: logits must be path or map")
    return ProviderManifest(
        descriptor=descriptor,
        logits=logits,
        seed=int(entry.get("seed", 0)),
        train_overrides=dict(entry.get("train", {})),
    )


def load_manifest_file(path: str | Path) -> ProviderManifest:
    p = Path(path)
    with p.open("r", encoding="utf-8") as f:
        entry = json.load(f)
    return parse_manifest(entry, base_dir=p.parent)
