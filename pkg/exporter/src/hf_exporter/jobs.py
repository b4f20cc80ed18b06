"""Job descriptions: which encoder, which language, how to train."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .schema import TAXONOMIES

MODEL_NAMES: dict[str, str] = {
    "unixcoder": "microsoft/unixcoder-base",
    "codebert": "microsoft/codebert-base",
    "graphcodebert": "microsoft/graphcodebert-base",
    "codeberta": "huggingface/CodeBERTa-small-v1",
}


@dataclass(frozen=True)
class AdapterConfig:
    r: int = 16
    alpha: float = 32.0
    dropout: float = 0.1

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass(frozen=True)
class TrainParams:
    """Training hyperparameters; epochs=0 keeps the fresh checkpoint."""

    gamma: float = 2.0
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
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size <= 0 or self.patience <= 0:
            raise ValueError("batch_size and patience must be positive")


@dataclass(frozen=True)
class ExportJob:
    """One (encoder, language) fine-tune-and-export unit.

    `model_path` points at a local directory with a config.json to build
    a randomly initialized encoder instead of downloading pretrained
    weights; `tokenizer="hashing"` swaps in the download-free tokenizer.
    Sequence length and context concatenation vary by deployment, so
    they are options rather than fixed defaults.
    """

    model: str
    language: str
    out_path: Path
    cost_gflops_per_sample: float
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    train: TrainParams = field(default_factory=TrainParams)
    max_length: int = 256
    use_context: bool = False
    model_path: str | None = None
    tokenizer: str = "pretrained"
    device: str = "cpu"
    name: str = ""

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(
                f"unknown model {self.model!r}; expected one of {sorted(MODEL_NAMES)}"
            )
        if self.language not in TAXONOMIES:
            raise ValueError(f"unknown language {self.language!r}")
        if self.cost_gflops_per_sample < 0:
            raise ValueError("cost_gflops_per_sample must be >= 0")
        if self.max_length <= 0:
            raise ValueError("max_length must be positive")
        if self.tokenizer not in ("pretrained", "hashing"):
            raise ValueError("tokenizer must be 'pretrained' or 'hashing'")
        if not self.name:
            object.__setattr__(self, "name", f"{self.model}-{self.language}")
        object.__setattr__(self, "out_path", Path(self.out_path))

    @property
    def hub_id(self) -> str:
        return MODEL_NAMES[self.model]


def validate_jobs(jobs: list[ExportJob]) -> None:
    """Jobs must not share an output path or a (model, language) pair."""
    paths: set[Path] = set()
    pairs: set[tuple[str, str]] = set()
    for job in jobs:
        resolved = Path(job.out_path).resolve()
        if resolved in paths:
            raise ValueError(f"duplicate output path {job.out_path}")
        pair = (job.model, job.language)
        if pair in pairs:
            raise ValueError(f"duplicate job for {job.model}/{job.language}")
        paths.add(resolved)
        pairs.add(pair)
