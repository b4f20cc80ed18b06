"""Multi-provider code-comment classification.

Sentence-level comments from Java, Python, and Pharo projects are labeled
with language-specific category sets. Any number of probability providers
(external encoder logit files or the built-in hashed n-gram baseline)
are blended with per-category learned weights, binarized with tuned
per-category thresholds, and scored with standard multi-label metrics
plus a composite accuracy/efficiency score.
"""

from .corpus import (
    Dataset,
    Language,
    SentenceRecord,
    Split,
    Taxonomy,
    all_language_categories,
    label_matrix,
    load_dataset,
    save_dataset,
    taxonomy_for,
)
from .ensemble import (
    EnsembleWeights,
    ProbabilityMatrix,
    combine,
    fit_weights,
    load_weights,
    save_weights,
)
from .errors import CommentMMEError
from .metrics import (
    CategoryOutcome,
    EvalReport,
    ScoreInputs,
    category_outcome,
    macro_f1,
    measure_runtime,
    submission_score,
    total_gflops,
    weighted_f1,
)
from .provider import (
    LogitMatrix,
    ProviderDescriptor,
    TrainConfig,
    focal_loss,
    focal_loss_grad,
    load_logits,
    lora_forward,
    lora_init,
    lora_param_stats,
    predict_logits,
    sigmoid,
    train_baseline,
    write_logits,
)
from .textprep import PrepConfig, preprocess, segment_pharo
from .thresholds import (
    ThresholdGrid,
    ThresholdTable,
    apply_thresholds,
    load_thresholds,
    save_thresholds,
    tune_thresholds,
)

__version__ = "0.1.0"

__all__ = [
    "CategoryOutcome",
    "CommentMMEError",
    "Dataset",
    "EnsembleWeights",
    "EvalReport",
    "Language",
    "LogitMatrix",
    "PrepConfig",
    "ProbabilityMatrix",
    "ProviderDescriptor",
    "ScoreInputs",
    "SentenceRecord",
    "Split",
    "Taxonomy",
    "ThresholdGrid",
    "ThresholdTable",
    "TrainConfig",
    "all_language_categories",
    "apply_thresholds",
    "category_outcome",
    "combine",
    "fit_weights",
    "focal_loss",
    "focal_loss_grad",
    "label_matrix",
    "load_dataset",
    "load_logits",
    "load_thresholds",
    "load_weights",
    "lora_forward",
    "lora_init",
    "lora_param_stats",
    "macro_f1",
    "measure_runtime",
    "predict_logits",
    "preprocess",
    "save_dataset",
    "save_thresholds",
    "save_weights",
    "segment_pharo",
    "sigmoid",
    "submission_score",
    "taxonomy_for",
    "total_gflops",
    "train_baseline",
    "tune_thresholds",
    "weighted_f1",
    "write_logits",
]
