"""Bridge between transformer encoders and the comment-mme pipeline.

Fine-tunes sequence classifiers with low-rank adapters and writes logits
files plus provider manifests in the pipeline's file formats. The two
packages share no code, only the file contracts in `schema`.
"""

from .errors import DataError, ExportError, ModelLoadError
from .export import export_logits, write_manifest
from .jobs import MODEL_NAMES, AdapterConfig, ExportJob, TrainParams, validate_jobs
from .lora import LoraLinear, inject_adapters, param_stats
from .schema import TAXONOMIES, read_dataset
from .train import Checkpoint, focal_loss_with_logits, predict_logits, train_adapter

__all__ = [
    "AdapterConfig",
    "Checkpoint",
    "DataError",
    "ExportError",
    "ExportJob",
    "LoraLinear",
    "MODEL_NAMES",
    "ModelLoadError",
    "TAXONOMIES",
    "TrainParams",
    "export_logits",
    "focal_loss_with_logits",
    "inject_adapters",
    "param_stats",
    "predict_logits",
    "read_dataset",
    "train_adapter",
    "validate_jobs",
    "write_manifest",
]
