"""Encoder and tokenizer construction for a job."""

from __future__ import annotations

import torch

from .errors import ModelLoadError
from .jobs import ExportJob
from .schema import TAXONOMIES
from .tokenizer import HashingTokenizer


def build_model(job: ExportJob) -> torch.nn.Module:
    """Sequence classifier with one output per taxonomy category.

    With `model_path` set, the model is built randomly initialized from
    the local config (no network); otherwise pretrained weights load
    from the hub and failures surface as ModelLoadError.
    """
    from transformers import AutoConfig, AutoModelForSequenceClassification

    num_labels = len(TAXONOMIES[job.language])
    try:
        if job.model_path is not None:
            config = AutoConfig.from_pretrained(job.model_path)
            config.num_labels = num_labels
            model = AutoModelForSequenceClassification.from_config(config)
        else:
            model = AutoModelForSequenceClassification.from_pretrained(
                job.hub_id, num_labels=num_labels
            )
    except (OSError, ValueError, KeyError) as e:
        raise ModelLoadError(f"cannot build model for {job.name}: {e}") from e
    return model.to(torch.device(job.device))


def build_tokenizer(job: ExportJob, model: torch.nn.Module):
    if job.tokenizer == "hashing":
        return HashingTokenizer(
            vocab_size=int(model.config.vocab_size), max_length=job.max_length
        )
    from transformers import AutoTokenizer

    try:
        return AutoTokenizer.from_pretrained(job.hub_id)
    except (OSError, ValueError, KeyError) as e:
        raise ModelLoadError(f"cannot load tokenizer for {job.name}: {e}") from e


def encode(tokenizer, texts: list[str], max_length: int) -> dict[str, torch.Tensor]:
    if isinstance(tokenizer, HashingTokenizer):
        return tokenizer(texts)
    batch = tokenizer(
        texts,
        padding=True,
        truncation=True,
        max_length=max_length,
        return_tensors="pt",
    )
    return dict(batch)


def job_text(record, use_context: bool) -> str:
    if use_context and record.context:
        return f"{record.text} {record.context}"
    return record.text
