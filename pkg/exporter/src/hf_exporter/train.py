"""Adapter fine-tuning with focal loss and early stopping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from pathlib import Path

from .errors import DataError
from .jobs import ExportJob
from .lora import inject_adapters, param_stats
from .modeling import build_model, build_tokenizer, encode, job_text
from .schema import TAXONOMIES, Record, read_dataset

PROB_EPS = 1e-7


def focal_loss_with_logits(
    logits: torch.Tensor,
    targets: torch.Tensor,
    gamma: float = 2.0,
    pos_weight: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean of -alpha_t * (1 - p_t)^gamma * log(p_t); gamma=0 is plain
    weighted cross-entropy."""
    p = torch.sigmoid(logits).clamp(PROB_EPS, 1.0 - PROB_EPS)
    p_t = torch.where(targets > 0, p, 1.0 - p)
    loss = -((1.0 - p_t) ** gamma) * torch.log(p_t)
    if pos_weight is not None:
        loss = torch.where(targets > 0, pos_weight * loss, loss)
    return loss.mean()


def default_pos_weight(labels: np.ndarray) -> torch.Tensor:
    """Per-category negative/positive ratio, clamped to [1, 100]."""
    n = labels.shape[0]
    pos = labels.sum(axis=0).astype(np.float64)
    with np.errstate(divide="ignore"):
        ratio = np.where(pos > 0, (n - pos) / np.maximum(pos, 1), 100.0)
    return torch.from_numpy(np.clip(ratio, 1.0, 100.0))


def macro_f1_at_half(logits: np.ndarray, labels: np.ndarray) -> float:
    preds = logits >= 0.0  # sigmoid(z) >= 0.5 iff z >= 0
    f1s = []
    for j in range(labels.shape[1]):
        tp = int(np.sum(preds[:, j] & (labels[:, j] == 1)))
        fp = int(np.sum(preds[:, j] & (labels[:, j] == 0)))
        fn = int(np.sum(~preds[:, j] & (labels[:, j] == 1)))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(f1s))


@dataclass
class Checkpoint:
    model: torch.nn.Module
    tokenizer: object
    language: str
    categories: tuple[str, ...]
    max_length: int
    use_context: bool


def _label_matrix(records: list[Record], categories: tuple[str, ...]) -> np.ndarray:
    y = np.zeros((len(records), len(categories)), dtype=np.int64)
    index = {c: j for j, c in enumerate(categories)}
    for i, r in enumerate(records):
        for label in r.labels:
            y[i, index[label]] = 1
    return y


def predict_logits(
    checkpoint: Checkpoint, texts: list[str], batch_size: int = 32
) -> np.ndarray:
    device = next(checkpoint.model.parameters()).device
    checkpoint.model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            batch = encode(
                checkpoint.tokenizer,
                texts[start : start + batch_size],
                checkpoint.max_length,
            )
            batch = {k: v.to(device) for k, v in batch.items()}
            out.append(checkpoint.model(**batch).logits.cpu().numpy())
    if not out:
        return np.zeros((0, len(checkpoint.categories)), dtype=np.float64)
    return np.concatenate(out).astype(np.float64)


def train_adapter(
    job: ExportJob, dataset: str | Path | list[Record], log=print
) -> Checkpoint:
    """Fine-tune adapters + classification head for one (model, language).

    Base weights stay frozen; training minimizes mean focal loss with
    linear warmup then linear decay, snapshots the best validation
    macro-F1 at threshold 0.5, and stops early after `patience` epochs
    without improvement. epochs=0 returns the fresh zero-init adapter
    untouched. `dataset` is a JSONL path or already-parsed records.
    """
    records = dataset if isinstance(dataset, list) else read_dataset(dataset)
    categories = TAXONOMIES[job.language]
    subset = [r for r in records if r.lang == job.language]
    cfg = job.train

    torch.manual_seed(cfg.seed)
    model = build_model(job)
    injected = inject_adapters(
        model, r=job.adapter.r, alpha=job.adapter.alpha, dropout=job.adapter.dropout
    )
    trainable, total, fraction = param_stats(model)
    log(
        f"{job.name}: {injected} adapted layers, trainable parameters "
        f"{trainable}/{total} ({fraction:.2%})"
    )
    checkpoint = Checkpoint(
        model=model,
        tokenizer=build_tokenizer(job, model),
        language=job.language,
        categories=categories,
        max_length=job.max_length,
        use_context=job.use_context,
    )
    if cfg.epochs == 0:
        model.eval()
        return checkpoint

    train_records = [r for r in subset if r.split == "train"]
    valid_records = [r for r in subset if r.split == "valid"]
    if not train_records:
        raise DataError(f"no train records for {job.language}")
    if not valid_records:
        raise DataError(f"no valid records for {job.language}")

    y_train = _label_matrix(train_records, categories)
    y_valid = _label_matrix(valid_records, categories)
    texts = [job_text(r, job.use_context) for r in train_records]
    valid_texts = [job_text(r, job.use_context) for r in valid_records]
    device = next(model.parameters()).device
    encoded = encode(checkpoint.tokenizer, texts, job.max_length)
    encoded = {k: v.to(device) for k, v in encoded.items()}
    targets = torch.from_numpy(y_train.astype(np.float32)).to(device)
    pos_weight = default_pos_weight(y_train).to(dtype=torch.float32, device=device)

    decay, no_decay = [], []
    for p in model.parameters():
        if p.requires_grad:
            (decay if p.ndim > 1 else no_decay).append(p)
    optimizer = torch.optim.AdamW(
        [
            {"params": decay, "weight_decay": cfg.weight_decay},
            {"params": no_decay, "weight_decay": 0.0},
        ],
        lr=cfg.learning_rate,
        betas=(0.9, 0.999),
        eps=cfg.adam_epsilon,
    )
    n = len(train_records)
    steps_per_epoch = (n + cfg.batch_size - 1) // cfg.batch_size
    total_steps = steps_per_epoch * cfg.epochs
    warmup_steps = int(cfg.warmup_fraction * total_steps)

    def lr_factor(step: int) -> float:
        if warmup_steps and step < warmup_steps:
            return (step + 1) / warmup_steps
        return max(total_steps - step, 0) / max(total_steps - warmup_steps, 1)

    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, lr_factor)
    shuffler = torch.Generator().manual_seed(cfg.seed)

    best_f1 = -1.0
    best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    stale = 0
    for _ in range(cfg.epochs):
        model.train()
        order = torch.randperm(n, generator=shuffler)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch = {k: v[idx] for k, v in encoded.items()}
            optimizer.zero_grad()
            logits = model(**batch).logits
            loss = focal_loss_with_logits(
                logits, targets[idx], gamma=cfg.gamma, pos_weight=pos_weight
            )
            loss.backward()
            optimizer.step()
            scheduler.step()
        f1 = macro_f1_at_half(predict_logits(checkpoint, valid_texts), y_valid)
        if f1 > best_f1:
            best_f1 = f1
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    model.load_state_dict(best_state)
    model.eval()
    log(f"{job.name}: best validation macro-F1 {best_f1:.4f}")
    return checkpoint
