"""Low-rank adaptation of linear layers.

A frozen Linear W gains a trainable product B @ A scaled by alpha/r; A
starts small and random, B starts at zero, so the wrapped layer is an
exact identity of the original until training moves B.
"""

from __future__ import annotations

import torch
from torch import nn

TARGET_SUFFIXES = ("query", "key", "value", "dense")
HEAD_PREFIXES = ("classifier", "score")


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, r: int, alpha: float, dropout: float):
        super().__init__()
        if r <= 0:
            raise ValueError("r must be positive")
        self.base = base
        for p in self.base.parameters():
            p.requires_grad_(False)
        self.r = r
        self.scale = alpha / r
        self.lora_A = nn.Parameter(torch.empty(r, base.in_features))
        self.lora_B = nn.Parameter(torch.zeros(base.out_features, r))
        nn.init.normal_(self.lora_A, mean=0.0, std=1.0 / r)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        down = self.dropout(x) @ self.lora_A.transpose(0, 1)
        return self.base(x) + (down @ self.lora_B.transpose(0, 1)) * self.scale


def inject_adapters(
    model: nn.Module,
    r: int = 16,
    alpha: float = 32.0,
    dropout: float = 0.1,
    targets: tuple[str, ...] = TARGET_SUFFIXES,
    head_prefixes: tuple[str, ...] = HEAD_PREFIXES,
) -> int:
    """Wrap every target Linear in-place; freeze everything else.

    Targets match on the attribute name (query/key/value/dense), the
    classifier head subtree is skipped and left fully trainable.
    Returns the number of wrapped layers.
    """
    picked: list[tuple[nn.Module, str]] = []
    for name, module in model.named_modules():
        if name.split(".")[0] in head_prefixes:
            continue
        for attr, child in module.named_children():
            if isinstance(child, nn.Linear) and attr in targets:
                picked.append((module, attr))
    for module, attr in picked:
        child = getattr(module, attr)
        setattr(module, attr, LoraLinear(child, r=r, alpha=alpha, dropout=dropout))
    for name, param in model.named_parameters():
        keep = (
            "lora_A" in name
            or "lora_B" in name
            or name.split(".")[0] in head_prefixes
        )
        param.requires_grad_(keep)
    return len(picked)


def param_stats(model: nn.Module) -> tuple[int, int, float]:
    """(trainable, total, trainable fraction) by requires_grad."""
    trainable = sum(p.numel() for p in model.parameters() if p.requires_grad)
    total = sum(p.numel() for p in model.parameters())
    if total == 0:
        raise ValueError("model has no parameters")
    return trainable, total, trainable / total
