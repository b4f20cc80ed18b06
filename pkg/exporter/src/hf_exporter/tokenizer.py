"""Download-free tokenizer for hermetic runs and tests.

Words hash into a fixed id range, so any text encodes deterministically
with no vocabulary file. Real runs use the encoder's own pretrained
tokenizer instead; this one only has to be stable and collision-sparse.
"""

from __future__ import annotations

import hashlib
import re

import torch

_TOKEN = re.compile(r"[a-z0-9_]+|[^\sa-z0-9_]")

PAD_ID = 0
CLS_ID = 1
_RESERVED = 2


class HashingTokenizer:
    def __init__(self, vocab_size: int, max_length: int = 256):
        if vocab_size <= _RESERVED:
            raise ValueError("vocab_size must exceed the reserved ids")
        self.vocab_size = vocab_size
        self.max_length = max_length

    def _token_id(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return _RESERVED + int.from_bytes(digest, "little") % (
            self.vocab_size - _RESERVED
        )

    def __call__(self, texts: list[str]) -> dict[str, torch.Tensor]:
        encoded = []
        for text in texts:
            ids = [CLS_ID] + [
                self._token_id(t) for t in _TOKEN.findall(text.lower())
            ]
            encoded.append(ids[: self.max_length])
        width = max((len(ids) for ids in encoded), default=1)
        input_ids = torch.full((len(encoded), width), PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(encoded), width), dtype=torch.long)
        for i, ids in enumerate(encoded):
            input_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[i, : len(ids)] = 1
        return {"input_ids": input_ids, "attention_mask": mask}
