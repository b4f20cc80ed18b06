"""Shared test data: a tiny offline encoder config and a 50-sentence dataset."""

from hf_exporter.schema import TAXONOMIES

TINY_CONFIG = {
    "model_type": "bert",
    "vocab_size": 512,
    "hidden_size": 32,
    "num_hidden_layers": 2,
    "num_attention_heads": 2,
    "intermediate_size": 64,
    "max_position_embeddings": 96,
    "pad_token_id": 0,
}

# 13 = 2 layers x (query, key, value and 3 dense) + pooler dense.
TINY_TARGET_COUNT = 13


def fixture_records(n: int = 50) -> list[dict]:
    """Java sentences, one taxonomy label each, cycling so every split
    sees every category; i % 5 buckets give a 30/10/10 split."""
    categories = TAXONOMIES["java"]
    words = {
        "summary": "returns the cached value",
        "ownership": "author maintains this module",
        "expand": "internally the buffer grows twice",
        "usage": "call flush before closing",
        "pointer": "see the related reader class",
        "deprecation": "deprecated use the new api",
        "rational": "chosen because arrays stay compact",
    }
    records = []
    for i in range(n):
        category = categories[i % len(categories)]
        split = "train" if i % 5 < 3 else ("valid" if i % 5 == 3 else "test")
        records.append(
            {
                "id": f"j{i:04d}",
                "lang": "java",
                "text": f"{words[category]} case {i}",
                "split": split,
                "labels": [category],
                "context": None,
            }
        )
    return records
