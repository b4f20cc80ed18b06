from __future__ import annotations

import pytest

from comment_mme.corpus import Dataset, Split

from records import make_record


@pytest.fixture
def tiny_dataset() -> Dataset:
    """Six Java records, two per split, with known labels."""
    rows = [
        ("j0001", Split.TRAIN, {"summary"}),
        ("j0002", Split.TRAIN, {"usage", "pointer"}),
        ("j0003", Split.VALID, {"summary"}),
        ("j0004", Split.VALID, {"ownership"}),
        ("j0005", Split.TEST, {"expand"}),
        ("j0006", Split.TEST, {"summary", "rational"}),
    ]
    return Dataset(
        records=tuple(
            make_record(rec_id=r, split=s, labels=frozenset(l)) for r, s, l in rows
        )
    )
