import json
from pathlib import Path

import pytest

from exporter_fixtures import TINY_CONFIG, fixture_records


@pytest.fixture(scope="session")
def dataset_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "data.jsonl"
    with path.open("w", encoding="utf-8") as f:
        for rec in fixture_records():
            f.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("tinymodel")
    (d / "config.json").write_text(json.dumps(TINY_CONFIG))
    return d
