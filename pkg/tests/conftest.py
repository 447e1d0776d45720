from __future__ import annotations

import json
from pathlib import Path

import pytest

from nldb.catalog import load_from_database
from nldb.fixtures import build_corpus


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    dest = tmp_path_factory.mktemp("corpus")
    build_corpus(dest)
    return dest


@pytest.fixture(scope="session")
def gold_examples(corpus_dir) -> list[dict]:
    return json.loads((corpus_dir / "gold.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def catalogs(corpus_dir):
    cache = {}

    def get(db_id: str):
        if db_id not in cache:
            cache[db_id] = load_from_database(corpus_dir / "databases" / f"{db_id}.sqlite")
        return cache[db_id]

    return get


@pytest.fixture(scope="session")
def db_path(corpus_dir):
    def get(db_id: str) -> str:
        return str(corpus_dir / "databases" / f"{db_id}.sqlite")

    return get


@pytest.fixture(scope="session")
def dogs_catalog(catalogs):
    return catalogs("dog_kennels")
