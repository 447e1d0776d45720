from __future__ import annotations

import json
import sqlite3

import pytest

from nldb.catalog import (
    Affinity,
    CatalogError,
    affinity_from_declared,
    content_preview,
    load_from_database,
    load_from_spider_tables,
)


def test_dog_kennels_tables(dogs_catalog):
    names = [t.name for t in dogs_catalog.tables]
    assert "Dogs" in names and "Treatments" in names
    dogs = dogs_catalog.table("dogs")  # case-insensitive lookup
    assert [c.name for c in dogs.columns][:3] == ["dog_id", "owner_id", "name"]


def test_affinities_and_content(dogs_catalog):
    age = dogs_catalog.column("Dogs", "age")
    assert age.affinity is Affinity.NUMBER
    sex = dogs_catalog.column("Dogs", "sex")
    assert sex.affinity is Affinity.TEXT
    assert set(sex.distinct_values) == {"F", "M"}
    date = dogs_catalog.column("Treatments", "date_of_treatment")
    assert date.affinity is Affinity.TIME


def test_most_frequent_with_frequency_ties(tmp_path):
    path = tmp_path / "t.sqlite"
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE t (a INTEGER)")
    conn.executemany("INSERT INTO t VALUES (?)", [(1,), (1,), (2,)])
    conn.commit()
    conn.close()
    catalog = load_from_database(path)
    col = catalog.column("t", "a")
    assert col.affinity is Affinity.NUMBER
    assert col.most_frequent == "1"
    assert col.distinct_values == ("1", "2")


def test_empty_table(tmp_path):
    path = tmp_path / "t.sqlite"
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE t (a INTEGER, b TEXT)")
    conn.commit()
    conn.close()
    catalog = load_from_database(path)
    table = catalog.table("t")
    assert table.row_count == 0
    assert table.column("a").most_frequent is None
    assert table.column("a").distinct_values == ()


def test_zero_user_tables_is_an_error(tmp_path):
    path = tmp_path / "empty.sqlite"
    sqlite3.connect(path).close()
    with pytest.raises(CatalogError):
        load_from_database(path)


def test_unreadable_file_is_an_error(tmp_path):
    with pytest.raises(CatalogError):
        load_from_database(tmp_path / "missing.sqlite")


def test_corrupt_file_is_an_error(tmp_path):
    path = tmp_path / "garbage.sqlite"
    path.write_bytes(b"this is not a database, it never was")
    with pytest.raises(CatalogError):
        load_from_database(path)


def test_distinct_value_cap(tmp_path):
    path = tmp_path / "t.sqlite"
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE t (a INTEGER)")
    conn.executemany("INSERT INTO t VALUES (?)", [(i,) for i in range(50)])
    conn.commit()
    conn.close()
    catalog = load_from_database(path, cap=10)
    assert len(catalog.column("t", "a").distinct_values) == 10


def test_picklist_replaces_distinct_values(db_path):
    catalog = load_from_database(
        db_path("dog_kennels"), picklists={"Dogs.sex": ["F"]}
    )
    assert catalog.column("Dogs", "sex").distinct_values == ("F",)


def test_most_frequent_member_of_distinct_values(catalogs, gold_examples):
    for db_id in {ex["db_id"] for ex in gold_examples}:
        for table in catalogs(db_id).tables:
            for col in table.columns:
                if col.most_frequent is not None:
                    assert col.most_frequent in col.distinct_values


def test_affinity_mapping_total():
    for declared in ("INTEGER", "REAL", "NUMERIC", "DECIMAL(8,2)", "TEXT",
                     "VARCHAR(10)", "DATE", "DATETIME", "YEAR", "", "BOOLEAN", "BLOB"):
        assert affinity_from_declared(declared) in (
            Affinity.NUMBER, Affinity.TEXT, Affinity.TIME
        )
    assert affinity_from_declared("BOOLEAN") is Affinity.TEXT
    assert affinity_from_declared("TIMESTAMP") is Affinity.TIME


# -- Spider format ----------------------------------------------------------


def test_spider_tables_roundtrip(corpus_dir):
    doc = (corpus_dir / "tables.json").read_text(encoding="utf-8")
    catalogs = load_from_spider_tables(doc)
    by_id = {c.db_id: c for c in catalogs}
    assert "concert_singer" in by_id
    concert = by_id["concert_singer"]
    assert {t.name for t in concert.tables} == {
        "stadium", "singer", "concert", "singer_in_concert"
    }
    assert concert.column("singer", "age").affinity is Affinity.NUMBER


def test_spider_roundtrip_against_live_load(corpus_dir, catalogs):
    """Spider-format load agrees with the live-database load modulo content."""
    doc = json.loads((corpus_dir / "tables.json").read_text(encoding="utf-8"))
    for entry in doc:
        live = catalogs(entry["db_id"])
        spider = load_from_spider_tables([entry])[0]
        assert [t.name for t in spider.tables] == [t.name for t in live.tables]
        for st, lt in zip(spider.tables, live.tables):
            assert [c.name for c in st.columns] == [c.name for c in lt.columns]
            assert [c.affinity for c in st.columns] == [c.affinity for c in lt.columns]
        assert set(map(tuple, spider.foreign_keys)) == set(map(tuple, live.foreign_keys))


def test_spider_dangling_foreign_key(corpus_dir):
    doc = json.loads((corpus_dir / "tables.json").read_text(encoding="utf-8"))
    entry = json.loads(json.dumps(doc[0]))
    entry["foreign_keys"] = [[1, 999]]
    with pytest.raises(CatalogError):
        load_from_spider_tables([entry])


def test_spider_zero_tables(corpus_dir):
    doc = json.loads((corpus_dir / "tables.json").read_text(encoding="utf-8"))
    entry = json.loads(json.dumps(doc[0]))
    entry["table_names_original"] = []
    with pytest.raises(CatalogError):
        load_from_spider_tables([entry])


def test_spider_malformed_document():
    with pytest.raises(CatalogError):
        load_from_spider_tables("{not json")
    with pytest.raises(CatalogError):
        load_from_spider_tables([{"db_id": "x"}])


# -- previews and serialization ------------------------------------------------


def test_content_preview(dogs_catalog):
    page = content_preview(dogs_catalog, "Dogs", 5)
    assert page.columns[:2] == ["dog_id", "owner_id"]
    assert len(page.rows) == 5


def test_content_preview_zero_limit(dogs_catalog):
    page = content_preview(dogs_catalog, "Dogs", 0)
    assert page.rows == []
    assert page.columns


def test_content_preview_unknown_table(dogs_catalog):
    with pytest.raises(CatalogError):
        content_preview(dogs_catalog, "NoSuchTable", 5)


def test_catalog_payload_field_names(dogs_catalog):
    payload = dogs_catalog.to_payload()
    assert set(payload) == {"db_id", "tables", "foreign_keys"}
    assert {"name", "row_count", "columns"} <= set(payload["tables"][0])
    assert "affinity" in payload["tables"][0]["columns"][0]


def test_duplicate_identifiers_rejected():
    from nldb.catalog import ColumnDef, SchemaCatalog, TableDef

    with pytest.raises(CatalogError):
        SchemaCatalog(
            db_id="x",
            tables=(
                TableDef("A", (ColumnDef("c", Affinity.TEXT),)),
                TableDef("a", (ColumnDef("c", Affinity.TEXT),)),
            ),
        )
    with pytest.raises(CatalogError):
        SchemaCatalog(
            db_id="x",
            tables=(
                TableDef("A", (ColumnDef("c", Affinity.TEXT), ColumnDef("C", Affinity.TEXT))),
            ),
        )
