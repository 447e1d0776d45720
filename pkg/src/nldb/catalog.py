"""Schema catalogs: loading, validation, and content summaries of databases.

A catalog is the immutable, shareable view of one database that the rest of
the pipeline links against: table/column identity, type affinities, foreign
keys, and per-column value summaries used for fuzzy value search.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

DISTINCT_VALUE_CAP = 10_000


class CatalogError(ValueError):
    """Unreadable source, corrupt database, or inconsistent schema."""


class Affinity(str, Enum):
    NUMBER = "number"
    TEXT = "text"
    TIME = "time"


# Spider column_types fold onto the three affinities; boolean and "others"
# have no class of their own and behave like text.
_SPIDER_AFFINITY = {
    "number": Affinity.NUMBER,
    "time": Affinity.TIME,
    "text": Affinity.TEXT,
    "boolean": Affinity.TEXT,
    "others": Affinity.TEXT,
}

_NUMERIC_DECL = ("INT", "REAL", "NUMERIC", "DECIMAL", "DOUBLE", "FLOAT")
_TIME_DECL = ("DATE", "TIME", "TIMESTAMP", "YEAR")


def affinity_from_declared(declared: str) -> Affinity:
    """Map a declared SQL column type onto one of the three affinities."""
    decl = (declared or "").upper()
    if any(tag in decl for tag in _TIME_DECL):
        return Affinity.TIME
    if any(tag in decl for tag in _NUMERIC_DECL):
        return Affinity.NUMBER
    return Affinity.TEXT


@dataclass(frozen=True)
class ColumnDef:
    name: str
    affinity: Affinity
    # Distinct cell values as text, most frequent first (ties lexicographic),
    # capped so memory stays bounded and fuzzy search stays reproducible.
    distinct_values: tuple[str, ...] = ()
    most_frequent: Optional[str] = None
    is_primary_key: bool = False

    def __post_init__(self) -> None:
        if self.most_frequent is None and self.distinct_values:
            raise CatalogError(f"column {self.name}: has values but no most_frequent")


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    row_count: int = 0

    def column(self, name: str) -> ColumnDef:
        for col in self.columns:
            if col.name.lower() == name.lower():
                return col
        raise KeyError(name)


@dataclass(frozen=True)
class SchemaCatalog:
    """Tables, columns, and foreign keys of one database.

    ``foreign_keys`` entries are ((table, column), (table, column)) pairs,
    child side first. ``source_path`` is set when the catalog was loaded from
    a live database file and enables content previews.
    """

    db_id: str
    tables: tuple[TableDef, ...]
    foreign_keys: tuple[tuple[tuple[str, str], tuple[str, str]], ...] = ()
    source_path: Optional[str] = None

    def __post_init__(self) -> None:
        seen = set()
        for t in self.tables:
            key = t.name.lower()
            if key in seen:
                raise CatalogError(f"{self.db_id}: duplicate table name {t.name!r}")
            seen.add(key)
            cols = set()
            for c in t.columns:
                ckey = c.name.lower()
                if ckey in cols:
                    raise CatalogError(
                        f"{self.db_id}: duplicate column {t.name}.{c.name}"
                    )
                cols.add(ckey)
        for src, dst in self.foreign_keys:
            for table, column in (src, dst):
                try:
                    self.table(table).column(column)
                except KeyError:
                    raise CatalogError(
                        f"{self.db_id}: foreign key endpoint {table}.{column} not found"
                    ) from None

    # -- lookup ---------------------------------------------------------

    def table(self, name: str) -> TableDef:
        for t in self.tables:
            if t.name.lower() == name.lower():
                return t
        raise KeyError(name)

    def has_table(self, name: str) -> bool:
        return any(t.name.lower() == name.lower() for t in self.tables)

    def column(self, table: str, name: str) -> ColumnDef:
        return self.table(table).column(name)

    def flat_columns(self) -> list[tuple[str, str]]:
        """All selectable (table, column) pairs in catalog order.

        Each table contributes a ``*`` pseudo-column ahead of its real
        columns; selecting it carries the table identity, which is what
        makes table inference from selected columns total.
        """
        out: list[tuple[str, str]] = []
        for t in self.tables:
            out.append((t.name, "*"))
            out.extend((t.name, c.name) for c in t.columns)
        return out

    def column_index(self, table: str, column: str) -> int:
        tl, cl = table.lower(), column.lower()
        for i, (t, c) in enumerate(self.flat_columns()):
            if t.lower() == tl and c.lower() == cl:
                return i
        raise KeyError(f"{table}.{column}")

    @property
    def column_count(self) -> int:
        return len(self.flat_columns())

    def fk_edges(self) -> list[tuple[tuple[str, str], tuple[str, str]]]:
        return list(self.foreign_keys)

    # -- serialization ----------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "db_id": self.db_id,
            "tables": [
                {
                    "name": t.name,
                    "row_count": t.row_count,
                    "columns": [
                        {
                            "name": c.name,
                            "affinity": c.affinity.value,
                            "is_primary_key": c.is_primary_key,
                            "most_frequent": c.most_frequent,
                        }
                        for c in t.columns
                    ],
                }
                for t in self.tables
            ],
            "foreign_keys": [
                [f"{src[0]}.{src[1]}", f"{dst[0]}.{dst[1]}"]
                for src, dst in self.foreign_keys
            ],
        }


def _summarize_column(
    conn: sqlite3.Connection,
    table: str,
    column: str,
    cap: int,
    picklist: Optional[Sequence[str]],
) -> tuple[tuple[str, ...], Optional[str]]:
    if picklist is not None:
        values = tuple(str(v) for v in picklist)
        return values, (values[0] if values else None)
    rows = conn.execute(
        f'SELECT CAST("{column}" AS TEXT) AS v, COUNT(*) AS n '
        f'FROM "{table}" WHERE "{column}" IS NOT NULL '
        f"GROUP BY v ORDER BY n DESC, v ASC LIMIT ?",
        (cap,),
    ).fetchall()
    values = tuple(r[0] for r in rows)
    return values, (values[0] if values else None)


def load_from_database(
    path: str | Path,
    cap: int = DISTINCT_VALUE_CAP,
    picklists: Optional[Mapping[str, Sequence[str]]] = None,
) -> SchemaCatalog:
    """Build a catalog from a single-file SQLite database.

    ``picklists`` optionally replaces a column's value summary with an
    explicit allowlist, keyed by ``"table.column"`` (case-insensitive);
    content search is then restricted to those values.
    """
    p = Path(path)
    if not p.is_file():
        raise CatalogError(f"not a readable database file: {p}")
    picks = {k.lower(): v for k, v in (picklists or {}).items()}
    try:
        conn = sqlite3.connect(f"file:{p}?mode=ro", uri=True)
        try:
            names = [
                r[0]
                for r in conn.execute(
                    "SELECT name FROM sqlite_master WHERE type='table' "
                    "AND name NOT LIKE 'sqlite_%' ORDER BY rowid"
                )
            ]
            if not names:
                raise CatalogError(f"{p.name}: no user tables")
            tables = []
            for name in names:
                info = conn.execute(f'PRAGMA table_info("{name}")').fetchall()
                row_count = conn.execute(f'SELECT COUNT(*) FROM "{name}"').fetchone()[0]
                cols = []
                for _, cname, decl, _notnull, _dflt, pk in info:
                    values, top = _summarize_column(
                        conn, name, cname, cap, picks.get(f"{name}.{cname}".lower())
                    )
                    cols.append(
                        ColumnDef(
                            name=cname,
                            affinity=affinity_from_declared(decl),
                            distinct_values=values,
                            most_frequent=top,
                            is_primary_key=bool(pk),
                        )
                    )
                tables.append(TableDef(name=name, columns=tuple(cols), row_count=row_count))
            fks = []
            for name in names:
                for row in conn.execute(f'PRAGMA foreign_key_list("{name}")'):
                    # (id, seq, ref_table, from_col, to_col, ...)
                    ref_table, from_col, to_col = row[2], row[3], row[4]
                    if to_col is None:
                        continue
                    fks.append(((name, from_col), (ref_table, to_col)))
        finally:
            conn.close()
    except sqlite3.DatabaseError as exc:
        raise CatalogError(f"{p.name}: not a valid database ({exc})") from exc
    return SchemaCatalog(
        db_id=p.stem,
        tables=tuple(tables),
        foreign_keys=tuple(fks),
        source_path=str(p),
    )


def load_from_spider_tables(doc: str | list) -> list[SchemaCatalog]:
    """Parse a Spider-format ``tables`` description into catalogs.

    Accepts the parsed JSON value or the raw JSON text. One catalog is
    produced per db_id; no content summaries are available in this format.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"malformed tables document: {exc}") from exc
    if not isinstance(doc, list):
        raise CatalogError("tables document must be a list of database entries")

    catalogs = []
    for entry in doc:
        try:
            db_id = entry["db_id"]
            table_names = entry["table_names_original"]
            column_names = entry["column_names_original"]
            column_types = entry["column_types"]
            foreign_keys = entry.get("foreign_keys", [])
            primary_keys = set(entry.get("primary_keys", []))
        except (TypeError, KeyError) as exc:
            raise CatalogError(f"malformed tables entry: missing {exc}") from exc
        if not table_names:
            raise CatalogError(f"{db_id}: entry has zero tables")
        if len(column_names) != len(column_types):
            raise CatalogError(f"{db_id}: column name/type length mismatch")

        per_table: list[list[ColumnDef]] = [[] for _ in table_names]
        owners: list[Optional[int]] = []
        for idx, ((t_idx, c_name), c_type) in enumerate(zip(column_names, column_types)):
            owners.append(None if t_idx < 0 else t_idx)
            if t_idx < 0:  # the global "*" row carries no table
                continue
            if not 0 <= t_idx < len(table_names):
                raise CatalogError(f"{db_id}: column {c_name!r} has bad table index {t_idx}")
            aff = _SPIDER_AFFINITY.get(c_type)
            if aff is None:
                raise CatalogError(f"{db_id}: unknown column type {c_type!r}")
            per_table[t_idx].append(
                ColumnDef(name=c_name, affinity=aff, is_primary_key=idx in primary_keys)
            )

        fks = []
        flat = [(owners[i], column_names[i][1]) for i in range(len(column_names))]
        for pair in foreign_keys:
            try:
                a, b = pair
            except (TypeError, ValueError):
                raise CatalogError(f"{db_id}: malformed foreign key {pair!r}") from None
            for end in (a, b):
                if not 0 <= end < len(flat) or flat[end][0] is None:
                    raise CatalogError(f"{db_id}: foreign key column index {end} out of range")
            fks.append(
                (
                    (table_names[flat[a][0]], flat[a][1]),
                    (table_names[flat[b][0]], flat[b][1]),
                )
            )

        catalogs.append(
            SchemaCatalog(
                db_id=db_id,
                tables=tuple(
                    TableDef(name=n, columns=tuple(cols))
                    for n, cols in zip(table_names, per_table)
                ),
                foreign_keys=tuple(fks),
            )
        )
    return catalogs


@dataclass
class RowPage:
    table: str
    columns: list[str]
    rows: list[tuple]

    def to_payload(self) -> dict:
        return {"table": self.table, "columns": self.columns, "rows": [list(r) for r in self.rows]}


def content_preview(catalog: SchemaCatalog, table: str, limit: int) -> RowPage:
    """First ``limit`` stored rows of a table, with headers.

    Catalogs without a backing database file (e.g. Spider descriptions)
    yield headers and no rows.
    """
    tdef = None
    try:
        tdef = catalog.table(table)
    except KeyError:
        raise CatalogError(f"unknown table: {table}") from None
    headers = [c.name for c in tdef.columns]
    if limit <= 0 or catalog.source_path is None:
        return RowPage(table=tdef.name, columns=headers, rows=[])
    conn = sqlite3.connect(f"file:{catalog.source_path}?mode=ro", uri=True)
    try:
        rows = conn.execute(f'SELECT * FROM "{tdef.name}" LIMIT ?', (limit,)).fetchall()
    finally:
        conn.close()
    return RowPage(table=tdef.name, columns=headers, rows=rows)
