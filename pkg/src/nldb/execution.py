"""Read-only SQL execution and result-set comparison.

Execution rejects anything but a single SELECT before touching the engine,
opens the database read-only, enforces a row cap and a wall-clock timeout,
and never mutates the file. Result comparison is what execution-match
evaluation is built on: row multisets with numeric tolerance, optionally
order-sensitive for queries whose meaning includes ordering.
"""

from __future__ import annotations

import math
import re
import sqlite3
import time
from dataclasses import dataclass
from typing import Optional

DEFAULT_ROW_CAP = 10_000
DEFAULT_TIMEOUT = 5.0
NUMERIC_TOLERANCE = 1e-6


class ExecutionError(RuntimeError):
    pass


class ReadOnlyViolation(ExecutionError):
    pass


class ExecutionTimeout(ExecutionError):
    pass


@dataclass
class ExecutionResult:
    columns: list[str]
    rows: list[tuple]
    truncated: bool = False
    elapsed: float = 0.0

    def to_payload(self) -> dict:
        return {
            "columns": self.columns,
            "rows": [list(r) for r in self.rows],
            "truncated": self.truncated,
            "elapsed": self.elapsed,
        }


_COMMENT_RE = re.compile(r"--[^\n]*|/\*.*?\*/", re.DOTALL)


def _first_keyword(sql: str) -> str:
    text = _COMMENT_RE.sub(" ", sql).strip()
    m = re.match(r"[A-Za-z]+", text)
    return m.group().upper() if m else ""


def open_readonly(path: str) -> sqlite3.Connection:
    return sqlite3.connect(f"file:{path}?mode=ro", uri=True)


def execute(
    sql: str,
    db: sqlite3.Connection | str,
    row_cap: int = DEFAULT_ROW_CAP,
    timeout: float = DEFAULT_TIMEOUT,
) -> ExecutionResult:
    """Run one SELECT and return up to ``row_cap`` rows.

    ``db`` is an open read-only connection or a database path. Write
    statements are rejected before execution; long queries are interrupted
    after ``timeout`` seconds.
    """
    if _first_keyword(sql) != "SELECT":
        raise ReadOnlyViolation(f"only SELECT statements are executed, got {sql[:40]!r}")
    own = isinstance(db, str)
    conn = open_readonly(db) if own else db
    deadline = time.monotonic() + timeout
    conn.set_progress_handler(lambda: 1 if time.monotonic() > deadline else 0, 10_000)
    start = time.monotonic()
    try:
        cursor = conn.execute(sql)
        rows = cursor.fetchmany(row_cap + 1)
        columns = [d[0] for d in cursor.description] if cursor.description else []
    except sqlite3.OperationalError as exc:
        if "interrupt" in str(exc).lower():
            raise ExecutionTimeout(f"query exceeded {timeout:.1f}s") from exc
        raise ExecutionError(str(exc)) from exc
    except sqlite3.DatabaseError as exc:
        raise ExecutionError(str(exc)) from exc
    finally:
        conn.set_progress_handler(None, 0)
        if own:
            conn.close()
    truncated = len(rows) > row_cap
    return ExecutionResult(
        columns=columns,
        rows=[tuple(r) for r in rows[:row_cap]],
        truncated=truncated,
        elapsed=time.monotonic() - start,
    )


# -- result comparison ---------------------------------------------------------


def _cell_key(value) -> tuple:
    if value is None:
        return (0, "")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (1, round(float(value), 6))
    return (2, str(value))


def _cells_equal(a, b, tolerance: float = NUMERIC_TOLERANCE) -> bool:
    if a is None or b is None:
        return a is None and b is None
    a_num = isinstance(a, (int, float)) and not isinstance(a, bool)
    b_num = isinstance(b, (int, float)) and not isinstance(b, bool)
    if a_num and b_num:
        return math.isclose(float(a), float(b), rel_tol=0, abs_tol=tolerance)
    if a_num != b_num:
        return False
    return a == b


def _align_columns(a: ExecutionResult, b: ExecutionResult) -> Optional[list[int]]:
    """Column permutation of ``b`` lining it up with ``a``: greedy by header
    name (case-insensitive), remaining columns by position."""
    if len(a.columns) != len(b.columns):
        return None
    remaining = list(range(len(b.columns)))
    mapping: list[Optional[int]] = [None] * len(a.columns)
    for i, name in enumerate(a.columns):
        for j in remaining:
            if b.columns[j].lower() == name.lower():
                mapping[i] = j
                remaining.remove(j)
                break
    for i in range(len(mapping)):
        if mapping[i] is None:
            mapping[i] = remaining.pop(0)
    return [m for m in mapping if m is not None]


def _rows_equal(
    a_rows: list[tuple], b_rows: list[tuple], tolerance: float = NUMERIC_TOLERANCE
) -> bool:
    if len(a_rows) != len(b_rows):
        return False
    return all(
        len(ra) == len(rb) and all(_cells_equal(x, y, tolerance) for x, y in zip(ra, rb))
        for ra, rb in zip(a_rows, b_rows)
    )


def exec_match(
    a: ExecutionResult,
    b: ExecutionResult,
    ordered: bool = False,
    align_columns: bool = True,
    strict: bool = False,
) -> bool:
    """True iff the two result sets agree as row multisets (sequences when
    ``ordered``). Numeric cells compare within 1e-6; text cells exactly.
    ``strict`` disables the numeric tolerance and the header-based column
    alignment, for cross-checking against stricter evaluators."""
    if len(a.rows) != len(b.rows):
        return False
    b_rows = b.rows
    if align_columns and not strict:
        mapping = _align_columns(a, b)
        if mapping is None:
            return False
        b_rows = [tuple(row[j] for j in mapping) for row in b.rows]
    elif a.rows and b.rows and len(a.rows[0]) != len(b.rows[0]):
        return False
    tolerance = 0.0 if strict else NUMERIC_TOLERANCE
    if ordered:
        return _rows_equal(a.rows, b_rows, tolerance)
    a_sorted = sorted(a.rows, key=lambda r: tuple(_cell_key(c) for c in r))
    b_sorted = sorted(b_rows, key=lambda r: tuple(_cell_key(c) for c in r))
    return _rows_equal(a_sorted, b_sorted, tolerance)
