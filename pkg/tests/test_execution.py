from __future__ import annotations

import hashlib

import pytest

from nldb.execution import (
    ExecutionError,
    ExecutionResult,
    ExecutionTimeout,
    ReadOnlyViolation,
    exec_match,
    execute,
)


def test_count_query(db_path):
    result = execute("SELECT count(*) FROM Dogs", db_path("dog_kennels"))
    assert result.columns == ["count(*)"]
    assert result.rows == [(6,)]
    assert not result.truncated


def test_write_statements_rejected(db_path):
    for sql in ("DROP TABLE Dogs", "DELETE FROM Dogs", "INSERT INTO Dogs VALUES (1)",
                "UPDATE Dogs SET age = 1", "PRAGMA user_version = 3"):
        with pytest.raises(ReadOnlyViolation):
            execute(sql, db_path("dog_kennels"))


def test_flagship_subquery_answer(db_path):
    result = execute(TABLE1 := (
        "SELECT product_type_code FROM products GROUP BY product_type_code "
        "HAVING avg(product_price) > (SELECT avg(product_price) FROM products)"
    ), db_path("products_catalog"))
    assert result.rows == [("Clothes",)]


def test_sql_error_passthrough(db_path):
    with pytest.raises(ExecutionError) as err:
        execute("SELECT nonexistent FROM Dogs", db_path("dog_kennels"))
    assert "nonexistent" in str(err.value)


def test_row_cap_and_truncation(db_path):
    result = execute("SELECT * FROM Dogs", db_path("dog_kennels"), row_cap=3)
    assert len(result.rows) == 3
    assert result.truncated


def test_timeout_interrupts(db_path):
    heavy = ("SELECT count(*) FROM Dogs a, Dogs b, Dogs c, Dogs d, Dogs e, "
             "Dogs f, Dogs g, Dogs h")
    with pytest.raises(ExecutionTimeout):
        execute(heavy, db_path("dog_kennels"), timeout=0.005)


def test_execute_never_mutates(db_path, corpus_dir):
    path = db_path("dog_kennels")
    before = hashlib.sha256(open(path, "rb").read()).hexdigest()
    execute("SELECT * FROM Treatments", path)
    with pytest.raises(ReadOnlyViolation):
        execute("DELETE FROM Treatments", path)
    after = hashlib.sha256(open(path, "rb").read()).hexdigest()
    assert before == after


# -- result comparison -----------------------------------------------------------


def _res(rows, columns=None):
    columns = columns or [f"c{i}" for i in range(len(rows[0]) if rows else 0)]
    return ExecutionResult(columns=columns, rows=[tuple(r) for r in rows])


def test_unordered_match_ignores_row_order():
    a = _res([(1, "x"), (2, "y")])
    b = _res([(2, "y"), (1, "x")])
    assert exec_match(a, b, ordered=False)
    assert not exec_match(a, b, ordered=True)


def test_ordered_match_respects_sequence():
    a = _res([(1,), (2,)])
    assert exec_match(a, _res([(1,), (2,)]), ordered=True)
    assert not exec_match(a, _res([(2,), (1,)]), ordered=True)


def test_numeric_tolerance():
    assert exec_match(_res([(3.0,)]), _res([(3.0000000001,)]))
    assert not exec_match(_res([(3.0,)]), _res([(3.1,)]))
    assert exec_match(_res([(3,)]), _res([(3.0,)]))


def test_text_cells_exact():
    assert not exec_match(_res([("a",)]), _res([("A",)]))
    assert not exec_match(_res([("3",)]), _res([(3,)]))


def test_column_alignment_by_header():
    a = ExecutionResult(columns=["name", "age"], rows=[("Rex", 5)])
    b = ExecutionResult(columns=["age", "name"], rows=[(5, "Rex")])
    assert exec_match(a, b)
    assert not exec_match(a, b, align_columns=False)


def test_match_reflexive_symmetric():
    rows = [(1, "a"), (2, "b"), (2, "b")]
    a, b = _res(rows), _res(list(reversed(rows)))
    assert exec_match(a, a)
    assert exec_match(a, b) == exec_match(b, a)


def test_ordered_match_implies_unordered():
    import random

    rng = random.Random(3)
    for _ in range(50):
        rows = [(rng.randint(0, 3), rng.choice("ab")) for _ in range(5)]
        other = list(rows)
        rng.shuffle(other)
        a, b = _res(rows), _res(other)
        if exec_match(a, b, ordered=True):
            assert exec_match(a, b, ordered=False)


def test_row_count_mismatch():
    assert not exec_match(_res([(1,)]), _res([(1,), (1,)]))


def test_none_cells():
    assert exec_match(_res([(None,)]), _res([(None,)]))
    assert not exec_match(_res([(None,)]), _res([(0,)]))


def test_strict_mode_disables_tolerance():
    assert not exec_match(_res([(3.0,)]), _res([(3.0000000001,)]), strict=True)
    assert exec_match(_res([(3.0,)]), _res([(3.0,)]), strict=True)
    a = ExecutionResult(columns=["name", "age"], rows=[("Rex", 5)])
    b = ExecutionResult(columns=["age", "name"], rows=[(5, "Rex")])
    assert not exec_match(a, b, strict=True)
