"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line. Tolerances are pinned here, not configurable."""

from __future__ import annotations

import json
import math
import random
import time

import pytest

from nldb.astgen import sample_ast
from nldb.beam import (
    BeamConfig,
    beam_search,
    column_label_smoothing_loss,
    load_beam_file,
    random_scorer,
)
from nldb.execution import exec_match, execute
from nldb.explain import explain
from nldb.heuristic import heuristic_scorer
from nldb.parser import parse_sql
from nldb.printer import print_sql
from nldb.scfg import parse_under_scfg
from nldb.transitions import actions_to_ast, ast_to_actions, tokenize
from nldb.values import resolve_values


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_round_trip_gate(gold_examples, catalogs, db_path):
    """Oracle pipeline reproduces gold execution on the whole corpus."""
    assert len(gold_examples) >= 200
    assert len({ex["db_id"] for ex in gold_examples}) >= 10
    start = time.time()
    failures = []
    for i, example in enumerate(gold_examples):
        catalog = catalogs(example["db_id"])
        try:
            ast = parse_sql(example["query"], catalog)
            question = tokenize(example["question"])
            replayed = actions_to_ast(
                ast_to_actions(ast, catalog, question), catalog, question
            )
            resolved, _ = resolve_values(replayed, catalog)
            sql = print_sql(resolved)
            want = execute(example["query"], db_path(example["db_id"]))
            got = execute(sql, db_path(example["db_id"]))
            ordered = ast.order_limit is not None and bool(ast.order_limit.keys)
            if not exec_match(want, got, ordered=ordered):
                failures.append((i, "result mismatch"))
        except Exception as exc:
            failures.append((i, str(exc)))
    elapsed = time.time() - start
    _report(
        "round-trip gate: 100% execution match on bundled corpus",
        not failures and elapsed < 60,
        f"{len(gold_examples) - len(failures)}/{len(gold_examples)} in {elapsed:.1f}s",
    )


def test_deep_grammar_totality(catalogs):
    """1,000 fuzz-generated ASTs all receive explanations, quickly."""
    rng = random.Random(20240810)
    db_ids = ["dog_kennels", "company_hiring", "concert_singer", "world_geo",
              "library_loans", "retail_orders", "school_enroll", "movie_ratings"]
    start = time.time()
    failures = 0
    for i in range(1000):
        catalog = catalogs(db_ids[i % len(db_ids)])
        ast = sample_ast(rng, catalog)
        try:
            resolved, resolutions = resolve_values(ast, catalog)
        except Exception:
            resolved, resolutions = ast, []
        try:
            doc = explain(resolved, resolutions, catalog)
            assert doc.steps
        except Exception:
            failures += 1
    elapsed = time.time() - start
    _report(
        "deep-grammar totality: 1,000 fuzzed ASTs explained",
        failures == 0 and elapsed < 30,
        f"{1000 - failures}/1000 in {elapsed:.1f}s",
    )


def test_shallow_coverage(gold_examples, catalogs):
    shallow = sum(
        1
        for ex in gold_examples
        if parse_under_scfg(parse_sql(ex["query"], catalogs(ex["db_id"])), "shallow")
        is not None
    )
    share = shallow / len(gold_examples)
    _report("shallow coverage >= 0.70 on bundled corpus", share >= 0.70, f"{share:.3f}")


def test_value_resolution_fixtures(catalogs):
    from nldb.sqlast import (
        AggOp, CmpOp, ColumnExpr, ColumnRef, Compare, FromClause, Literal,
        LiteralKind, LiteralRhs, QueryAst, SelExpr, SelectBlock,
    )

    def site(catalog, table, column, op, raw, span=(0, 0), agg=None, left_col=None):
        left_ref = ColumnRef(table, left_col or column)
        return QueryAst(
            body=SelectBlock(
                projections=[SelExpr(expr=ColumnExpr(ColumnRef(table, column)))],
                from_clause=FromClause(tables=[table]),
                where=Compare(
                    op=op,
                    left=SelExpr(expr=ColumnExpr(left_ref), agg=agg),
                    right=LiteralRhs(Literal(raw=raw, kind=LiteralKind.TEXT, span=span)),
                ),
            )
        )

    checks = []
    world = catalogs("world_geo")
    _, res = resolve_values(site(world, "countries", "continent", CmpOp.EQ, "Asian"), world)
    checks.append(("'Asian' -> 'Asia'", res[0].resolved == "Asia"))

    dogs = catalogs("dog_kennels")
    _, res = resolve_values(site(dogs, "Dogs", "sex", CmpOp.EQ, "female"), dogs)
    checks.append(("'female' -> 'F'", res[0].resolved == "F"))

    company = catalogs("company_hiring")
    _, res = resolve_values(site(company, "employee", "age", CmpOp.LT, "30"), company)
    checks.append(("'30' -> 30", res[0].resolved == 30.0 and res[0].display_value() == "30"))

    ast = site(company, "employee", "age", CmpOp.GT, "one")
    ast.body.where.left = SelExpr(
        expr=ColumnExpr(ColumnRef("employee", "*")), agg=AggOp.COUNT
    )
    _, res = resolve_values(ast, company)
    checks.append(("'one' -> 1", res[0].resolved == 1))

    ast = site(company, "hiring", "is_full_time", CmpOp.EQ, "", span=None)
    _, res = resolve_values(ast, company)
    checks.append(("absent span on Yes/No column -> 'Yes'", res[0].resolved == "Yes"))

    ast = site(dogs, "Dogs", "breed_name", CmpOp.EQ, "", span=None)
    _, res = resolve_values(ast, dogs)
    most = dogs.column("Dogs", "breed_name").most_frequent
    checks.append(("absent span -> most frequent value", res[0].resolved == most))

    for name, ok in checks:
        _report(f"value resolution fixture: {name}", ok)


GOLDEN_TABLE1 = (
    "step 1: find the average of product price in the products table\n"
    "step 2: find the different values of the product type code in the products table "
    "whose average of the product price is greater than the results of step 1"
)

GOLDEN_DEEP1 = (
    "Step 1: find the entries in the employee table whose age is less than 30.0.\n"
    "Step 2: among these results, for each city of the employee table, "
    "where the number of records is more than 1, find city of the employee table.\n"
    "---------------\n"
    '"30" in the question is converted to 30.\n'
    '"one" in the question is converted to 1.'
)

GOLDEN_DEEP2 = (
    "Step 1: find combinations of entries in the employee table, the hiring table "
    "and the shop table for which employee id of the employee table is equal to "
    "employee id of the hiring table and shop id of the hiring table is equal to "
    "shop id of the shop table.\n"
    "Step 2: among these results, for each shop id of the shop table, find the "
    "average of age of the employee table and shop id of the shop table."
)


def test_golden_explanations(corpus_dir, capsys):
    from nldb.cli import main

    cases = [
        (
            "products_catalog",
            "SELECT product_type_code FROM products GROUP BY product_type_code "
            "HAVING avg(product_price) > (SELECT avg(product_price) FROM products)",
            None,
            GOLDEN_TABLE1,
        ),
        (
            "company_hiring",
            "SELECT city FROM employee WHERE age < 30 GROUP BY city HAVING count(*) > 1",
            "Find the cities that have more than one employee younger than 30.",
            GOLDEN_DEEP1,
        ),
        (
            "company_hiring",
            "SELECT avg(T1.age), T3.shop_id FROM employee AS T1 "
            "JOIN hiring AS T2 ON T1.employee_id = T2.employee_id "
            "JOIN shop AS T3 ON T2.shop_id = T3.shop_id GROUP BY T3.shop_id",
            None,
            GOLDEN_DEEP2,
        ),
    ]
    for i, (db_id, sql, question, golden) in enumerate(cases):
        argv = ["explain", "--sql", sql,
                "--db", str(corpus_dir / "databases" / f"{db_id}.sqlite")]
        if question:
            argv += ["--question", question]
        code = main(argv)
        out = capsys.readouterr().out.rstrip("\n")
        with capsys.disabled():
            _report(f"golden explanation {i + 1}/3 byte-exact", code == 0 and out == golden)


def test_beam_identity_and_topk(gold_examples, catalogs):
    # exact order match against the reference implementation, 100 seeds
    from test_beam import reference_unweighted_beam, search_grammar, tiny_catalog

    grammar = search_grammar()
    catalog = tiny_catalog()
    question = tokenize("a few words here")
    config = BeamConfig(beam_size=4, alpha=1.0, beta=1.0, max_steps=80)
    mismatches = 0
    for seed in range(100):
        scorer = random_scorer(seed)
        ours = beam_search(question, catalog, scorer, config, grammar=grammar)
        ref = reference_unweighted_beam(question, catalog, scorer, 4, 80, grammar=grammar)
        if [tuple(h.actions) for h in ours] != [a for a, _ in ref]:
            mismatches += 1
    _report("beam identity (alpha=beta=1) vs reference, 100 seeds", mismatches == 0)

    # defaults (alpha=3, beta=0.1, size 5): top-k sets contain the top-1
    violations = 0
    for example in gold_examples:
        db = catalogs(example["db_id"])
        hyps = beam_search(
            tokenize(example["question"]), db, heuristic_scorer(db),
            BeamConfig(beam_size=5, alpha=3.0, beta=0.1),
        )
        keys = [tuple(h.actions) for h in hyps]
        for k in (3, 5):
            if keys[0] not in keys[:k]:
                violations += 1
    _report(
        "weighted beam (defaults) top-k supersets of top-1 on every corpus question",
        violations == 0,
    )


def test_label_smoothing_gate():
    rng = random.Random(11)
    worst_ce = 0.0
    for _ in range(500):
        k = rng.randint(1, 16)
        weights = [rng.random() + 1e-9 for _ in range(k)]
        total = sum(weights)
        logp = [math.log(w / total) for w in weights]
        gold = rng.randrange(k)
        worst_ce = max(worst_ce, abs(column_label_smoothing_loss(logp, gold, 0.0) - (-logp[gold])))
    _report("label smoothing eps=0 equals cross-entropy within 1e-12", worst_ce < 1e-12)

    k = 7
    uniform = [math.log(1 / k)] * k
    delta = abs(column_label_smoothing_loss(uniform, 3, 0.35) - (-math.log(1 / k)))
    _report("label smoothing uniform case equals -log(1/K) within 1e-9", delta < 1e-9)

    worst = 0.0
    for _ in range(1000):
        k = rng.randint(1, 24)
        weights = [rng.random() + 1e-9 for _ in range(k)]
        total = sum(weights)
        p = [w / total for w in weights]
        logp = [math.log(x) for x in p]
        gold = rng.randrange(k)
        eps = rng.random() * 0.99
        oracle = -((1 - eps) * math.log(p[gold]) + (eps / k) * sum(map(math.log, p)))
        worst = max(worst, abs(column_label_smoothing_loss(logp, gold, eps) - oracle))
    _report("label smoothing matches brute-force oracle within 1e-9 (1,000 draws)", worst < 1e-9)


def test_eval_oracle_gate(corpus_dir, catalogs, db_path):
    """cmd_eval equals an independently computed oracle on the hand-built
    20-example beam fixture, and top-k is monotone."""
    eval_gold = json.loads((corpus_dir / "eval" / "gold.json").read_text())
    assert len(eval_gold) == 20

    oracle_correct = {1: 0, 3: 0, 5: 0}
    for index, example in enumerate(eval_gold):
        catalog = catalogs(example["db_id"])
        question = tokenize(example["question"])
        hyps = load_beam_file(
            str(corpus_dir / "eval" / "beams" / f"{index}.jsonl"), catalog, question
        )
        hyps.sort(key=lambda h: -h.weighted_score)
        gold_result = execute(example["query"], db_path(example["db_id"]))
        gold_ast = parse_sql(example["query"], catalog)
        ordered = gold_ast.order_limit is not None and bool(gold_ast.order_limit.keys)
        matches = []
        for hyp in hyps:
            ok = False
            if hyp.valid:
                try:
                    resolved, _ = resolve_values(hyp.ast, catalog)
                    got = execute(print_sql(resolved), db_path(example["db_id"]))
                    ok = exec_match(gold_result, got, ordered=ordered)
                except Exception:
                    ok = False
            matches.append(ok)
        for k in (1, 3, 5):
            if any(matches[:k]):
                oracle_correct[k] += 1

    from nldb.cli import main
    import io
    import contextlib

    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        main([
            "eval",
            "--gold", str(corpus_dir / "eval" / "gold.json"),
            "--pred", str(corpus_dir / "eval" / "beams"),
            "--db-dir", str(corpus_dir / "databases"),
            "--machine",
        ])
    report = json.loads(buffer.getvalue())
    got = {k: report["exec_at"][str(k)] for k in (1, 3, 5)}
    want = {k: oracle_correct[k] / 20 for k in (1, 3, 5)}
    _report("eval matches hand-verified oracle exactly", got == want, f"{got}")
    accs = [got[1], got[3], got[5]]
    _report("eval top-k accuracies are monotone nondecreasing",
            accs == sorted(accs), f"{accs}")
    _report("eval fixture separates the k levels",
            got[1] < got[3] < got[5], f"{accs}")


def test_service_contract_gate(corpus_dir):
    """All endpoint happy/error-path examples pass with no UI built."""
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "tests/test_service.py", "-q", "--no-header"],
        capture_output=True,
        text=True,
    )
    ok = proc.returncode == 0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout else ""
    _report("service contract integration tests", ok, tail)
