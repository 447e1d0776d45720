from __future__ import annotations

import copy

import pytest

from nldb.parser import parse_sql
from nldb.printer import print_sql
from nldb.sqlast import (
    CmpOp,
    ColumnExpr,
    ColumnRef,
    Compare,
    FromClause,
    Literal,
    LiteralKind,
    LiteralRhs,
    QueryAst,
    SelExpr,
    SelectBlock,
)
from nldb.transitions import actions_to_ast, ast_to_actions, tokenize
from nldb.values import (
    ResolutionMethod,
    TermMapEntry,
    ValueResolutionError,
    fuzzy_match,
    load_term_map,
    resolve_values,
    similarity,
    words_to_number,
)


# -- fuzzy matching --------------------------------------------------------------


def test_fuzzy_asian_to_asia():
    hit = fuzzy_match("Asian", ["Asia", "Africa", "Europe"])
    assert hit is not None
    best, score = hit
    assert best == "Asia"
    assert score >= 0.8


def test_fuzzy_initialism_female_to_f():
    hit = fuzzy_match("female", ["F", "M"])
    assert hit == ("F", 0.9)


def test_fuzzy_below_threshold_absent():
    assert fuzzy_match("xyzzy", ["Asia"]) is None


def test_fuzzy_tie_prefers_earlier_candidate():
    # catalogs order values most frequent first; first wins on ties
    hit = fuzzy_match("gray", ["grey", "gras"])
    assert hit[0] == "grey"
    assert fuzzy_match("gray", ["gras", "grey"])[0] == "gras"


def test_similarity_is_case_and_punctuation_insensitive():
    assert similarity("R. Osei", "r osei") == 1.0
    assert similarity("  lake   tia ", "Lake Tia") == 1.0


def test_number_words_bounded_list():
    assert words_to_number("one") == 1
    assert words_to_number("twenty") == 20
    assert words_to_number("thirty") == 30
    assert words_to_number("hundred") == 100
    assert words_to_number("third") == 3
    assert words_to_number("twentieth") == 20
    assert words_to_number("gazillion") is None


# -- resolution decision table ------------------------------------------------------


def _where_ast(catalog, table, column, op, raw, span=(0, 0), agg=None):
    coldef = catalog.column(table, column)
    literal = Literal(raw=raw, kind=LiteralKind.TEXT, span=span)
    return QueryAst(
        body=SelectBlock(
            projections=[SelExpr(expr=ColumnExpr(ColumnRef(table, column)))],
            from_clause=FromClause(tables=[table]),
            where=Compare(
                op=op,
                left=SelExpr(expr=ColumnExpr(ColumnRef(table, column)), agg=agg),
                right=LiteralRhs(literal),
            ),
        )
    )


def test_resolve_asian_against_continent(catalogs):
    world = catalogs("world_geo")
    ast = _where_ast(world, "countries", "continent", CmpOp.EQ, "Asian")
    resolved, res = resolve_values(ast, world)
    assert res[0].resolved == "Asia"
    assert res[0].method is ResolutionMethod.CONTENT_FUZZY
    assert resolved.body.where.right.literal.raw == "Asia"


def test_resolve_numeric_span_to_float(catalogs):
    company = catalogs("company_hiring")
    ast = _where_ast(company, "employee", "age", CmpOp.LT, "30")
    resolved, res = resolve_values(ast, company)
    assert res[0].resolved == 30.0
    assert isinstance(res[0].resolved, float)
    assert resolved.body.where.right.literal.raw == "30.0"
    assert res[0].display_value() == "30"


def test_resolve_number_word_in_count_context(catalogs):
    company = catalogs("company_hiring")
    ast = _where_ast(company, "employee", "age", CmpOp.GT, "one")
    # count(*) context: integer, not float
    from nldb.sqlast import AggOp

    ast.body.where.left = SelExpr(
        expr=ColumnExpr(ColumnRef("employee", "*")), agg=AggOp.COUNT
    )
    resolved, res = resolve_values(ast, company)
    assert res[0].resolved == 1
    assert isinstance(res[0].resolved, int)
    assert res[0].method is ResolutionMethod.NUMBER_WORD


def test_resolve_default_yes_no(catalogs):
    company = catalogs("company_hiring")
    ast = _where_ast(company, "hiring", "is_full_time", CmpOp.EQ, "")
    ast.body.where.right.literal.span = None
    resolved, res = resolve_values(ast, company)
    assert res[0].resolved == "Yes"
    assert res[0].method is ResolutionMethod.DEFAULT_YES
    assert res[0].copied_span is None


def test_resolve_default_most_frequent(catalogs):
    dogs = catalogs("dog_kennels")
    ast = _where_ast(dogs, "Dogs", "breed_name", CmpOp.EQ, "")
    resolved, res = resolve_values(ast, dogs)
    assert res[0].method is ResolutionMethod.DEFAULT_MOST_FREQUENT
    assert res[0].resolved == dogs.column("Dogs", "breed_name").most_frequent


def test_resolve_female_to_stored_code(catalogs):
    dogs = catalogs("dog_kennels")
    ast = _where_ast(dogs, "Dogs", "sex", CmpOp.EQ, "female")
    resolved, res = resolve_values(ast, dogs)
    assert res[0].resolved == "F"
    assert res[0].method is ResolutionMethod.CONTENT_FUZZY


def test_resolve_verbatim_restores_stored_casing(catalogs):
    world = catalogs("world_geo")
    ast = _where_ast(world, "countries", "continent", CmpOp.EQ, "asia")
    resolved, res = resolve_values(ast, world)
    assert res[0].resolved == "Asia"
    assert res[0].method is ResolutionMethod.VERBATIM


def test_resolve_like_wraps_pattern(catalogs):
    library = catalogs("library_loans")
    ast = _where_ast(library, "books", "title", CmpOp.LIKE, "Data")
    resolved, res = resolve_values(ast, library)
    assert res[0].resolved == "%Data%"
    assert res[0].method is ResolutionMethod.LIKE_PATTERN
    ast2 = _where_ast(library, "books", "title", CmpOp.LIKE, "%already%")
    _, res2 = resolve_values(ast2, library)
    assert res2[0].resolved == "%already%"


def test_resolve_time_normalization(catalogs):
    library = catalogs("library_loans")
    ast = _where_ast(library, "loans", "due_date", CmpOp.EQ, "2021/06/15")
    resolved, res = resolve_values(ast, library)
    assert res[0].resolved == "2021-06-15"
    assert res[0].method is ResolutionMethod.TIME


def test_resolve_year_column_stays_numeric(catalogs):
    library = catalogs("library_loans")
    ast = _where_ast(library, "books", "publication_year", CmpOp.GT, "2010")
    resolved, res = resolve_values(ast, library)
    assert res[0].resolved == 2010
    assert resolved.body.where.right.literal.kind is LiteralKind.NUMBER


def test_resolve_empty_column_without_span_errors():
    from nldb.catalog import Affinity, ColumnDef, SchemaCatalog, TableDef

    catalog = SchemaCatalog(
        db_id="x",
        tables=(TableDef("t", (ColumnDef("c", Affinity.TEXT),)),),
    )
    ast = _where_ast(catalog, "t", "c", CmpOp.EQ, "")
    with pytest.raises(ValueResolutionError):
        resolve_values(ast, catalog)


def test_resolve_unparseable_numeric_span_errors(catalogs):
    company = catalogs("company_hiring")
    ast = _where_ast(company, "employee", "age", CmpOp.GT, "plenty")
    with pytest.raises(ValueResolutionError):
        resolve_values(ast, company)


def test_between_resolves_two_numbers(catalogs):
    company = catalogs("company_hiring")
    ast = parse_sql("SELECT name FROM employee WHERE age BETWEEN 25 AND 32", company)
    resolved, res = resolve_values(ast, company)
    assert [r.resolved for r in res] == [25.0, 32.0]
    assert {r.literal_site for r in res} == {"literal[0]", "literal[1]"}


# -- invariants ------------------------------------------------------------------


def test_resolution_is_deterministic(catalogs):
    world = catalogs("world_geo")
    ast = _where_ast(world, "countries", "continent", CmpOp.EQ, "Asian")
    first = resolve_values(ast, world)
    second = resolve_values(ast, world)
    assert print_sql(first[0]) == print_sql(second[0])
    assert first[1] == second[1]


def test_resolution_preserves_tree_shape(gold_examples, catalogs):
    from nldb.sqlast import ast_equal

    for example in gold_examples[::9]:
        catalog = catalogs(example["db_id"])
        question = tokenize(example["question"])
        ast = parse_sql(example["query"], catalog)
        replayed = actions_to_ast(
            ast_to_actions(ast, catalog, question), catalog, question
        )
        resolved, _ = resolve_values(replayed, catalog)
        assert ast_equal(replayed, resolved, ignore_literals=True)


def test_input_ast_not_mutated(catalogs):
    world = catalogs("world_geo")
    ast = _where_ast(world, "countries", "continent", CmpOp.EQ, "Asian")
    snapshot = copy.deepcopy(ast)
    resolve_values(ast, world)
    assert ast == snapshot


def test_changed_resolutions_produce_notes(catalogs):
    from nldb.explain import build_value_notes

    world = catalogs("world_geo")
    ast = _where_ast(world, "countries", "continent", CmpOp.EQ, "Asian")
    _, res = resolve_values(ast, world)
    notes = build_value_notes(res)
    assert notes == [
        '"Asian" in the question is matched to "Asia" which appears in the column continent.'
    ]


# -- term maps --------------------------------------------------------------------


def test_term_map_overrides_fuzzy(catalogs, tmp_path):
    dogs = catalogs("dog_kennels")
    entries = [TermMapEntry(ColumnRef("Dogs", "sex"), "girls", "F")]
    ast = _where_ast(dogs, "Dogs", "sex", CmpOp.EQ, "girls")
    resolved, res = resolve_values(ast, dogs, term_map=entries)
    assert res[0].resolved == "F"
    assert res[0].via_term_map
    assert res[0].method is ResolutionMethod.CONTENT_FUZZY


def test_term_map_does_not_beat_verbatim(catalogs):
    dogs = catalogs("dog_kennels")
    entries = [TermMapEntry(ColumnRef("Dogs", "sex"), "f", "M")]
    ast = _where_ast(dogs, "Dogs", "sex", CmpOp.EQ, "f")
    _, res = resolve_values(ast, dogs, term_map=entries)
    assert res[0].resolved == "F"
    assert res[0].method is ResolutionMethod.VERBATIM


def test_empty_term_map_is_a_no_op(catalogs):
    dogs = catalogs("dog_kennels")
    ast = _where_ast(dogs, "Dogs", "sex", CmpOp.EQ, "female")
    with_map = resolve_values(ast, dogs, term_map=[])
    without = resolve_values(ast, dogs)
    assert with_map[1] == without[1]


def test_term_map_unknown_column_errors(catalogs):
    dogs = catalogs("dog_kennels")
    entries = [TermMapEntry(ColumnRef("Dogs", "nope"), "x", "y")]
    ast = _where_ast(dogs, "Dogs", "sex", CmpOp.EQ, "female")
    with pytest.raises(ValueResolutionError):
        resolve_values(ast, dogs, term_map=entries)


def test_term_map_file_format(tmp_path, corpus_dir):
    entries = load_term_map(str(corpus_dir / "term_maps" / "dog_kennels.tsv"))
    assert TermMapEntry(ColumnRef("Dogs", "sex"), "female", "F") in entries
    bad = tmp_path / "bad.tsv"
    bad.write_text("only-two\tfields\n", encoding="utf-8")
    with pytest.raises(ValueResolutionError):
        load_term_map(str(bad))
