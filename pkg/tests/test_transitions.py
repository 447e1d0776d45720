from __future__ import annotations

import random

import pytest

from nldb.astgen import sample_ast
from nldb.catalog import load_from_database
from nldb.grammar import (
    ActionKind,
    IllegalActionError,
    advance,
    default_grammar,
    initial_state,
    legal_actions,
)
from nldb.parser import parse_sql
from nldb.printer import print_sql
from nldb.sqlast import ast_equal
from nldb.transitions import (
    ActionSequenceError,
    GrammarCoverageError,
    actions_to_ast,
    ast_to_actions,
    format_actions,
    parse_actions,
    tag_value_span,
    tokenize,
)
from nldb.values import resolve_values


def test_grammar_file_loads_dense():
    grammar = default_grammar()
    assert len(grammar) == 45
    assert sorted(grammar.rules) == list(range(45))


def test_tokenizer_spans_cover_nonwhitespace():
    q = tokenize('Which 3.5 GPA students are "best", exactly?')
    text = q.raw
    covered = []
    last_end = 0
    for tok in q.tokens:
        assert tok.start >= last_end
        assert text[tok.start : tok.end] == tok.surface
        covered.append((tok.start, tok.end))
        last_end = tok.end
    outside = "".join(
        ch for i, ch in enumerate(text) if not any(s <= i < e for s, e in covered)
    )
    assert outside.strip() == ""
    assert "3.5" in [t.surface for t in q.tokens]


COUNT_STAR_ACTIONS = [
    # hand-enumerated unique derivation of SELECT count(*) FROM singer:
    # query > block > no-distinct > aggregate projection > COUNT >
    # no DISTINCT inside > column expr > the singer star column > close
    # projections > no where > no group > no having > no set op > no order
    "AR:0", "AR:9", "RD", "AR:12", "AR:15", "RD", "AR:20", "SC:singer.*",
    "RD", "RD", "RD", "RD", "RD", "RD",
]


def test_count_star_linearization(catalogs):
    concert = catalogs("concert_singer")
    ast = parse_sql("SELECT count(*) FROM singer", concert)
    question = tokenize("How many singers are there?")
    actions = ast_to_actions(ast, concert, question)
    assert format_actions(actions, concert) == COUNT_STAR_ACTIONS
    kinds = {a.kind for a in actions}
    assert ActionKind.SELECT_COLUMN in kinds
    # no table-selecting action exists in the grammar at all
    assert all(
        a.kind in (ActionKind.APPLY_RULE, ActionKind.REDUCE,
                   ActionKind.SELECT_COLUMN, ActionKind.COPY_TOKEN,
                   ActionKind.COPY_STOP)
        for a in actions
    )


def test_copy_tokens_point_at_evidence(catalogs):
    company = catalogs("company_hiring")
    sql = "SELECT city FROM employee WHERE age < 30 GROUP BY city HAVING count(*) > 1"
    question = tokenize("Find the cities that have more than one employee younger than 30.")
    ast = parse_sql(sql, company)
    actions = ast_to_actions(ast, company, question)
    copied = [a.arg for a in actions if a.kind is ActionKind.COPY_TOKEN]
    surfaces = [question.tokens[i].surface for i in copied]
    assert surfaces == ["30", "one"]


def test_absent_value_copies_nothing(catalogs):
    library = catalogs("library_loans")
    sql = "SELECT count(*) FROM members WHERE is_active = 'Yes'"
    question = tokenize("How many members are active?")
    ast = parse_sql(sql, library)
    actions = ast_to_actions(ast, library, question)
    assert not any(a.kind is ActionKind.COPY_TOKEN for a in actions)
    assert sum(1 for a in actions if a.kind is ActionKind.COPY_STOP) == 1


def test_roundtrip_all_corpus(gold_examples, catalogs):
    for example in gold_examples:
        catalog = catalogs(example["db_id"])
        ast = parse_sql(example["query"], catalog)
        question = tokenize(example["question"])
        actions = ast_to_actions(ast, catalog, question)
        back = actions_to_ast(actions, catalog, question)
        assert ast_equal(ast, back, ignore_literals=True), example["query"]


def test_join_reconstruction_from_columns(dogs_catalog):
    sql = ("SELECT avg(T1.age) FROM Dogs AS T1 JOIN Treatments AS T2 "
           "ON T1.dog_id = T2.dog_id WHERE T2.cost_of_treatment > 100")
    question = tokenize("Average age of dogs with a treatment over 100 dollars?")
    ast = parse_sql(sql, dogs_catalog)
    back = actions_to_ast(
        ast_to_actions(ast, dogs_catalog, question), dogs_catalog, question
    )
    assert back.body.from_clause.tables == ["Dogs", "Treatments"]
    assert len(back.body.from_clause.joins) == 1


def test_truncated_sequence_reports_step(dogs_catalog):
    question = tokenize("How many dogs are there?")
    ast = parse_sql("SELECT count(*) FROM Dogs", dogs_catalog)
    actions = ast_to_actions(ast, dogs_catalog, question)
    with pytest.raises(ActionSequenceError) as err:
        actions_to_ast(actions[:-3], dogs_catalog, question)
    assert err.value.step >= 0


def test_illegal_action_reports_expected_kinds(dogs_catalog):
    question = tokenize("How many dogs are there?")
    grammar = default_grammar()
    state = initial_state(grammar)
    from nldb.grammar import select_column

    with pytest.raises(IllegalActionError) as err:
        advance(state, select_column(0), grammar, dogs_catalog.column_count, len(question.tokens), step=0)
    assert "step 0" in str(err.value)
    assert "ApplyRule" in str(err.value)


def test_automaton_completeness_on_corpus_prefixes(gold_examples, catalogs):
    grammar = default_grammar()
    for example in gold_examples[::7]:
        catalog = catalogs(example["db_id"])
        question = tokenize(example["question"])
        ast = parse_sql(example["query"], catalog)
        actions = ast_to_actions(ast, catalog, question)
        state = initial_state(grammar)
        n_cols, n_toks = catalog.column_count, len(question.tokens)
        for step, action in enumerate(actions):
            legal = legal_actions(state, grammar, n_cols, n_toks)
            assert legal, f"dead end at step {step}"
            assert action in legal
            state = advance(state, action, grammar, n_cols, n_toks)
        assert state.finished
        assert legal_actions(state, grammar, n_cols, n_toks) == []


def test_fuzzed_roundtrip_and_automaton_agreement(catalogs):
    grammar = default_grammar()
    rng = random.Random(77)
    question = tokenize("some placeholder words with a value 7 and Asia")
    for i in range(300):
        catalog = catalogs(["dog_kennels", "world_geo", "school_enroll"][i % 3])
        ast = sample_ast(rng, catalog)
        actions = ast_to_actions(ast, catalog, question)
        state = initial_state(grammar)
        for step, action in enumerate(actions):
            state = advance(state, action, grammar, catalog.column_count,
                            len(question.tokens), step=step)
        assert state.finished
        back = actions_to_ast(actions, catalog, question)
        assert ast_equal(ast, back, ignore_literals=True)


def test_copy_run_must_be_contiguous(dogs_catalog):
    question = tokenize("dogs older than 3 years")
    sql = "SELECT name FROM Dogs WHERE age > 3"
    ast = parse_sql(sql, dogs_catalog)
    actions = ast_to_actions(ast, dogs_catalog, question)
    serialized = format_actions(actions, dogs_catalog)
    idx = serialized.index("CT:3")
    serialized[idx] = "CT:0"
    serialized.insert(idx + 1, "CT:2")
    broken = parse_actions(serialized, dogs_catalog)
    with pytest.raises(ActionSequenceError):
        actions_to_ast(broken, dogs_catalog, question)


def test_serialization_roundtrip(gold_examples, catalogs):
    for example in gold_examples[::11]:
        catalog = catalogs(example["db_id"])
        question = tokenize(example["question"])
        ast = parse_sql(example["query"], catalog)
        actions = ast_to_actions(ast, catalog, question)
        tokens = format_actions(actions, catalog)
        assert parse_actions(tokens, catalog) == actions


def test_gold_values_override(dogs_catalog):
    question = tokenize("female dogs")
    ast = parse_sql("SELECT name FROM Dogs WHERE sex = 'F'", dogs_catalog)
    actions = ast_to_actions(ast, dogs_catalog, question, gold_values=["F"])
    copied = [a.arg for a in actions if a.kind is ActionKind.COPY_TOKEN]
    assert [question.tokens[i].surface for i in copied] == ["female"]
    with pytest.raises(GrammarCoverageError):
        ast_to_actions(ast, dogs_catalog, question, gold_values=["F", "extra"])


def test_star_attaches_to_reproduce_joined_from(catalogs):
    """A bare star over a join picks the attachment that keeps the FROM
    reproducible from columns, so the query stays linearizable."""
    company = catalogs("company_hiring")
    sql = ("SELECT * FROM employee AS T1 JOIN hiring AS T2 "
           "ON T1.employee_id = T2.employee_id WHERE T2.shop_id > 100")
    ast = parse_sql(sql, company)
    question = tokenize("everything over 100")
    back = actions_to_ast(ast_to_actions(ast, company, question), company, question)
    assert set(back.body.from_clause.tables) == {"employee", "hiring"}


def test_bare_multi_table_star_without_columns_is_outside_grammar(catalogs):
    company = catalogs("company_hiring")
    sql = ("SELECT * FROM employee AS T1 JOIN hiring AS T2 "
           "ON T1.employee_id = T2.employee_id")
    ast = parse_sql(sql, company)  # parseable and printable
    question = tokenize("show everything")
    with pytest.raises(GrammarCoverageError):
        ast_to_actions(ast, company, question)


# -- tagging oracle -----------------------------------------------------------


def test_tag_number_word(dogs_catalog):
    question = tokenize("cities with more than one employee")
    span = tag_value_span(question, "1")
    assert span is not None
    assert question.span_text(*span) == "one"


def test_tag_initialism_female(dogs_catalog):
    question = tokenize("What is the average age of the female dogs?")
    column = dogs_catalog.column("Dogs", "sex")
    span = tag_value_span(question, "F", column)
    assert span is not None
    assert question.span_text(*span) == "female"


def test_tag_implicit_value_absent():
    question = tokenize("How many hirings are full time?")
    assert tag_value_span(question, "Yes") is None


def test_tag_multiword_value():
    question = tokenize("owners who live in Lake Tia today")
    span = tag_value_span(question, "Lake Tia")
    assert span is not None
    assert question.span_text(*span) == "Lake Tia"


def test_tag_prefers_exact_numeral():
    question = tokenize("treatments from 2020 costing above 100 dollars")
    span = tag_value_span(question, "100")
    assert question.span_text(*span) == "100"
