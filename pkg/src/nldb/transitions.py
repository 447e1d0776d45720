"""Bidirectional bridge between ASTs and tree-construction action sequences.

``ast_to_actions`` linearizes a bound AST (the oracle direction, used for
corpus generation and tests); ``actions_to_ast`` replays a sequence back
into an AST, rebuilding the FROM clause from the selected columns. No
action ever selects a table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .catalog import ColumnDef, SchemaCatalog
from .grammar import (
    Action,
    ActionKind,
    apply_rule,
    copy_stop,
    copy_token,
    reduce_action,
    select_column,
)
from .linker import JoinInferenceError, infer_tables
from .sqlast import (
    AggOp,
    AndCond,
    ArithExpr,
    ArithOp,
    Between,
    ColumnExpr,
    ColumnRef,
    ColumnRhs,
    CmpOp,
    Compare,
    Condition,
    FromClause,
    Literal,
    LiteralKind,
    LiteralRhs,
    OrCond,
    OrderLimit,
    Operand,
    QueryAst,
    QueryRhs,
    SelExpr,
    SelectBlock,
    SetOp,
    block_column_refs,
    query_order_refs,
)
from .values import similarity, words_to_number

TAG_THRESHOLD = 0.60


class GrammarCoverageError(ValueError):
    """The AST cannot be produced by the tree-construction grammar."""


class ActionSequenceError(ValueError):
    def __init__(self, msg: str, step: int = -1):
        super().__init__(f"step {step}: {msg}" if step >= 0 else msg)
        self.step = step


# -- question tokenization ----------------------------------------------------

_QTOKEN_RE = re.compile(r"\d+(?:\.\d+)?|[A-Za-z_][A-Za-z0-9_']*|\S")


@dataclass(frozen=True)
class QToken:
    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedQuestion:
    raw: str
    tokens: tuple[QToken, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def span_text(self, first: int, last: int) -> str:
        return self.raw[self.tokens[first].start : self.tokens[last].end]


def tokenize(text: str) -> TokenizedQuestion:
    tokens = tuple(
        QToken(m.group(), m.start(), m.end()) for m in _QTOKEN_RE.finditer(text)
    )
    return TokenizedQuestion(raw=text, tokens=tokens)


# -- value-span tagging --------------------------------------------------------

_MAX_WINDOW = 6


def _window_score(window_text: str, gold: str) -> float:
    gold = gold.strip()
    num = words_to_number(window_text)
    if num is not None:
        try:
            if float(gold) == float(num):
                return 1.0
        except ValueError:
            pass
    try:
        if float(window_text) == float(gold):
            return 1.0
    except ValueError:
        pass
    return similarity(window_text, gold)


def tag_value_span(
    question: TokenizedQuestion,
    gold_value: str,
    column: Optional[ColumnDef] = None,
) -> Optional[tuple[int, int]]:
    """Contiguous token window most similar to ``gold_value``.

    Number words match their numerals; returns None when nothing scores at
    least the tagging threshold (an implicitly-mentioned value). The exact
    heuristics here are a best-effort reconstruction; they are tuned to the
    documented fixtures rather than spelled out by any published recipe.
    """
    best: Optional[tuple[int, int]] = None
    best_score = 0.0
    n = len(question.tokens)
    for start in range(n):
        for end in range(start, min(n, start + _MAX_WINDOW)):
            text = question.span_text(start, end)
            score = _window_score(text, gold_value)
            if score > best_score + 1e-12:
                best_score = score
                best = (start, end)
    if best is None or best_score < TAG_THRESHOLD:
        return None
    return best


# -- rule-id map ---------------------------------------------------------------

R_QUERY = 0
R_SET = {SetOp.UNION: 1, SetOp.INTERSECT: 2, SetOp.EXCEPT: 3}
R_ORDER = 4
R_ORDER_KEY = 5
R_DIR = {"asc": 6, "desc": 7}
R_LIMIT = 8
R_BLOCK = 9
R_DISTINCT = 10
R_GROUP_ITEM = 11
R_SEL_AGG = 12
R_SEL_PLAIN = 13
R_AGG_DISTINCT = 14
R_AGG = {AggOp.COUNT: 15, AggOp.MAX: 16, AggOp.MIN: 17, AggOp.SUM: 18, AggOp.AVG: 19}
R_VAL_COL = 20
R_VAL_ARITH = 21
R_OPERAND = 22
R_OPERAND_AGG = 23
R_ARITH = {ArithOp.ADD: 24, ArithOp.SUB: 25, ArithOp.MUL: 26, ArithOp.DIV: 27}
R_AND = 28
R_OR = 29
R_COMPARE = 30
R_BETWEEN = 31
R_CMP = {
    CmpOp.EQ: 32, CmpOp.NE: 33, CmpOp.LT: 34, CmpOp.LE: 35, CmpOp.GT: 36,
    CmpOp.GE: 37, CmpOp.LIKE: 38, CmpOp.NOT_LIKE: 39, CmpOp.IN: 40, CmpOp.NOT_IN: 41,
}
R_RHS_VAL = 42
R_RHS_COL = 43
R_RHS_QUERY = 44

_AGG_FROM_RULE = {v: k for k, v in R_AGG.items()}
_ARITH_FROM_RULE = {v: k for k, v in R_ARITH.items()}
_CMP_FROM_RULE = {v: k for k, v in R_CMP.items()}
_SET_FROM_RULE = {v: k for k, v in R_SET.items()}


# -- linearization -------------------------------------------------------------


def ensure_linearizable(ast: QueryAst, catalog: SchemaCatalog) -> None:
    """Check that every block's FROM is reproducible from its columns."""

    def visit(q: QueryAst) -> None:
        block = q.body
        refs = block_column_refs(block) + query_order_refs(q)
        for ref in refs:
            if ref.table is None:
                raise GrammarCoverageError(
                    "bare * cannot be attributed to a table in this query"
                )
        if not block.from_clause.inferable:
            raise GrammarCoverageError("FROM clause is flagged as non-inferable")
        try:
            inferred = infer_tables(refs, catalog)
        except JoinInferenceError as exc:
            raise GrammarCoverageError(f"FROM clause not inferable: {exc}") from exc
        if {t.lower() for t in inferred.tables} != {
            t.lower() for t in block.from_clause.tables
        }:
            raise GrammarCoverageError(
                "FROM tables differ from the column-inferred tables"
            )
        for cond in _subqueries(block):
            visit(cond)
        if q.set_op is not None:
            visit(q.set_op[1])

    visit(ast)


def _subqueries(block: SelectBlock) -> list[QueryAst]:
    out: list[QueryAst] = []

    def walk(cond: Optional[Condition]) -> None:
        if cond is None:
            return
        if isinstance(cond, (AndCond, OrCond)):
            walk(cond.left)
            walk(cond.right)
        elif isinstance(cond, Compare) and isinstance(cond.right, QueryRhs):
            out.append(cond.right.query)

    walk(block.where)
    walk(block.having)
    return out


def ast_to_actions(
    ast: QueryAst,
    catalog: SchemaCatalog,
    question: TokenizedQuestion,
    gold_values: Optional[Sequence[str]] = None,
) -> list[Action]:
    """Depth-first linearization of a bound AST into actions.

    Each literal is replaced by the question span chosen by the tagging
    oracle (possibly empty). ``gold_values``, when given, overrides the
    literal texts used as tagging targets, in linearization order.
    """
    ensure_linearizable(ast, catalog)
    out: list[Action] = []
    golds = list(gold_values) if gold_values is not None else None
    lit_index = 0

    def col_action(ref: ColumnRef) -> Action:
        return select_column(catalog.column_index(ref.table, ref.column))

    def emit_val(lit: Literal, column: Optional[ColumnRef]) -> None:
        nonlocal lit_index
        target = lit.raw
        if golds is not None:
            if lit_index >= len(golds):
                raise GrammarCoverageError("fewer gold values than literal slots")
            target = golds[lit_index]
        lit_index += 1
        coldef = None
        if column is not None and not column.is_star:
            coldef = catalog.column(column.table, column.column)
        span = tag_value_span(question, target, coldef)
        if span is not None:
            for i in range(span[0], span[1] + 1):
                out.append(copy_token(i))
        out.append(copy_stop())

    def emit_sel(sel: SelExpr) -> None:
        if sel.agg is not None:
            out.append(apply_rule(R_SEL_AGG))
            out.append(apply_rule(R_AGG[sel.agg]))
            if sel.distinct:
                out.append(apply_rule(R_AGG_DISTINCT))
            else:
                out.append(reduce_action())
            emit_val_expr(sel.expr)
        else:
            if sel.distinct:
                raise GrammarCoverageError("bare projection cannot carry DISTINCT")
            out.append(apply_rule(R_SEL_PLAIN))
            emit_val_expr(sel.expr)

    def emit_val_expr(expr) -> None:
        if isinstance(expr, ColumnExpr):
            out.append(apply_rule(R_VAL_COL))
            out.append(col_action(expr.ref))
        elif isinstance(expr, ArithExpr):
            out.append(apply_rule(R_VAL_ARITH))
            out.append(apply_rule(R_ARITH[expr.op]))
            emit_operand(expr.left)
            emit_operand(expr.right)
        else:
            raise GrammarCoverageError(f"unknown value expression {type(expr).__name__}")

    def emit_operand(op: Operand) -> None:
        if op.agg is not None:
            out.append(apply_rule(R_OPERAND_AGG))
            out.append(apply_rule(R_AGG[op.agg]))
        else:
            out.append(apply_rule(R_OPERAND))
        out.append(col_action(op.ref))

    def sel_column(sel: SelExpr) -> Optional[ColumnRef]:
        if isinstance(sel.expr, ColumnExpr):
            return sel.expr.ref
        return sel.expr.left.ref

    def emit_cond(cond: Condition) -> None:
        if isinstance(cond, AndCond):
            out.append(apply_rule(R_AND))
            emit_cond(cond.left)
            emit_cond(cond.right)
        elif isinstance(cond, OrCond):
            out.append(apply_rule(R_OR))
            emit_cond(cond.left)
            emit_cond(cond.right)
        elif isinstance(cond, Compare):
            out.append(apply_rule(R_COMPARE))
            out.append(apply_rule(R_CMP[cond.op]))
            emit_sel(cond.left)
            if isinstance(cond.right, LiteralRhs):
                out.append(apply_rule(R_RHS_VAL))
                emit_val(cond.right.literal, sel_column(cond.left))
            elif isinstance(cond.right, ColumnRhs):
                out.append(apply_rule(R_RHS_COL))
                out.append(col_action(cond.right.ref))
            else:
                out.append(apply_rule(R_RHS_QUERY))
                emit_query(cond.right.query)
        elif isinstance(cond, Between):
            out.append(apply_rule(R_BETWEEN))
            emit_sel(cond.left)
            emit_val(cond.low, sel_column(cond.left))
            emit_val(cond.high, sel_column(cond.left))
        else:
            raise GrammarCoverageError(f"unknown condition {type(cond).__name__}")

    def emit_block(block: SelectBlock) -> None:
        out.append(apply_rule(R_BLOCK))
        if block.distinct:
            out.append(apply_rule(R_DISTINCT))
        else:
            out.append(reduce_action())
        for sel in block.projections:
            emit_sel(sel)
        out.append(reduce_action())
        if block.where is not None:
            emit_cond(block.where)
        else:
            out.append(reduce_action())
        for ref in block.group_by:
            out.append(apply_rule(R_GROUP_ITEM))
            out.append(col_action(ref))
        out.append(reduce_action())
        if block.having is not None:
            emit_cond(block.having)
        else:
            out.append(reduce_action())

    def emit_query(q: QueryAst) -> None:
        out.append(apply_rule(R_QUERY))
        emit_block(q.body)
        if q.set_op is not None:
            out.append(apply_rule(R_SET[q.set_op[0]]))
            emit_query(q.set_op[1])
        else:
            out.append(reduce_action())
        if q.order_limit is not None:
            out.append(apply_rule(R_ORDER))
            for sel, direction in q.order_limit.keys:
                out.append(apply_rule(R_ORDER_KEY))
                emit_sel(sel)
                out.append(apply_rule(R_DIR[direction]))
            out.append(reduce_action())
            if q.order_limit.limit is not None:
                out.append(apply_rule(R_LIMIT))
                emit_val(q.order_limit.limit, None)
            else:
                out.append(reduce_action())
        else:
            out.append(reduce_action())

    emit_query(ast)
    if golds is not None and lit_index != len(golds):
        raise GrammarCoverageError("more gold values than literal slots")
    return out


# -- replay ---------------------------------------------------------------------


class _Cursor:
    def __init__(self, actions: Sequence[Action]):
        self.actions = list(actions)
        self.i = 0

    @property
    def step(self) -> int:
        return self.i

    def peek(self) -> Action:
        if self.i >= len(self.actions):
            raise ActionSequenceError("premature end of sequence", self.i)
        return self.actions[self.i]

    def next(self) -> Action:
        action = self.peek()
        self.i += 1
        return action

    def expect_rule(self, *rule_ids: int) -> int:
        action = self.next()
        if action.kind is not ActionKind.APPLY_RULE or action.arg not in rule_ids:
            expected = ", ".join(f"ApplyRule[{r}]" for r in rule_ids)
            raise ActionSequenceError(
                f"expected {expected}, got {action!r}", self.i - 1
            )
        return action.arg

    def at_rule(self, *rule_ids: int) -> bool:
        if self.i >= len(self.actions):
            return False
        action = self.actions[self.i]
        return action.kind is ActionKind.APPLY_RULE and action.arg in rule_ids

    def take_reduce(self) -> bool:
        if self.i < len(self.actions) and self.actions[self.i].kind is ActionKind.REDUCE:
            self.i += 1
            return True
        return False

    def expect_reduce(self) -> None:
        action = self.next()
        if action.kind is not ActionKind.REDUCE:
            raise ActionSequenceError(f"expected Reduce, got {action!r}", self.i - 1)


def actions_to_ast(
    actions: Sequence[Action],
    catalog: SchemaCatalog,
    question: TokenizedQuestion,
) -> QueryAst:
    """Replay actions into an AST. Literals carry the copied raw span text
    (unresolved); each block's FROM clause is rebuilt by join inference."""
    flat = catalog.flat_columns()
    cur = _Cursor(actions)

    def read_column() -> ColumnRef:
        action = cur.next()
        if action.kind is not ActionKind.SELECT_COLUMN:
            raise ActionSequenceError(f"expected SelectColumn, got {action!r}", cur.step - 1)
        if not 0 <= action.arg < len(flat):
            raise ActionSequenceError(f"illegal column index {action.arg}", cur.step - 1)
        table, column = flat[action.arg]
        return ColumnRef(table=table, column=column)

    def read_literal() -> Literal:
        first: Optional[int] = None
        last: Optional[int] = None
        while True:
            action = cur.next()
            if action.kind is ActionKind.COPY_STOP:
                break
            if action.kind is not ActionKind.COPY_TOKEN:
                raise ActionSequenceError(
                    f"expected CopyToken or CopyStop, got {action!r}", cur.step - 1
                )
            if not 0 <= action.arg < len(question.tokens):
                raise ActionSequenceError(f"illegal token index {action.arg}", cur.step - 1)
            if first is None:
                first = last = action.arg
            else:
                if action.arg != last + 1:
                    raise ActionSequenceError(
                        f"copy must continue at token {last + 1}, got {action.arg}",
                        cur.step - 1,
                    )
                last = action.arg
        if first is None:
            return Literal(raw="", kind=LiteralKind.TEXT, span=None)
        raw = question.span_text(first, last)
        kind = LiteralKind.NUMBER if _is_number(raw) else LiteralKind.TEXT
        return Literal(raw=raw, kind=kind, span=(first, last))

    def read_sel() -> SelExpr:
        rule = cur.expect_rule(R_SEL_AGG, R_SEL_PLAIN)
        if rule == R_SEL_AGG:
            agg = _AGG_FROM_RULE[cur.expect_rule(*R_AGG.values())]
            distinct = False
            if cur.at_rule(R_AGG_DISTINCT):
                cur.next()
                distinct = True
            else:
                cur.expect_reduce()
            expr = read_val_expr()
            return SelExpr(expr=expr, agg=agg, distinct=distinct)
        return SelExpr(expr=read_val_expr())

    def read_val_expr():
        rule = cur.expect_rule(R_VAL_COL, R_VAL_ARITH)
        if rule == R_VAL_COL:
            return ColumnExpr(read_column())
        op = _ARITH_FROM_RULE[cur.expect_rule(*R_ARITH.values())]
        return ArithExpr(op=op, left=read_operand(), right=read_operand())

    def read_operand() -> Operand:
        rule = cur.expect_rule(R_OPERAND, R_OPERAND_AGG)
        agg = None
        if rule == R_OPERAND_AGG:
            agg = _AGG_FROM_RULE[cur.expect_rule(*R_AGG.values())]
        return Operand(ref=read_column(), agg=agg)

    def read_cond() -> Condition:
        rule = cur.expect_rule(R_AND, R_OR, R_COMPARE, R_BETWEEN)
        if rule in (R_AND, R_OR):
            left = read_cond()
            right = read_cond()
            return AndCond(left, right) if rule == R_AND else OrCond(left, right)
        if rule == R_COMPARE:
            op = _CMP_FROM_RULE[cur.expect_rule(*R_CMP.values())]
            left = read_sel()
            rhs_rule = cur.expect_rule(R_RHS_VAL, R_RHS_COL, R_RHS_QUERY)
            if rhs_rule == R_RHS_VAL:
                right = LiteralRhs(read_literal())
            elif rhs_rule == R_RHS_COL:
                right = ColumnRhs(read_column())
            else:
                right = QueryRhs(read_query())
            return Compare(op=op, left=left, right=right)
        left = read_sel()
        return Between(left=left, low=read_literal(), high=read_literal())

    def read_block() -> SelectBlock:
        cur.expect_rule(R_BLOCK)
        distinct = False
        if cur.at_rule(R_DISTINCT):
            cur.next()
            distinct = True
        else:
            cur.expect_reduce()
        projections = [read_sel()]
        while cur.at_rule(R_SEL_AGG, R_SEL_PLAIN):
            projections.append(read_sel())
        cur.expect_reduce()
        where = None
        if not cur.take_reduce():
            where = read_cond()
        group_by: list[ColumnRef] = []
        while cur.at_rule(R_GROUP_ITEM):
            cur.next()
            group_by.append(read_column())
        cur.expect_reduce()
        having = None
        if not cur.take_reduce():
            having = read_cond()
        block = SelectBlock(
            projections=projections,
            from_clause=FromClause(tables=[], joins=[]),
            distinct=distinct,
            where=where,
            group_by=group_by,
            having=having,
        )
        return block

    def read_query() -> QueryAst:
        cur.expect_rule(R_QUERY)
        block = read_block()
        set_part = None
        if not cur.take_reduce():
            rule = cur.expect_rule(*R_SET.values())
            set_part = (_SET_FROM_RULE[rule], read_query())
        order = None
        if not cur.take_reduce():
            cur.expect_rule(R_ORDER)
            keys: list[tuple[SelExpr, str]] = []
            while cur.at_rule(R_ORDER_KEY):
                cur.next()
                sel = read_sel()
                dir_rule = cur.expect_rule(R_DIR["asc"], R_DIR["desc"])
                keys.append((sel, "asc" if dir_rule == R_DIR["asc"] else "desc"))
            cur.expect_reduce()
            limit = None
            if not cur.take_reduce():
                cur.expect_rule(R_LIMIT)
                limit = read_literal()
                if limit.raw and _is_number(limit.raw):
                    limit.kind = LiteralKind.NUMBER
            order = OrderLimit(keys=keys, limit=limit)
        ast = QueryAst(body=block, set_op=set_part, order_limit=order)
        refs = block_column_refs(block) + query_order_refs(ast)
        ast.body.from_clause = infer_tables(refs, catalog)
        return ast

    ast = read_query()
    if cur.i != len(cur.actions):
        raise ActionSequenceError(
            f"trailing actions after complete query ({len(cur.actions) - cur.i} left)",
            cur.i,
        )
    return ast


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


# -- wire serialization ----------------------------------------------------------


def format_actions(actions: Iterable[Action], catalog: SchemaCatalog) -> list[str]:
    flat = catalog.flat_columns()
    out = []
    for action in actions:
        if action.kind is ActionKind.APPLY_RULE:
            out.append(f"AR:{action.arg}")
        elif action.kind is ActionKind.REDUCE:
            out.append("RD")
        elif action.kind is ActionKind.COPY_STOP:
            out.append("CS")
        elif action.kind is ActionKind.COPY_TOKEN:
            out.append(f"CT:{action.arg}")
        else:
            table, column = flat[action.arg]
            out.append(f"SC:{table}.{column}")
    return out


def parse_action_token(token: str, catalog: SchemaCatalog) -> Action:
    if token == "RD":
        return reduce_action()
    if token == "CS":
        return copy_stop()
    if ":" not in token:
        raise ActionSequenceError(f"malformed action token {token!r}")
    tag, arg = token.split(":", 1)
    if tag == "AR":
        return apply_rule(int(arg))
    if tag == "CT":
        return copy_token(int(arg))
    if tag == "SC":
        if arg.isdigit():
            return select_column(int(arg))
        if "." not in arg:
            raise ActionSequenceError(f"malformed column in action {token!r}")
        table, column = arg.rsplit(".", 1)
        return select_column(catalog.column_index(table, column))
    raise ActionSequenceError(f"unknown action tag {tag!r}")


def parse_actions(tokens: Sequence[str], catalog: SchemaCatalog) -> list[Action]:
    return [parse_action_token(t, catalog) for t in tokens]
