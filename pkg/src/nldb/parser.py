"""Text -> AST parser for the supported SQL subset, with catalog binding.

Beyond parsing, this module canonicalizes: aliases are resolved away,
unqualified columns are bound through the FROM clause, a bare ``*`` is
attached to its owning table whenever that is unambiguous, and the FROM
clause is replaced by the join-inference result whenever doing so is
semantics-preserving (same tables, same join conditions). Queries whose
FROM cannot be reproduced from their columns are kept verbatim and flagged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .catalog import Affinity, SchemaCatalog
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
    JoinCond,
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
    iter_literals,
)

MAX_SUBQUERY_DEPTH = 3


class SqlParseError(ValueError):
    def __init__(self, msg: str, pos: int = -1):
        super().__init__(f"{msg} (at position {pos})" if pos >= 0 else msg)
        self.pos = pos


_KEYWORDS = {
    "select", "distinct", "from", "as", "join", "on", "where", "group", "by",
    "having", "order", "limit", "asc", "desc", "and", "or", "not", "like",
    "between", "in", "union", "intersect", "except",
    "count", "max", "min", "sum", "avg",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?![A-Za-z_]))
  | (?P<str>'(?:[^']|'')*')
  | (?P<qid>"[^"]+"|`[^`]+`)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|<>|=|<|>|\(|\)|,|\.|\*|\+|-|/)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # kw | id | num | str | op | eof
    text: str
    pos: int


def _lex(sql: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        if not m:
            raise SqlParseError(f"unexpected character {sql[pos]!r}", pos)
        if m.lastgroup != "ws":
            text = m.group()
            if m.lastgroup == "id":
                kind = "kw" if text.lower() in _KEYWORDS else "id"
            elif m.lastgroup == "qid":
                kind, text = "id", text[1:-1]
            elif m.lastgroup == "str":
                kind, text = "str", text[1:-1].replace("''", "'")
            else:
                kind = m.lastgroup  # num | op
            tokens.append(Token(kind, text, pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(sql)))
    return tokens


_AGG_NAMES = {a.value for a in AggOp}

_CMP_FROM_OP = {
    "=": CmpOp.EQ, "!=": CmpOp.NE, "<>": CmpOp.NE,
    "<": CmpOp.LT, "<=": CmpOp.LE, ">": CmpOp.GT, ">=": CmpOp.GE,
}

_ARITH_FROM_OP = {
    "+": ArithOp.ADD, "-": ArithOp.SUB, "*": ArithOp.MUL, "/": ArithOp.DIV,
}


class _Parser:
    def __init__(self, tokens: list[Token], catalog: SchemaCatalog):
        self.tokens = tokens
        self.i = 0
        self.catalog = catalog

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text.lower() in words

    def take_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.next()
            return True
        return False

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_kw(word):
            raise SqlParseError(f"expected {word.upper()}, found {tok.text!r}", tok.pos)
        return self.next()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def take_op(self, *ops: str) -> bool:
        if self.at_op(*ops):
            self.next()
            return True
        return False

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if not self.at_op(op):
            raise SqlParseError(f"expected {op!r}, found {tok.text!r}", tok.pos)
        return self.next()

    # -- grammar ----------------------------------------------------------

    def parse_query(self, depth: int) -> QueryAst:
        if depth > MAX_SUBQUERY_DEPTH:
            raise SqlParseError("subqueries nested deeper than supported", self.peek().pos)
        body, aliases = self.parse_block(depth)
        set_part: Optional[tuple[SetOp, QueryAst]] = None
        if self.at_kw("union", "intersect", "except"):
            op = SetOp(self.next().text.upper())
            right = self.parse_query(depth + 1)
            set_part = (op, right)
        order = self.parse_order_limit(body, aliases)
        return QueryAst(body=body, set_op=set_part, order_limit=order)

    def parse_block(self, depth: int) -> tuple[SelectBlock, dict[str, str]]:
        self.expect_kw("select")
        distinct = self.take_kw("distinct")
        projections = [self.parse_sel_expr()]
        while self.take_op(","):
            projections.append(self.parse_sel_expr())

        self.expect_kw("from")
        from_clause, aliases = self.parse_from(depth)

        where = None
        if self.take_kw("where"):
            where = self.parse_cond(depth)
        group_by: list[ColumnRef] = []
        if self.at_kw("group"):
            self.next()
            self.expect_kw("by")
            group_by.append(self.parse_colref())
            while self.take_op(","):
                group_by.append(self.parse_colref())
        having = None
        if self.take_kw("having"):
            having = self.parse_cond(depth)

        block = SelectBlock(
            projections=projections,
            from_clause=from_clause,
            distinct=distinct,
            where=where,
            group_by=group_by,
            having=having,
        )
        _bind_block(block, aliases, self.catalog)
        return block, aliases

    def parse_from(self, depth: int) -> tuple[FromClause, dict[str, str]]:
        tables: list[str] = []
        joins: list[JoinCond] = []
        aliases: dict[str, str] = {}

        def table_ref() -> str:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "(":
                raise SqlParseError("unsupported construct: subquery in FROM", tok.pos)
            if tok.kind not in ("id", "kw"):
                raise SqlParseError(f"expected table name, found {tok.text!r}", tok.pos)
            self.next()
            try:
                name = self.catalog.table(tok.text).name
            except KeyError:
                raise SqlParseError(f"unknown table {tok.text!r}", tok.pos) from None
            alias = name
            if self.take_kw("as"):
                alias_tok = self.next()
                alias = alias_tok.text
            elif self.peek().kind == "id":
                alias = self.next().text
            aliases[alias.lower()] = name
            aliases.setdefault(name.lower(), name)
            return name

        tables.append(table_ref())
        while self.take_kw("join"):
            tables.append(table_ref())
            if self.take_kw("on"):
                joins.append(self.parse_join_cond(aliases))
                while self.take_kw("and"):
                    joins.append(self.parse_join_cond(aliases))
        return FromClause(tables=tables, joins=joins), aliases

    def parse_join_cond(self, aliases: dict[str, str]) -> JoinCond:
        left = self.parse_colref()
        self.expect_op("=")
        right = self.parse_colref()
        return JoinCond(left, right)

    def parse_order_limit(
        self, body: SelectBlock, aliases: dict[str, str]
    ) -> Optional[OrderLimit]:
        keys: list[tuple[SelExpr, str]] = []
        limit: Optional[Literal] = None
        if self.at_kw("order"):
            self.next()
            self.expect_kw("by")
            while True:
                sel = self.parse_sel_expr()
                direction = "asc"
                if self.take_kw("desc"):
                    direction = "desc"
                elif self.take_kw("asc"):
                    direction = "asc"
                _bind_sel(sel, aliases, body.from_clause, self.catalog)
                keys.append((sel, direction))
                if not self.take_op(","):
                    break
        if self.take_kw("limit"):
            tok = self.peek()
            if tok.kind != "num" or "." in tok.text:
                raise SqlParseError("LIMIT expects a positive integer", tok.pos)
            self.next()
            limit = Literal(raw=tok.text, kind=LiteralKind.NUMBER)
        if not keys and limit is None:
            return None
        return OrderLimit(keys=keys, limit=limit)

    def parse_sel_expr(self) -> SelExpr:
        tok = self.peek()
        agg: Optional[AggOp] = None
        distinct = False
        if tok.kind == "kw" and tok.text.lower() in _AGG_NAMES:
            agg = AggOp(tok.text.lower())
            self.next()
            self.expect_op("(")
            distinct = self.take_kw("distinct")
            inner = self.parse_colref()
            self.expect_op(")")
            first: tuple[Optional[AggOp], ColumnRef] = (agg, inner)
        else:
            first = (None, self.parse_colref())
            agg, distinct = None, False

        if self.at_op("+", "-", "/") or (self.at_op("*") and self._star_is_arith()):
            op = ArithOp(_ARITH_FROM_OP[self.next().text])
            second = self.parse_operand()
            left = Operand(ref=first[1], agg=first[0])
            if distinct:
                raise SqlParseError("unsupported construct: DISTINCT inside arithmetic")
            return SelExpr(expr=ArithExpr(op=op, left=left, right=second))
        if first[0] is not None:
            return SelExpr(expr=ColumnExpr(first[1]), agg=first[0], distinct=distinct)
        return SelExpr(expr=ColumnExpr(first[1]))

    def _star_is_arith(self) -> bool:
        # a `*` right after a column ref is multiplication, not a star column
        nxt = self.peek(1)
        return nxt.kind in ("id", "num") or (
            nxt.kind == "kw" and nxt.text.lower() in _AGG_NAMES
        )

    def parse_operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "kw" and tok.text.lower() in _AGG_NAMES:
            agg = AggOp(tok.text.lower())
            self.next()
            self.expect_op("(")
            ref = self.parse_colref()
            self.expect_op(")")
            return Operand(ref=ref, agg=agg)
        return Operand(ref=self.parse_colref())

    def parse_colref(self) -> ColumnRef:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "*":
            self.next()
            return ColumnRef(table=None, column="*")
        if tok.kind not in ("id", "kw"):
            raise SqlParseError(f"expected column reference, found {tok.text!r}", tok.pos)
        self.next()
        if self.at_op("."):
            self.next()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "*":
                self.next()
                return ColumnRef(table=tok.text, column="*")
            if nxt.kind not in ("id", "kw"):
                raise SqlParseError(f"expected column name, found {nxt.text!r}", nxt.pos)
            self.next()
            return ColumnRef(table=tok.text, column=nxt.text)
        return ColumnRef(table=None, column=tok.text)

    def parse_cond(self, depth: int) -> Condition:
        left = self.parse_and_cond(depth)
        while self.take_kw("or"):
            right = self.parse_and_cond(depth)
            left = OrCond(left=left, right=right)
        return left

    def parse_and_cond(self, depth: int) -> Condition:
        left = self.parse_base_cond(depth)
        while self.take_kw("and"):
            right = self.parse_base_cond(depth)
            left = AndCond(left=left, right=right)
        return left

    def parse_base_cond(self, depth: int) -> Condition:
        if self.at_op("(") and not self._paren_is_subquery():
            self.next()
            inner = self.parse_cond(depth)
            self.expect_op(")")
            return inner
        sel = self.parse_sel_expr()
        tok = self.peek()
        if tok.kind == "op" and tok.text in _CMP_FROM_OP:
            self.next()
            return Compare(op=_CMP_FROM_OP[tok.text], left=sel, right=self.parse_rhs(depth))
        if self.take_kw("not"):
            if self.take_kw("like"):
                return Compare(op=CmpOp.NOT_LIKE, left=sel, right=self.parse_rhs(depth))
            if self.take_kw("in"):
                return Compare(op=CmpOp.NOT_IN, left=sel, right=self.parse_rhs(depth))
            raise SqlParseError("expected LIKE or IN after NOT", self.peek().pos)
        if self.take_kw("like"):
            return Compare(op=CmpOp.LIKE, left=sel, right=self.parse_rhs(depth))
        if self.take_kw("in"):
            return Compare(op=CmpOp.IN, left=sel, right=self.parse_rhs(depth))
        if self.take_kw("between"):
            low = self.parse_literal()
            self.expect_kw("and")
            high = self.parse_literal()
            return Between(left=sel, low=low, high=high)
        raise SqlParseError(f"expected comparison operator, found {tok.text!r}", tok.pos)

    def _paren_is_subquery(self) -> bool:
        nxt = self.peek(1)
        return nxt.kind == "kw" and nxt.text.lower() == "select"

    def parse_rhs(self, depth: int):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "(":
            if self._paren_is_subquery():
                self.next()
                sub = self.parse_query(depth + 1)
                self.expect_op(")")
                return QueryRhs(query=sub)
            self.next()
            lit = self.parse_literal()
            self.expect_op(")")
            return LiteralRhs(literal=lit)
        if tok.kind in ("num", "str") or (tok.kind == "op" and tok.text == "-"):
            return LiteralRhs(literal=self.parse_literal())
        if tok.kind in ("id", "kw"):
            return ColumnRhs(ref=self.parse_colref())
        raise SqlParseError(f"expected value, column, or subquery, found {tok.text!r}", tok.pos)

    def parse_literal(self) -> Literal:
        tok = self.next()
        if tok.kind == "op" and tok.text == "-":
            num = self.next()
            if num.kind != "num":
                raise SqlParseError("expected number after '-'", num.pos)
            return Literal(raw=f"-{num.text}", kind=LiteralKind.NUMBER)
        if tok.kind == "num":
            return Literal(raw=tok.text, kind=LiteralKind.NUMBER)
        if tok.kind == "str":
            return Literal(raw=tok.text, kind=LiteralKind.TEXT)
        raise SqlParseError(f"expected literal, found {tok.text!r}", tok.pos)


# -- binding and canonicalization ------------------------------------------


def _resolve_ref(
    ref: ColumnRef, aliases: dict[str, str], clause: FromClause, catalog: SchemaCatalog
) -> ColumnRef:
    if ref.is_star:
        if ref.table is None:
            return ref
        table = aliases.get(ref.table.lower())
        if table is None:
            raise SqlParseError(f"unknown table or alias {ref.table!r}")
        return ColumnRef(table=table, column="*")
    if ref.table is not None:
        table = aliases.get(ref.table.lower())
        if table is None:
            raise SqlParseError(f"unknown table or alias {ref.table!r}")
        try:
            col = catalog.column(table, ref.column)
        except KeyError:
            raise SqlParseError(f"unknown column {table}.{ref.column}") from None
        return ColumnRef(table=table, column=col.name)
    owners = []
    for table in clause.tables:
        try:
            col = catalog.column(table, ref.column)
            owners.append((table, col.name))
        except KeyError:
            continue
    if not owners:
        raise SqlParseError(f"unresolvable column {ref.column!r}")
    if len(owners) > 1:
        names = ", ".join(t for t, _ in owners)
        raise SqlParseError(f"ambiguous column {ref.column!r} (in {names})")
    return ColumnRef(table=owners[0][0], column=owners[0][1])


def _bind_sel(
    sel: SelExpr, aliases: dict[str, str], clause: FromClause, catalog: SchemaCatalog
) -> None:
    if isinstance(sel.expr, ColumnExpr):
        sel.expr.ref = _resolve_ref(sel.expr.ref, aliases, clause, catalog)
    else:
        sel.expr.left.ref = _resolve_ref(sel.expr.left.ref, aliases, clause, catalog)
        sel.expr.right.ref = _resolve_ref(sel.expr.right.ref, aliases, clause, catalog)


def _bind_cond(
    cond: Optional[Condition],
    aliases: dict[str, str],
    clause: FromClause,
    catalog: SchemaCatalog,
) -> None:
    if cond is None:
        return
    if isinstance(cond, (AndCond, OrCond)):
        _bind_cond(cond.left, aliases, clause, catalog)
        _bind_cond(cond.right, aliases, clause, catalog)
    elif isinstance(cond, Compare):
        _bind_sel(cond.left, aliases, clause, catalog)
        if isinstance(cond.right, ColumnRhs):
            cond.right.ref = _resolve_ref(cond.right.ref, aliases, clause, catalog)
    elif isinstance(cond, Between):
        _bind_sel(cond.left, aliases, clause, catalog)


def _bind_block(block: SelectBlock, aliases: dict[str, str], catalog: SchemaCatalog) -> None:
    clause = block.from_clause
    for sel in block.projections:
        _bind_sel(sel, aliases, clause, catalog)
    _bind_cond(block.where, aliases, clause, catalog)
    block.group_by = [_resolve_ref(r, aliases, clause, catalog) for r in block.group_by]
    _bind_cond(block.having, aliases, clause, catalog)
    block.from_clause = FromClause(
        tables=list(clause.tables),
        joins=[
            JoinCond(
                _resolve_ref(j.left, aliases, clause, catalog),
                _resolve_ref(j.right, aliases, clause, catalog),
            )
            for j in clause.joins
        ],
    )


def _literal_kinds(query: QueryAst, catalog: SchemaCatalog) -> None:
    for literal, site in iter_literals(query):
        if literal.kind is LiteralKind.NUMBER:
            continue
        if site.op is not None and site.op.value in ("LIKE", "NOT LIKE"):
            continue  # patterns are text no matter the column type
        if site.column is not None and not site.column.is_star:
            col = catalog.column(site.column.table, site.column.column)
            if col.affinity is Affinity.TIME:
                literal.kind = LiteralKind.TIME


def _join_key(joins: list[JoinCond]) -> set[frozenset[str]]:
    return {frozenset((str(j.left), str(j.right))) for j in joins}


def canonicalize_from(query: QueryAst, catalog: SchemaCatalog) -> None:
    """Attach bare stars and adopt the inferred FROM when it is equivalent.

    Works bottom-up over nested queries. Clauses that cannot be reproduced
    from their column set over the FK graph keep the parsed form and are
    flagged ``inferable=False``.
    """
    from .sqlast import block_column_refs, query_order_refs

    def handle(q: QueryAst) -> None:
        block = q.body
        for cond in (block.where, block.having):
            _visit_subqueries(cond, handle)
        if q.set_op is not None:
            handle(q.set_op[1])

        refs = block_column_refs(block) + query_order_refs(q)
        parsed = [catalog.table(t).name for t in block.from_clause.tables]
        parsed_set = {t.lower() for t in parsed}

        stars = [r for r in refs if r.is_star and r.table is None]
        if stars:
            attach: Optional[str] = None
            if len(parsed) == 1:
                attach = parsed[0]
            else:
                concrete = [r for r in refs if r.table is not None]
                for cand in parsed:
                    trial = concrete + [ColumnRef(cand, "*")]
                    try:
                        clause = infer_tables(trial, catalog)
                    except JoinInferenceError:
                        continue
                    if {t.lower() for t in clause.tables} == parsed_set:
                        attach = cand
                        break
            if attach is not None:
                _attach_stars(q, attach)
                refs = block_column_refs(block) + query_order_refs(q)

        concrete = [r for r in refs if r.table is not None]
        if not concrete:
            block.from_clause.inferable = False
            return
        try:
            inferred = infer_tables(concrete, catalog)
        except JoinInferenceError:
            block.from_clause.inferable = False
            return
        same_tables = {t.lower() for t in inferred.tables} == parsed_set
        same_joins = _join_key(inferred.joins) == _join_key(block.from_clause.joins)
        if same_tables and same_joins:
            block.from_clause = inferred
        else:
            block.from_clause.inferable = False

    handle(query)


def _visit_subqueries(cond: Optional[Condition], fn) -> None:
    if cond is None:
        return
    if isinstance(cond, (AndCond, OrCond)):
        _visit_subqueries(cond.left, fn)
        _visit_subqueries(cond.right, fn)
    elif isinstance(cond, Compare) and isinstance(cond.right, QueryRhs):
        fn(cond.right.query)


def _attach_stars(query: QueryAst, table: str) -> None:
    block = query.body

    def fix_sel(sel: SelExpr) -> None:
        if isinstance(sel.expr, ColumnExpr) and sel.expr.ref.is_star and sel.expr.ref.table is None:
            sel.expr.ref = ColumnRef(table=table, column="*")

    def fix_cond(cond: Optional[Condition]) -> None:
        if cond is None:
            return
        if isinstance(cond, (AndCond, OrCond)):
            fix_cond(cond.left)
            fix_cond(cond.right)
        elif isinstance(cond, (Compare, Between)):
            fix_sel(cond.left)

    for sel in block.projections:
        fix_sel(sel)
    fix_cond(block.where)
    fix_cond(block.having)
    if query.order_limit:
        for sel, _ in query.order_limit.keys:
            fix_sel(sel)


def parse_sql(sql: str, catalog: SchemaCatalog) -> QueryAst:
    """Parse and bind ``sql`` against ``catalog``, canonicalizing as above.

    Raises ``SqlParseError`` with a character position for lexical/syntax
    errors, unresolvable identifiers, and unsupported constructs.
    """
    sql = sql.strip().rstrip(";")
    tokens = _lex(sql)
    parser = _Parser(tokens, catalog)
    query = parser.parse_query(depth=1)
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise SqlParseError(f"unexpected trailing input {trailing.text!r}", trailing.pos)
    canonicalize_from(query, catalog)
    _literal_kinds(query, catalog)
    return query
