"""Typed AST for the supported SQL subset.

This is the single source of truth between parsing, the transition system,
value resolution, explanation, and printing. Nodes are plain dataclasses
with structural equality; the parser and the action replayer both produce
the same canonical shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class AstError(ValueError):
    pass


class LiteralKind(str, Enum):
    NUMBER = "number"
    TEXT = "text"
    TIME = "time"


class AggOp(str, Enum):
    COUNT = "count"
    MAX = "max"
    MIN = "min"
    SUM = "sum"
    AVG = "avg"


class CmpOp(str, Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    LIKE = "LIKE"
    NOT_LIKE = "NOT LIKE"
    IN = "IN"
    NOT_IN = "NOT IN"


class ArithOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


class SetOp(str, Enum):
    UNION = "UNION"
    INTERSECT = "INTERSECT"
    EXCEPT = "EXCEPT"


@dataclass(frozen=True)
class ColumnRef:
    """A column of a bound catalog. ``column`` may be ``*``; a bare ``*``
    over a multi-table FROM has ``table=None`` and cannot be linearized."""

    table: Optional[str]
    column: str

    @property
    def is_star(self) -> bool:
        return self.column == "*"

    def __str__(self) -> str:
        return f"{self.table}.{self.column}" if self.table else self.column


@dataclass
class Literal:
    raw: str
    kind: LiteralKind = LiteralKind.TEXT
    # question-token index range this literal was copied from, when replayed
    # from actions; None for literals written directly in SQL text
    span: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        if self.kind is LiteralKind.NUMBER:
            try:
                float(self.raw)
            except ValueError:
                raise AstError(f"number literal does not parse: {self.raw!r}")


@dataclass
class ColumnExpr:
    ref: ColumnRef


@dataclass
class Operand:
    """Arithmetic operand: a column, optionally aggregated."""

    ref: ColumnRef
    agg: Optional[AggOp] = None


@dataclass
class ArithExpr:
    op: ArithOp
    left: Operand
    right: Operand


ValExpr = Union[ColumnExpr, ArithExpr]


@dataclass
class SelExpr:
    """Projection-shaped expression: optional aggregate over a value expr.

    Used for projections, predicate left sides, and order keys; ``distinct``
    marks aggregation over distinct values (count(DISTINCT c))."""

    expr: ValExpr
    agg: Optional[AggOp] = None
    distinct: bool = False


@dataclass
class LiteralRhs:
    literal: Literal


@dataclass
class ColumnRhs:
    ref: ColumnRef


@dataclass
class QueryRhs:
    query: "QueryAst"


Rhs = Union[LiteralRhs, ColumnRhs, QueryRhs]


@dataclass
class Compare:
    op: CmpOp
    left: SelExpr
    right: Rhs


@dataclass
class Between:
    left: SelExpr
    low: Literal
    high: Literal


@dataclass
class AndCond:
    left: "Condition"
    right: "Condition"


@dataclass
class OrCond:
    left: "Condition"
    right: "Condition"


Condition = Union[Compare, Between, AndCond, OrCond]


@dataclass(frozen=True)
class JoinCond:
    left: ColumnRef
    right: ColumnRef


@dataclass
class FromClause:
    tables: list[str]
    joins: list[JoinCond] = field(default_factory=list)
    # False when the clause cannot be reproduced from the referenced columns
    # over the foreign-key graph (non-FK joins, unreferenced tables); such
    # queries print and explain fine but have no action linearization.
    inferable: bool = True


@dataclass
class SelectBlock:
    projections: list[SelExpr]
    from_clause: FromClause
    distinct: bool = False
    where: Optional[Condition] = None
    group_by: list[ColumnRef] = field(default_factory=list)
    having: Optional[Condition] = None


@dataclass
class OrderLimit:
    keys: list[tuple[SelExpr, str]] = field(default_factory=list)  # ("asc"|"desc")
    limit: Optional[Literal] = None


@dataclass
class QueryAst:
    body: SelectBlock
    set_op: Optional[tuple[SetOp, "QueryAst"]] = None
    order_limit: Optional[OrderLimit] = None


def iter_literals(query: QueryAst) -> list[tuple[Literal, "LiteralSite"]]:
    """All literals of a query in linearization order, with their context."""
    out: list[tuple[Literal, LiteralSite]] = []
    _walk_query(query, out)
    return out


@dataclass(frozen=True)
class LiteralSite:
    """Where a literal sits: the predicate column/aggregate it is compared
    against, or the LIMIT slot (column None, agg None, op None)."""

    column: Optional[ColumnRef]
    agg: Optional[AggOp]
    op: Optional[CmpOp]
    role: str  # "compare" | "between_low" | "between_high" | "limit"


def _sel_expr_column(sel: SelExpr) -> tuple[Optional[ColumnRef], Optional[AggOp]]:
    if isinstance(sel.expr, ColumnExpr):
        return sel.expr.ref, sel.agg
    return sel.expr.left.ref, sel.agg or sel.expr.left.agg


def _walk_cond(cond: Optional[Condition], out: list) -> None:
    if cond is None:
        return
    if isinstance(cond, (AndCond, OrCond)):
        _walk_cond(cond.left, out)
        _walk_cond(cond.right, out)
    elif isinstance(cond, Compare):
        col, agg = _sel_expr_column(cond.left)
        if isinstance(cond.right, LiteralRhs):
            out.append((cond.right.literal, LiteralSite(col, agg, cond.op, "compare")))
        elif isinstance(cond.right, QueryRhs):
            _walk_query(cond.right.query, out)
    elif isinstance(cond, Between):
        col, agg = _sel_expr_column(cond.left)
        out.append((cond.low, LiteralSite(col, agg, None, "between_low")))
        out.append((cond.high, LiteralSite(col, agg, None, "between_high")))


def _walk_query(query: QueryAst, out: list) -> None:
    _walk_cond(query.body.where, out)
    _walk_cond(query.body.having, out)
    if query.set_op is not None:
        _walk_query(query.set_op[1], out)
    if query.order_limit is not None and query.order_limit.limit is not None:
        out.append((query.order_limit.limit, LiteralSite(None, None, None, "limit")))


def block_column_refs(block: SelectBlock) -> list[ColumnRef]:
    """Column references owned by this block (nested subqueries excluded)."""
    refs: list[ColumnRef] = []

    def add_val(expr: ValExpr) -> None:
        if isinstance(expr, ColumnExpr):
            refs.append(expr.ref)
        else:
            refs.append(expr.left.ref)
            refs.append(expr.right.ref)

    def add_cond(cond: Optional[Condition]) -> None:
        if cond is None:
            return
        if isinstance(cond, (AndCond, OrCond)):
            add_cond(cond.left)
            add_cond(cond.right)
        elif isinstance(cond, Compare):
            add_val(cond.left.expr)
            if isinstance(cond.right, ColumnRhs):
                refs.append(cond.right.ref)
        elif isinstance(cond, Between):
            add_val(cond.left.expr)

    for proj in block.projections:
        add_val(proj.expr)
    add_cond(block.where)
    refs.extend(block.group_by)
    add_cond(block.having)
    return refs


def query_order_refs(query: QueryAst) -> list[ColumnRef]:
    refs: list[ColumnRef] = []
    if query.order_limit:
        for sel, _ in query.order_limit.keys:
            if isinstance(sel.expr, ColumnExpr):
                refs.append(sel.expr.ref)
            else:
                refs.append(sel.expr.left.ref)
                refs.append(sel.expr.right.ref)
    return refs


def ast_equal(a: QueryAst, b: QueryAst, ignore_literals: bool = False) -> bool:
    """Structural equality; with ``ignore_literals`` the raw/kind payloads of
    literals are disregarded (used for span-vs-value round trips)."""
    if not ignore_literals:
        return a == b
    return _strip(a) == _strip(b)


def _strip(q: QueryAst) -> QueryAst:
    import copy

    q = copy.deepcopy(q)

    def blank(lit: Literal) -> None:
        lit.raw = ""
        lit.kind = LiteralKind.TEXT
        lit.span = None

    def strip_cond(c):
        if isinstance(c, (AndCond, OrCond)):
            strip_cond(c.left)
            strip_cond(c.right)
        elif isinstance(c, Compare):
            if isinstance(c.right, LiteralRhs):
                blank(c.right.literal)
            elif isinstance(c.right, QueryRhs):
                strip_query(c.right.query)
        elif isinstance(c, Between):
            blank(c.low)
            blank(c.high)

    def strip_query(query: QueryAst):
        if query.body.where:
            strip_cond(query.body.where)
        if query.body.having:
            strip_cond(query.body.having)
        if query.set_op:
            strip_query(query.set_op[1])
        if query.order_limit and query.order_limit.limit:
            blank(query.order_limit.limit)

    strip_query(q)
    return q
