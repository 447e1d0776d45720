"""Deterministic AST -> SQL text printer.

Canonical form: uppercase keywords, lowercase aggregate names, explicit
JOIN ... ON, aliases T1..Tn in first-use order for multi-table blocks,
unqualified columns for single-table blocks. Printing then re-parsing a
bound AST is the identity.
"""

from __future__ import annotations

from .sqlast import (
    AndCond,
    Between,
    ColumnExpr,
    ColumnRef,
    Compare,
    Condition,
    Literal,
    LiteralKind,
    LiteralRhs,
    OrCond,
    Operand,
    QueryAst,
    QueryRhs,
    SelExpr,
    SelectBlock,
)


class PrintError(ValueError):
    pass


def print_sql(ast: QueryAst) -> str:
    return _render_query(ast)


def _render_query(query: QueryAst) -> str:
    parts = [_render_block(query.body)]
    if query.set_op is not None:
        op, right = query.set_op
        parts.append(op.value)
        parts.append(_render_query(right))
    text = " ".join(parts)
    if query.order_limit is not None:
        ol = query.order_limit
        alias = _alias_map(query.body)
        if ol.keys:
            keys = ", ".join(
                _render_sel(sel, alias) + (" DESC" if direction == "desc" else "")
                for sel, direction in ol.keys
            )
            text += f" ORDER BY {keys}"
        if ol.limit is not None:
            text += f" LIMIT {ol.limit.raw}"
    return text


def _alias_map(block: SelectBlock) -> dict[str, str]:
    if len(block.from_clause.tables) <= 1:
        return {}
    return {t: f"T{i + 1}" for i, t in enumerate(block.from_clause.tables)}


def _render_block(block: SelectBlock) -> str:
    alias = _alias_map(block)
    projs = ", ".join(_render_sel(sel, alias) for sel in block.projections)
    head = "SELECT DISTINCT" if block.distinct else "SELECT"
    sql = f"{head} {projs} FROM {_render_from(block, alias)}"
    if block.where is not None:
        sql += f" WHERE {_render_cond(block.where, alias)}"
    if block.group_by:
        cols = ", ".join(_render_ref(r, alias) for r in block.group_by)
        sql += f" GROUP BY {cols}"
    if block.having is not None:
        sql += f" HAVING {_render_cond(block.having, alias)}"
    return sql


def _render_from(block: SelectBlock, alias: dict[str, str]) -> str:
    clause = block.from_clause
    if not clause.tables:
        raise PrintError("empty FROM clause")
    if len(clause.tables) == 1:
        return clause.tables[0]
    out = [f"{clause.tables[0]} AS {alias[clause.tables[0]]}"]
    introduced = {clause.tables[0]}
    for table in clause.tables[1:]:
        conds = [
            j
            for j in clause.joins
            if (j.left.table == table and j.right.table in introduced)
            or (j.right.table == table and j.left.table in introduced)
        ]
        part = f"JOIN {table} AS {alias[table]}"
        if conds:
            rendered = " AND ".join(
                f"{_render_ref(j.left, alias)} = {_render_ref(j.right, alias)}"
                for j in conds
            )
            part += f" ON {rendered}"
        out.append(part)
        introduced.add(table)
    return " ".join(out)


def _render_ref(ref: ColumnRef, alias: dict[str, str]) -> str:
    if ref.is_star:
        return "*"
    if ref.table is None:
        raise PrintError(f"unbound column reference {ref.column!r}")
    if alias:
        return f"{alias[ref.table]}.{ref.column}"
    return ref.column


def _render_operand(op: Operand, alias: dict[str, str]) -> str:
    base = _render_ref(op.ref, alias)
    return f"{op.agg.value}({base})" if op.agg else base


def _render_sel(sel: SelExpr, alias: dict[str, str]) -> str:
    if isinstance(sel.expr, ColumnExpr):
        inner = _render_ref(sel.expr.ref, alias)
    else:
        expr = sel.expr
        inner = (
            f"{_render_operand(expr.left, alias)} {expr.op.value} "
            f"{_render_operand(expr.right, alias)}"
        )
    if sel.agg is None:
        return inner
    body = f"DISTINCT {inner}" if sel.distinct else inner
    return f"{sel.agg.value}({body})"


def render_literal(literal: Literal) -> str:
    if literal.kind is LiteralKind.NUMBER:
        return literal.raw
    return "'" + literal.raw.replace("'", "''") + "'"


_PREC = {"or": 1, "and": 2}


def _render_cond(cond: Condition, alias: dict[str, str], parent: int = 0, right: bool = False) -> str:
    if isinstance(cond, (AndCond, OrCond)):
        prec = _PREC["and" if isinstance(cond, AndCond) else "or"]
        word = "AND" if isinstance(cond, AndCond) else "OR"
        left_txt = _render_cond(cond.left, alias, prec, right=False)
        right_txt = _render_cond(cond.right, alias, prec, right=True)
        text = f"{left_txt} {word} {right_txt}"
        if prec < parent or (prec == parent and right):
            return f"({text})"
        return text
    if isinstance(cond, Compare):
        rhs = cond.right
        if isinstance(rhs, LiteralRhs):
            rhs_txt = render_literal(rhs.literal)
            if cond.op.value in ("IN", "NOT IN"):
                rhs_txt = f"({rhs_txt})"
        elif isinstance(rhs, QueryRhs):
            rhs_txt = f"({_render_query(rhs.query)})"
        else:
            rhs_txt = _render_ref(rhs.ref, alias)
        return f"{_render_sel(cond.left, alias)} {cond.op.value} {rhs_txt}"
    if isinstance(cond, Between):
        return (
            f"{_render_sel(cond.left, alias)} BETWEEN "
            f"{render_literal(cond.low)} AND {render_literal(cond.high)}"
        )
    raise PrintError(f"unknown condition node {type(cond).__name__}")
