"""Random AST sampling from the tree-construction grammar.

Used by property tests (round-trip laws, explanation totality) and the
coverage tooling. Sampling is seeded and biased toward termination so deep
recursion stays bounded; generated queries are grammatical but not
necessarily meaningful.
"""

from __future__ import annotations

import random
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


def sample_ast(rng: random.Random, catalog: SchemaCatalog, max_depth: int = 3) -> QueryAst:
    """One random, linearizable AST bound to ``catalog``."""
    while True:
        query = _sample_query(rng, catalog, depth=1, max_depth=max_depth)
        if query is not None:
            return query


def _sample_query(
    rng: random.Random, catalog: SchemaCatalog, depth: int, max_depth: int
) -> Optional[QueryAst]:
    # keep single-table blocks common so join inference rarely rejects
    table = rng.choice(catalog.tables)
    block = _sample_block(rng, catalog, table, depth, max_depth)
    if block is None:
        return None
    query = QueryAst(body=block)

    if depth < max_depth and rng.random() < 0.08:
        right = _sample_query(rng, catalog, depth + 1, max_depth)
        if right is not None:
            query.set_op = (rng.choice(list(SetOp)), right)

    # trailing ORDER BY in SQL text binds to the right operand of a set op,
    # so only orderless set-op queries are generated
    if query.set_op is None and rng.random() < 0.25:
        keys = []
        for _ in range(1 if rng.random() < 0.9 else 2):
            keys.append(
                (_sample_sel(rng, catalog, table, allow_agg=True), rng.choice(["asc", "desc"]))
            )
        limit = None
        if rng.random() < 0.6:
            limit = Literal(raw=str(rng.randint(1, 10)), kind=LiteralKind.NUMBER)
        if keys or limit:
            query.order_limit = OrderLimit(keys=keys, limit=limit)

    refs = block_column_refs(query.body) + query_order_refs(query)
    try:
        query.body.from_clause = infer_tables(refs, catalog)
    except JoinInferenceError:
        return None
    return query


def _sample_block(
    rng: random.Random, catalog: SchemaCatalog, table, depth: int, max_depth: int
) -> Optional[SelectBlock]:
    projections = [_sample_sel(rng, catalog, table, allow_agg=True)]
    while rng.random() < 0.25 and len(projections) < 3:
        projections.append(_sample_sel(rng, catalog, table, allow_agg=True))

    where = None
    if rng.random() < 0.5:
        where = _sample_cond(rng, catalog, table, depth, max_depth)
    group_by: list[ColumnRef] = []
    having = None
    if rng.random() < 0.25:
        group_by = [_pick_column(rng, table)]
        if rng.random() < 0.6:
            having = _sample_cond(rng, catalog, table, depth, max_depth, having=True)

    distinct = rng.random() < 0.15 and all(p.agg is None for p in projections)
    return SelectBlock(
        projections=projections,
        from_clause=FromClause(tables=[table.name], joins=[]),
        distinct=distinct,
        where=where,
        group_by=group_by,
        having=having,
    )


def _pick_column(rng: random.Random, table) -> ColumnRef:
    col = rng.choice(table.columns)
    return ColumnRef(table=table.name, column=col.name)


def _sample_sel(rng: random.Random, catalog, table, allow_agg: bool) -> SelExpr:
    roll = rng.random()
    if allow_agg and roll < 0.35:
        agg = rng.choice(list(AggOp))
        if agg is AggOp.COUNT and rng.random() < 0.5:
            return SelExpr(expr=ColumnExpr(ColumnRef(table=table.name, column="*")), agg=agg)
        distinct = rng.random() < 0.15
        return SelExpr(expr=ColumnExpr(_pick_column(rng, table)), agg=agg, distinct=distinct)
    if allow_agg and roll < 0.40:
        left = Operand(ref=_pick_column(rng, table), agg=rng.choice([None, AggOp.MAX]))
        right = Operand(ref=_pick_column(rng, table), agg=rng.choice([None, AggOp.MIN]))
        return SelExpr(expr=ArithExpr(op=rng.choice(list(ArithOp)), left=left, right=right))
    return SelExpr(expr=ColumnExpr(_pick_column(rng, table)))


def _sample_literal(rng: random.Random, catalog: SchemaCatalog, ref: ColumnRef) -> Literal:
    coldef = catalog.column(ref.table, ref.column) if ref.column != "*" else None
    if coldef is not None and coldef.distinct_values and rng.random() < 0.7:
        value = rng.choice(coldef.distinct_values[: min(8, len(coldef.distinct_values))])
        kind = (
            LiteralKind.NUMBER
            if coldef.affinity is Affinity.NUMBER and _is_num(value)
            else (LiteralKind.TIME if coldef.affinity is Affinity.TIME else LiteralKind.TEXT)
        )
        return Literal(raw=value, kind=kind)
    if coldef is None or coldef.affinity is Affinity.NUMBER:
        return Literal(raw=str(rng.randint(0, 99)), kind=LiteralKind.NUMBER)
    kind = LiteralKind.TIME if coldef.affinity is Affinity.TIME else LiteralKind.TEXT
    return Literal(raw=rng.choice(["alpha", "beta", "gamma"]), kind=kind)


def _is_num(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _sample_cond(
    rng: random.Random, catalog, table, depth: int, max_depth: int, having: bool = False
) -> Condition:
    roll = rng.random()
    if roll < 0.15:
        left = _sample_cond(rng, catalog, table, depth, max_depth, having)
        right = _sample_cond(rng, catalog, table, depth, max_depth, having)
        return AndCond(left, right) if rng.random() < 0.7 else OrCond(left, right)
    if roll < 0.22:
        number_cols = [c for c in table.columns if c.affinity is Affinity.NUMBER]
        if number_cols:
            col = rng.choice(number_cols)
            ref = ColumnRef(table=table.name, column=col.name)
            lo, hi = sorted([rng.randint(0, 50), rng.randint(0, 50)])
            return Between(
                left=SelExpr(expr=ColumnExpr(ref)),
                low=Literal(raw=str(lo), kind=LiteralKind.NUMBER),
                high=Literal(raw=str(hi), kind=LiteralKind.NUMBER),
            )
    if having:
        left = SelExpr(
            expr=ColumnExpr(ColumnRef(table=table.name, column="*")), agg=AggOp.COUNT
        ) if rng.random() < 0.6 else SelExpr(
            expr=ColumnExpr(_pick_column(rng, table)), agg=rng.choice(list(AggOp))
        )
    else:
        left = SelExpr(expr=ColumnExpr(_pick_column(rng, table)))
    op = rng.choice([CmpOp.EQ, CmpOp.NE, CmpOp.LT, CmpOp.LE, CmpOp.GT, CmpOp.GE, CmpOp.LIKE])
    if depth < max_depth and rng.random() < 0.15:
        sub = _sample_query(rng, catalog, depth + 1, max_depth)
        if sub is not None and len(sub.body.projections) == 1:
            sub.set_op = None
            return Compare(op=rng.choice([CmpOp.IN, CmpOp.NOT_IN, CmpOp.GT, CmpOp.EQ]),
                           left=left, right=QueryRhs(sub))
    if not having and rng.random() < 0.08:
        return Compare(op=CmpOp.EQ, left=left, right=ColumnRhs(_pick_column(rng, table)))
    ref = left.expr.ref if isinstance(left.expr, ColumnExpr) else left.expr.left.ref
    if op is CmpOp.LIKE:
        return Compare(op=op, left=left,
                       right=LiteralRhs(Literal(raw="%a%", kind=LiteralKind.TEXT)))
    return Compare(op=op, left=left, right=LiteralRhs(_sample_literal(rng, catalog, ref)))
