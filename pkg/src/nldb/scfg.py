"""Synchronous grammar rules: loading, template matching, derivations.

The shallow tier is a wide set of anonymized single-block templates; a
query parses under it when its collapsed shape equals a template exactly
(placeholders unify, repeated indices must bind the same value). The deep
tier mirrors the tree-construction grammar row for row and is total over
everything that grammar can produce; its rows carry the wording fragments
the compositional renderer uses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .sqlast import (
    AggOp,
    AndCond,
    Between,
    ColumnExpr,
    ColumnRef,
    Compare,
    Condition,
    FromClause,
    LiteralRhs,
    OrCond,
    OrderLimit,
    QueryAst,
    QueryRhs,
    SelExpr,
    SelectBlock,
    SetOp,
)

_PLACEHOLDER_RE = re.compile(r"^<([A-Za-z]+)_(\d+)>$")
_NL_PLACEHOLDER_RE = re.compile(r"\{<([A-Za-z]+_\d+)>\}")


class ScfgError(ValueError):
    pass


@dataclass(frozen=True)
class ScfgRule:
    rule_id: int
    tier: str  # "shallow" | "deep"
    lhs: str
    sql_rhs: str
    nl_rhs: str

    @property
    def nl_placeholders(self) -> set[str]:
        return set(_NL_PLACEHOLDER_RE.findall(self.nl_rhs))

    @property
    def sql_placeholders(self) -> set[str]:
        return set(re.findall(r"<([A-Za-z]+_\d+)>", self.sql_rhs))


@dataclass
class ScfgRuleset:
    shallow: list[ScfgRule]
    deep: list[ScfgRule]

    def deep_text(self, transition_rule_id: int) -> str:
        for rule in self.deep:
            if rule.rule_id == 100 + transition_rule_id:
                return rule.nl_rhs
        raise ScfgError(f"no deep row mirrors transition rule {transition_rule_id}")


def load_scfg_text(text: str) -> ScfgRuleset:
    shallow, deep = [], []
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ScfgError(f"line {line_no}: expected 5 tab-separated fields")
        rule = ScfgRule(int(parts[0]), parts[1], parts[2], parts[3], parts[4])
        if rule.tier == "shallow":
            if not rule.nl_placeholders <= rule.sql_placeholders:
                missing = rule.nl_placeholders - rule.sql_placeholders
                raise ScfgError(
                    f"line {line_no}: nl references unbound placeholders {sorted(missing)}"
                )
            shallow.append(rule)
        elif rule.tier == "deep":
            deep.append(rule)
        else:
            raise ScfgError(f"line {line_no}: unknown tier {rule.tier!r}")
    return ScfgRuleset(shallow=shallow, deep=deep)


_cached: Optional[ScfgRuleset] = None


def default_scfg() -> ScfgRuleset:
    global _cached
    if _cached is None:
        text = resources.files("nldb.data").joinpath("scfg_rules.tsv").read_text("utf-8")
        _cached = load_scfg_text(text)
    return _cached


# -- derivations -----------------------------------------------------------


@dataclass
class Derivation:
    """A parse of one query under a grammar tier.

    Shallow derivations carry the matched rule, the placeholder environment,
    and child derivations for nested templates (``P_i`` operands and
    subqueries bound to ``L_i`` slots). Deep derivations carry the query
    itself; the compositional renderer walks it directly.
    """

    tier: str
    query: QueryAst
    rule: Optional[ScfgRule] = None
    env: dict = field(default_factory=dict)
    children: dict = field(default_factory=dict)
    block_rule: Optional[ScfgRule] = None  # P rule when this derivation wraps a block


# -- shallow template compilation -------------------------------------------


def _plc(token: str) -> Optional[tuple[str, str]]:
    m = _PLACEHOLDER_RE.match(token)
    if not m:
        return None
    return m.group(1), f"{m.group(1)}_{m.group(2)}"


@dataclass
class _ProjPat:
    form: str          # star | col | agg | count_star | count_distinct
    agg_plc: str = ""
    col_plc: str = ""
    table_plc: str = ""


@dataclass
class _PredPat:
    form: str          # cmp | agg_cmp | count_cmp | between
    table_plc: str = ""
    col_plc: str = ""
    agg_plc: str = ""
    wops_plc: str = ""
    lit_plcs: tuple[str, ...] = ()


@dataclass
class _CondPat:
    connector: Optional[str]   # None | AND | OR
    preds: list[_PredPat]


@dataclass
class _PPat:
    distinct: bool
    projs: list[_ProjPat]
    table_plc: str
    where: Optional[_CondPat]
    group: Optional[tuple[str, str]]      # (table_plc, col_plc)
    having: Optional[_PredPat]


@dataclass
class _OrderKeyPat:
    form: str                  # col | agg | count_star
    table_plc: str = ""
    col_plc: str = ""
    agg_plc: str = ""
    dir_plc: str = ""


@dataclass
class _SPat:
    kind: str                  # plain | setop | order | limit
    p_slots: list[str]
    setop: Optional[SetOp] = None
    order_key: Optional[_OrderKeyPat] = None
    limit_plc: str = ""


class _TemplateParser:
    def __init__(self, sql_rhs: str):
        self.tokens = sql_rhs.split()
        self.i = 0

    def peek(self, offset: int = 0) -> str:
        idx = self.i + offset
        return self.tokens[idx] if idx < len(self.tokens) else ""

    def next(self) -> str:
        token = self.peek()
        self.i += 1
        return token

    def take(self, token: str) -> bool:
        if self.peek() == token:
            self.i += 1
            return True
        return False

    def expect(self, token: str) -> None:
        got = self.next()
        if got != token:
            raise ScfgError(f"template expected {token!r}, found {got!r}")

    def done(self) -> bool:
        return self.i >= len(self.tokens)

    # -- pieces -----------------------------------------------------------

    def placeholder(self, *kinds: str) -> str:
        token = self.next()
        plc = _plc(token)
        if plc is None or plc[0] not in kinds:
            raise ScfgError(f"template expected {kinds} placeholder, found {token!r}")
        return plc[1]

    def qualified_column(self) -> tuple[str, str]:
        token = self.next()
        if "." not in token:
            raise ScfgError(f"template expected <T_i>.<C_j>, found {token!r}")
        t_tok, c_tok = token.split(".", 1)
        t = _plc(t_tok)
        c = _plc(c_tok)
        if t is None or t[0] != "T" or c is None or c[0] != "C":
            raise ScfgError(f"template expected <T_i>.<C_j>, found {token!r}")
        return t[1], c[1]

    def proj(self) -> _ProjPat:
        token = self.peek()
        if token == "*":
            self.next()
            return _ProjPat(form="star")
        if token == "COUNT":
            self.next()
            self.expect("(")
            if self.take("*"):
                self.expect(")")
                return _ProjPat(form="count_star")
            self.expect("DISTINCT")
            t, c = self.qualified_column()
            self.expect(")")
            return _ProjPat(form="count_distinct", table_plc=t, col_plc=c)
        plc = _plc(token)
        if plc is not None and plc[0] == "AOps":
            self.next()
            self.expect("(")
            t, c = self.qualified_column()
            self.expect(")")
            return _ProjPat(form="agg", agg_plc=plc[1], table_plc=t, col_plc=c)
        t, c = self.qualified_column()
        return _ProjPat(form="col", table_plc=t, col_plc=c)

    def pred(self) -> _PredPat:
        token = self.peek()
        if token == "COUNT":
            self.next()
            self.expect("(")
            self.expect("*")
            self.expect(")")
            wops = self.placeholder("WOps")
            lit = self.placeholder("L")
            return _PredPat(form="count_cmp", wops_plc=wops, lit_plcs=(lit,))
        plc = _plc(token)
        if plc is not None and plc[0] == "AOps":
            self.next()
            self.expect("(")
            t, c = self.qualified_column()
            self.expect(")")
            wops = self.placeholder("WOps")
            lit = self.placeholder("L")
            return _PredPat(form="agg_cmp", agg_plc=plc[1], table_plc=t, col_plc=c,
                            wops_plc=wops, lit_plcs=(lit,))
        t, c = self.qualified_column()
        if self.take("BETWEEN"):
            lo = self.placeholder("L")
            self.expect("AND")
            hi = self.placeholder("L")
            return _PredPat(form="between", table_plc=t, col_plc=c, lit_plcs=(lo, hi))
        wops = self.placeholder("WOps")
        lit = self.placeholder("L")
        return _PredPat(form="cmp", table_plc=t, col_plc=c, wops_plc=wops, lit_plcs=(lit,))


def compile_p_template(sql_rhs: str) -> _PPat:
    tp = _TemplateParser(sql_rhs)
    tp.expect("SELECT")
    distinct = tp.take("DISTINCT")
    projs = [tp.proj()]
    while tp.take(","):
        projs.append(tp.proj())
    tp.expect("FROM")
    table_plc = tp.placeholder("T")
    where = None
    if tp.take("WHERE"):
        preds = [tp.pred()]
        connector = None
        while tp.peek() in ("AND", "OR"):
            connector = tp.next()
            preds.append(tp.pred())
        where = _CondPat(connector=connector, preds=preds)
    group = None
    if tp.take("GROUP"):
        tp.expect("BY")
        group = tp.qualified_column()
    having = None
    if tp.take("HAVING"):
        having = tp.pred()
    if not tp.done():
        raise ScfgError(f"trailing template tokens: {tp.tokens[tp.i:]}")
    return _PPat(distinct=distinct, projs=projs, table_plc=table_plc,
                 where=where, group=group, having=having)


def compile_s_template(sql_rhs: str) -> _SPat:
    tp = _TemplateParser(sql_rhs)
    p0 = tp.placeholder("P")
    if tp.done():
        return _SPat(kind="plain", p_slots=[p0])
    token = tp.next()
    if token in ("UNION", "INTERSECT", "EXCEPT"):
        p1 = tp.placeholder("P")
        if not tp.done():
            raise ScfgError("set-operation template must end after the second operand")
        return _SPat(kind="setop", p_slots=[p0, p1], setop=SetOp(token))
    if token == "LIMIT":
        lim = tp.placeholder("L")
        return _SPat(kind="limit", p_slots=[p0], limit_plc=lim)
    if token != "ORDER":
        raise ScfgError(f"unexpected template token {token!r}")
    tp.expect("BY")
    if tp.peek() == "COUNT":
        tp.next()
        tp.expect("(")
        tp.expect("*")
        tp.expect(")")
        key = _OrderKeyPat(form="count_star", dir_plc=tp.placeholder("Dir"))
    else:
        plc = _plc(tp.peek())
        if plc is not None and plc[0] == "AOps":
            tp.next()
            tp.expect("(")
            t, c = tp.qualified_column()
            tp.expect(")")
            key = _OrderKeyPat(form="agg", agg_plc=plc[1], table_plc=t, col_plc=c,
                               dir_plc=tp.placeholder("Dir"))
        else:
            t, c = tp.qualified_column()
            key = _OrderKeyPat(form="col", table_plc=t, col_plc=c,
                               dir_plc=tp.placeholder("Dir"))
    limit_plc = ""
    if tp.take("LIMIT"):
        limit_plc = tp.placeholder("L")
    if not tp.done():
        raise ScfgError(f"trailing template tokens: {tp.tokens[tp.i:]}")
    return _SPat(kind="order", p_slots=[p0], order_key=key, limit_plc=limit_plc)


# -- unification -----------------------------------------------------------


def _unify(env: dict, plc: str, value) -> bool:
    if plc in env:
        old = env[plc]
        if isinstance(old, ColumnRef) and isinstance(value, ColumnRef):
            return (old.table or "").lower() == (value.table or "").lower() and \
                old.column.lower() == value.column.lower()
        if isinstance(old, str) and isinstance(value, str):
            return old.lower() == value.lower()
        return old == value
    env[plc] = value
    return True


def _match_colref(env: dict, table_plc: str, col_plc: str, ref: ColumnRef) -> bool:
    if ref.is_star or ref.table is None:
        return False
    return _unify(env, table_plc, ref.table) and _unify(env, col_plc, ref)


def _match_proj(pat: _ProjPat, sel: SelExpr, env: dict) -> bool:
    if not isinstance(sel.expr, ColumnExpr):
        return False
    ref = sel.expr.ref
    if pat.form == "star":
        return sel.agg is None and not sel.distinct and ref.is_star
    if pat.form == "col":
        return sel.agg is None and not sel.distinct and \
            _match_colref(env, pat.table_plc, pat.col_plc, ref)
    if pat.form == "count_star":
        return sel.agg is AggOp.COUNT and not sel.distinct and ref.is_star
    if pat.form == "count_distinct":
        return sel.agg is AggOp.COUNT and sel.distinct and \
            _match_colref(env, pat.table_plc, pat.col_plc, ref)
    if pat.form == "agg":
        return sel.agg is not None and not sel.distinct and not ref.is_star and \
            _unify(env, pat.agg_plc, sel.agg) and \
            _match_colref(env, pat.table_plc, pat.col_plc, ref)
    return False


def _match_pred(pat: _PredPat, cond: Condition, env: dict) -> bool:
    if pat.form == "between":
        if not isinstance(cond, Between) or not isinstance(cond.left.expr, ColumnExpr):
            return False
        if cond.left.agg is not None or cond.left.expr.ref.is_star:
            return False
        if not _match_colref(env, pat.table_plc, pat.col_plc, cond.left.expr.ref):
            return False
        env[pat.lit_plcs[0]] = cond.low
        env[pat.lit_plcs[1]] = cond.high
        return True
    if not isinstance(cond, Compare) or not isinstance(cond.left.expr, ColumnExpr):
        return False
    rhs = cond.right
    if isinstance(rhs, LiteralRhs):
        bound = rhs.literal
    elif isinstance(rhs, QueryRhs):
        bound = rhs.query
    else:
        return False
    left = cond.left
    ref = left.expr.ref
    if pat.form == "cmp":
        if left.agg is not None or ref.is_star:
            return False
        if not _match_colref(env, pat.table_plc, pat.col_plc, ref):
            return False
    elif pat.form == "agg_cmp":
        if left.agg is None or left.distinct or ref.is_star:
            return False
        if not _unify(env, pat.agg_plc, left.agg):
            return False
        if not _match_colref(env, pat.table_plc, pat.col_plc, ref):
            return False
    elif pat.form == "count_cmp":
        if left.agg is not AggOp.COUNT or not ref.is_star:
            return False
    else:
        return False
    if not _unify(env, pat.wops_plc, cond.op):
        return False
    env[pat.lit_plcs[0]] = bound
    return True


def _match_cond(pat: Optional[_CondPat], cond: Optional[Condition], env: dict) -> bool:
    if pat is None:
        return cond is None
    if cond is None:
        return False
    if pat.connector is None:
        return len(pat.preds) == 1 and _match_pred(pat.preds[0], cond, env)
    node_type = AndCond if pat.connector == "AND" else OrCond
    if not isinstance(cond, node_type):
        return False
    return (
        len(pat.preds) == 2
        and _match_pred(pat.preds[0], cond.left, env)
        and _match_pred(pat.preds[1], cond.right, env)
    )


def match_block(pat: _PPat, block: SelectBlock, env: dict) -> bool:
    if len(block.from_clause.tables) != 1:
        return False
    if not _unify(env, pat.table_plc, block.from_clause.tables[0]):
        return False
    if block.distinct != pat.distinct:
        return False
    if len(block.projections) != len(pat.projs):
        return False
    for ppat, sel in zip(pat.projs, block.projections):
        if not _match_proj(ppat, sel, env):
            return False
    if not _match_cond(pat.where, block.where, env):
        return False
    if pat.group is None:
        if block.group_by:
            return False
    else:
        if len(block.group_by) != 1:
            return False
        if not _match_colref(env, pat.group[0], pat.group[1], block.group_by[0]):
            return False
    if pat.having is None:
        return block.having is None
    if block.having is None:
        return False
    return _match_pred(pat.having, block.having, env)


# -- shallow parsing ----------------------------------------------------------


class _ShallowMatcher:
    def __init__(self, ruleset: ScfgRuleset):
        self.s_rules = [(r, compile_s_template(r.sql_rhs))
                        for r in ruleset.shallow if r.lhs == "S"]
        self.p_rules = [(r, compile_p_template(r.sql_rhs))
                        for r in ruleset.shallow if r.lhs == "P"]

    def parse(self, query: QueryAst) -> Optional[Derivation]:
        for rule, pat in self.s_rules:
            derivation = self._try_s(rule, pat, query)
            if derivation is not None:
                return derivation
        return None

    def _try_s(self, rule: ScfgRule, pat: _SPat, query: QueryAst) -> Optional[Derivation]:
        env: dict = {}
        blocks: list[SelectBlock] = []
        if pat.kind == "plain":
            if query.set_op is not None or query.order_limit is not None:
                return None
            blocks = [query.body]
        elif pat.kind == "setop":
            if query.set_op is None or query.order_limit is not None:
                return None
            op, right = query.set_op
            if op is not pat.setop or right.set_op is not None or right.order_limit is not None:
                return None
            blocks = [query.body, right.body]
        elif pat.kind == "limit":
            ol = query.order_limit
            if query.set_op is not None or ol is None or ol.keys or ol.limit is None:
                return None
            env[pat.limit_plc] = ol.limit
            blocks = [query.body]
        else:  # order
            ol = query.order_limit
            if query.set_op is not None or ol is None or len(ol.keys) != 1:
                return None
            if (ol.limit is not None) != bool(pat.limit_plc):
                return None
            key_sel, direction = ol.keys[0]
            if not self._match_order_key(pat.order_key, key_sel, direction, env):
                return None
            if ol.limit is not None:
                env[pat.limit_plc] = ol.limit
            blocks = [query.body]

        children: dict = {}
        for slot, block in zip(pat.p_slots, blocks):
            child = self._match_p(block)
            if child is None:
                return None
            children[slot] = child
        return Derivation(tier="shallow", query=query, rule=rule, env=env,
                          children=children)

    def _match_order_key(self, pat: _OrderKeyPat, sel: SelExpr, direction: str, env: dict) -> bool:
        if not isinstance(sel.expr, ColumnExpr):
            return False
        ref = sel.expr.ref
        if pat.form == "count_star":
            if sel.agg is not AggOp.COUNT or not ref.is_star:
                return False
        elif pat.form == "agg":
            if sel.agg is None or sel.distinct or ref.is_star:
                return False
            if not _unify(env, pat.agg_plc, sel.agg):
                return False
            if not _match_colref(env, pat.table_plc, pat.col_plc, ref):
                return False
        else:
            if sel.agg is not None or ref.is_star:
                return False
            if not _match_colref(env, pat.table_plc, pat.col_plc, ref):
                return False
        return _unify(env, pat.dir_plc, direction)

    def _match_p(self, block: SelectBlock) -> Optional[Derivation]:
        for rule, pat in self.p_rules:
            env: dict = {}
            if match_block(pat, block, env):
                children: dict = {}
                failed = False
                for plc, value in list(env.items()):
                    if isinstance(value, QueryAst):
                        sub = self.parse(value)
                        if sub is None:
                            failed = True
                            break
                        children[plc] = sub
                if failed:
                    continue
                wrapper = QueryAst(body=block)
                return Derivation(tier="shallow", query=wrapper, rule=rule,
                                  env=env, children=children, block_rule=rule)
        return None


_matcher_cache: dict[int, _ShallowMatcher] = {}


def parse_under_scfg(
    ast: QueryAst, tier: str, ruleset: Optional[ScfgRuleset] = None
) -> Optional[Derivation]:
    """Parse a query under one grammar tier.

    Shallow parsing returns None when no template covers the query (the
    signal to fall back); deep parsing always succeeds and simply wraps the
    query for the compositional renderer.
    """
    ruleset = ruleset or default_scfg()
    if tier == "deep":
        return Derivation(tier="deep", query=ast)
    if tier != "shallow":
        raise ScfgError(f"unknown tier {tier!r}")
    matcher = _matcher_cache.get(id(ruleset))
    if matcher is None:
        matcher = _ShallowMatcher(ruleset)
        _matcher_cache[id(ruleset)] = matcher
    return matcher.parse(ast)


# -- reconstruction (faithfulness) ---------------------------------------------


def reconstruct_query(derivation: Derivation) -> QueryAst:
    """Rebuild the query purely from the derivation's rules and bindings;
    replaying the SQL side of every rule must reproduce the parsed input."""
    import copy as _copy

    if derivation.tier == "deep":
        return _copy.deepcopy(derivation.query)
    rule = derivation.rule
    if rule.lhs == "P":
        return QueryAst(body=_rebuild_block(derivation))
    pat = compile_s_template(rule.sql_rhs)
    blocks = [_rebuild_block(derivation.children[slot]) for slot in pat.p_slots]
    body = blocks[0]
    set_part = None
    order = None
    if pat.kind == "setop":
        set_part = (pat.setop, QueryAst(body=blocks[1]))
    elif pat.kind == "limit":
        order = OrderLimit(keys=[], limit=_copy.deepcopy(derivation.env[pat.limit_plc]))
    elif pat.kind == "order":
        key = pat.order_key
        if key.form == "count_star":
            table = body.from_clause.tables[0]
            sel = SelExpr(expr=ColumnExpr(ColumnRef(table, "*")), agg=AggOp.COUNT)
        elif key.form == "agg":
            sel = SelExpr(expr=ColumnExpr(derivation.env[key.col_plc]),
                          agg=derivation.env[key.agg_plc])
        else:
            sel = SelExpr(expr=ColumnExpr(derivation.env[key.col_plc]))
        limit = None
        if pat.limit_plc:
            limit = _copy.deepcopy(derivation.env[pat.limit_plc])
        order = OrderLimit(keys=[(sel, derivation.env[key.dir_plc])], limit=limit)
    return QueryAst(body=body, set_op=set_part, order_limit=order)


def _rebuild_block(derivation: Derivation) -> SelectBlock:
    import copy as _copy

    env = derivation.env
    pat = compile_p_template(derivation.rule.sql_rhs)
    table = env[pat.table_plc]
    if isinstance(table, ColumnRef):  # never, but keep type honest
        table = table.table

    def star_ref() -> ColumnRef:
        return ColumnRef(table=table, column="*")

    def build_proj(p: _ProjPat) -> SelExpr:
        if p.form == "star":
            return SelExpr(expr=ColumnExpr(star_ref()))
        if p.form == "count_star":
            return SelExpr(expr=ColumnExpr(star_ref()), agg=AggOp.COUNT)
        if p.form == "count_distinct":
            return SelExpr(expr=ColumnExpr(env[p.col_plc]), agg=AggOp.COUNT, distinct=True)
        if p.form == "agg":
            return SelExpr(expr=ColumnExpr(env[p.col_plc]), agg=env[p.agg_plc])
        return SelExpr(expr=ColumnExpr(env[p.col_plc]))

    def build_rhs(plc: str):
        bound = env[plc]
        if isinstance(bound, QueryAst):
            return QueryRhs(reconstruct_query(derivation.children[plc]))
        return LiteralRhs(_copy.deepcopy(bound))

    def build_pred(p: _PredPat) -> Condition:
        if p.form == "between":
            return Between(
                left=SelExpr(expr=ColumnExpr(env[p.col_plc])),
                low=_copy.deepcopy(env[p.lit_plcs[0]]),
                high=_copy.deepcopy(env[p.lit_plcs[1]]),
            )
        if p.form == "count_cmp":
            left = SelExpr(expr=ColumnExpr(star_ref()), agg=AggOp.COUNT)
        elif p.form == "agg_cmp":
            left = SelExpr(expr=ColumnExpr(env[p.col_plc]), agg=env[p.agg_plc])
        else:
            left = SelExpr(expr=ColumnExpr(env[p.col_plc]))
        return Compare(op=env[p.wops_plc], left=left, right=build_rhs(p.lit_plcs[0]))

    where = None
    if pat.where is not None:
        if pat.where.connector is None:
            where = build_pred(pat.where.preds[0])
        else:
            node = AndCond if pat.where.connector == "AND" else OrCond
            where = node(build_pred(pat.where.preds[0]), build_pred(pat.where.preds[1]))

    return SelectBlock(
        projections=[build_proj(p) for p in pat.projs],
        from_clause=FromClause(tables=[table], joins=[]),
        distinct=pat.distinct,
        where=where,
        group_by=[env[pat.group[1]]] if pat.group else [],
        having=build_pred(pat.having) if pat.having else None,
    )
