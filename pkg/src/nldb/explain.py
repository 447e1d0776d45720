"""Step-by-step English explanations of SQL queries.

A query is explained under the shallow grammar when one of its templates
covers it, otherwise under the deep compositional grammar, which is total.
Steps carry typed spans (schema mentions, value mentions, and — after
cross-hypothesis diffing — difference marks) so a client can highlight
without recomputing anything. Value-change sentences are appended whenever
resolution produced something different from the copied question span.
"""

from __future__ import annotations

import copy as _copy
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .catalog import SchemaCatalog
from .sqlast import (
    AggOp,
    AndCond,
    ArithExpr,
    Between,
    ColumnExpr,
    ColumnRef,
    ColumnRhs,
    CmpOp,
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
)
from .scfg import Derivation, ScfgRuleset, default_scfg, parse_under_scfg
from .transitions import R_AGG, R_ARITH, R_CMP, R_DIR, R_SET
from .values import ResolutionMethod, ValueResolution


class ExplainError(RuntimeError):
    """Deep-tier failure: a contract violation, never silent."""


@dataclass
class Span:
    start: int
    end: int
    kind: str                    # schema_mention | value_note | diff
    role: str = ""               # table | column for schema mentions
    name: str = ""               # stored schema name
    others: list[int] = field(default_factory=list)  # differing sibling ids

    def to_payload(self) -> dict:
        payload = {"start": self.start, "end": self.end, "kind": self.kind}
        if self.kind == "schema_mention":
            payload["role"] = self.role
            payload["name"] = self.name
        if self.kind == "diff":
            payload["others"] = list(self.others)
        return payload


@dataclass
class ExplainStep:
    text: str
    spans: list[Span] = field(default_factory=list)
    signature: tuple = ()

    def to_payload(self) -> dict:
        return {"text": self.text, "spans": [s.to_payload() for s in self.spans]}


@dataclass
class ExplanationDoc:
    steps: list[ExplainStep]
    tier_used: str
    value_notes: list[str] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "steps": [s.to_payload() for s in self.steps],
            "tier": self.tier_used,
            "value_notes": list(self.value_notes),
        }

    def plain_text(self) -> str:
        prefix = "step" if self.tier_used == "shallow" else "Step"
        lines = [f"{prefix} {i}: {s.text}" for i, s in enumerate(self.steps, 1)]
        if self.value_notes:
            lines.append("---------------")
            lines.extend(self.value_notes)
        return "\n".join(lines)


class _StepBuilder:
    def __init__(self):
        self.parts: list[str] = []
        self.length = 0
        self.spans: list[Span] = []

    def add(self, text: str, kind: str = "", role: str = "", name: str = "") -> None:
        if kind:
            self.spans.append(
                Span(self.length, self.length + len(text), kind, role=role, name=name)
            )
        self.parts.append(text)
        self.length += len(text)

    def text(self) -> str:
        return "".join(self.parts)


def pretty_name(name: str) -> str:
    return name.replace("_", " ").lower()


# wordings for the shallow tier; the deep tier reads its own from the rule file
_SHALLOW_AGG = {
    AggOp.AVG: "average of", AggOp.COUNT: "number of", AggOp.MAX: "maximum of",
    AggOp.MIN: "minimum of", AggOp.SUM: "sum of",
}
_SHALLOW_CMP = {
    CmpOp.EQ: "is", CmpOp.NE: "is not", CmpOp.LT: "is less than",
    CmpOp.LE: "is at most", CmpOp.GT: "is greater than", CmpOp.GE: "is at least",
    CmpOp.LIKE: "contains", CmpOp.NOT_LIKE: "does not contain",
    CmpOp.IN: "is in", CmpOp.NOT_IN: "is not in",
}
_DIR_WORD = {"asc": "ascending", "desc": "descending"}


def _literal_display(literal: Literal, op: Optional[CmpOp] = None) -> str:
    raw = literal.raw
    if op in (CmpOp.LIKE, CmpOp.NOT_LIKE):
        inner = raw
        if inner.startswith("%") and inner.endswith("%") and len(inner) >= 2:
            inner = inner[1:-1]
        return f'"{inner}"'
    if literal.kind is LiteralKind.NUMBER:
        return raw
    return f'"{raw}"'


class _Renderer:
    """Shared step assembly for both tiers."""

    def __init__(self, catalog: SchemaCatalog, ruleset: ScfgRuleset):
        self.catalog = catalog
        self.ruleset = ruleset
        self.steps: list[ExplainStep] = []
        self._deep_sub_steps: dict[int, int] = {}

    def emit(self, builder: _StepBuilder, signature: tuple) -> int:
        self.steps.append(
            ExplainStep(text=builder.text(), spans=builder.spans, signature=signature)
        )
        return len(self.steps)

    # -- shallow ---------------------------------------------------------

    def render_shallow(self, derivation: Derivation) -> int:
        rule = derivation.rule
        child_steps: dict[str, int] = {}
        for plc in sorted(derivation.children, key=_slot_order):
            child_steps[plc] = self._render_shallow_node(derivation.children[plc])
        if rule.nl_rhs == "{<P_0>}":
            return child_steps["P_0"]
        return self._emit_template(derivation, child_steps)

    def _render_shallow_node(self, derivation: Derivation) -> int:
        child_steps: dict[str, int] = {}
        for plc in sorted(derivation.children, key=_slot_order):
            child_steps[plc] = self.render_shallow(derivation.children[plc]) \
                if derivation.children[plc].rule.lhs == "S" else \
                self._render_shallow_node(derivation.children[plc])
        return self._emit_template(derivation, child_steps)

    def _emit_template(self, derivation: Derivation, child_steps: dict[str, int]) -> int:
        rule = derivation.rule
        env = derivation.env
        builder = _StepBuilder()
        pos = 0
        pattern = re.compile(r"\{<([A-Za-z]+)_(\d+)>\}")
        schema_bindings = []
        for m in pattern.finditer(rule.nl_rhs):
            builder.add(rule.nl_rhs[pos : m.start()])
            pos = m.end()
            kind, idx = m.group(1), m.group(2)
            plc = f"{kind}_{idx}"
            if kind == "P":
                builder.add(f"the results of step {child_steps[plc]}")
            elif kind == "T":
                table = self.catalog.table(env[plc]).name
                builder.add(f"{pretty_name(table)} table", kind="schema_mention",
                            role="table", name=table)
                schema_bindings.append(("T", table.lower()))
            elif kind == "C":
                ref: ColumnRef = env[plc]
                builder.add(pretty_name(ref.column), kind="schema_mention",
                            role="column", name=f"{ref.table}.{ref.column}")
                schema_bindings.append(("C", str(ref).lower()))
            elif kind == "AOps":
                builder.add(_SHALLOW_AGG[env[plc]])
            elif kind == "WOps":
                builder.add(_SHALLOW_CMP[env[plc]])
            elif kind == "Dir":
                builder.add(_DIR_WORD[env[plc]])
            elif kind == "L":
                bound = env[plc]
                if isinstance(bound, QueryAst):
                    builder.add(f"the results of step {child_steps[plc]}")
                else:
                    op = _op_for_literal(derivation, plc)
                    builder.add(_literal_display(bound, op), kind="value_note")
            else:
                builder.add(m.group())
        builder.add(rule.nl_rhs[pos:])
        signature = ("shallow", rule.rule_id, tuple(schema_bindings))
        return self.emit(builder, signature)

    # -- deep ---------------------------------------------------------------

    def deep_word(self, transition_rule_id: int) -> str:
        return self.ruleset.deep_text(transition_rule_id)

    def render_deep(self, query: QueryAst) -> int:
        for sub in _block_subqueries(query.body):
            self._deep_sub_steps[id(sub)] = self.render_deep(sub)
        body_final = self._render_deep_block(query.body)
        final = body_final
        if query.set_op is not None:
            op, right = query.set_op
            right_final = self.render_deep(right)
            builder = _StepBuilder()
            template = self.deep_word(R_SET[op])
            text = template.replace("{0}", f"the results of step {body_final}") \
                           .replace("{1}", f"the results of step {right_final}")
            builder.add(text)
            final = self.emit(builder, ("deep", "setop", op.value))
        if query.order_limit is not None:
            final = self._render_deep_order(query)
        return final

    def _render_deep_block(self, block) -> int:
        multi = len(block.from_clause.tables) > 1
        builder = _StepBuilder()
        if multi:
            builder.add("find combinations of entries in ")
            self._table_list(builder, block.from_clause.tables)
            if block.from_clause.joins:
                builder.add(" for which ")
                for i, join in enumerate(block.from_clause.joins):
                    if i:
                        builder.add(" and ")
                    self._colref(builder, join.left, qualified=True)
                    builder.add(f" {self.deep_word(32)} ")  # the equality wording
                    self._colref(builder, join.right, qualified=True)
        else:
            table = self.catalog.table(block.from_clause.tables[0]).name
            builder.add("find the entries in the ")
            builder.add(f"{pretty_name(table)} table", kind="schema_mention",
                        role="table", name=table)
        if block.where is not None:
            builder.add(" whose ")
            self._cond(builder, block.where, qualified=multi)
        builder.add(".")
        entries = self.emit(
            builder,
            ("deep", "entries", tuple(t.lower() for t in block.from_clause.tables)),
        )

        builder = _StepBuilder()
        builder.add("among these results, ")
        if block.group_by:
            builder.add("for each ")
            for i, ref in enumerate(block.group_by):
                if i:
                    builder.add(" and ")
                self._colref(builder, ref, qualified=True)
            builder.add(", ")
        if block.having is not None:
            builder.add("where ")
            self._cond(builder, block.having, qualified=True)
            builder.add(", ")
        builder.add("find ")
        if block.distinct:
            builder.add("the different values of ")
        for i, sel in enumerate(block.projections):
            if i:
                builder.add(" and " if i == len(block.projections) - 1 else ", ")
            self._sel(builder, sel, qualified=True)
        builder.add(".")
        signature = (
            "deep",
            "select",
            tuple(t.lower() for t in block.from_clause.tables),
            tuple(str(r).lower() for r in block.group_by),
        )
        self.emit(builder, signature)
        return entries + 1

    def _render_deep_order(self, query: QueryAst) -> int:
        ol = query.order_limit
        builder = _StepBuilder()
        if ol.keys:
            builder.add("sort these results by ")
            for i, (sel, direction) in enumerate(ol.keys):
                if i:
                    builder.add(", then by ")
                self._sel(builder, sel, qualified=True)
                word = self.deep_word(R_DIR[direction])
                builder.add(f" in {word} order")
            if ol.limit is not None:
                display = _literal_display(ol.limit)
                rows = "row" if display == "1" else "rows"
                builder.add(" and show the first ")
                builder.add(display, kind="value_note")
                builder.add(f" {rows}")
            builder.add(".")
        else:
            display = _literal_display(ol.limit)
            rows = "row" if display == "1" else "rows"
            builder.add("show only the first ")
            builder.add(display, kind="value_note")
            builder.add(f" {rows} of these results.")
        return self.emit(builder, ("deep", "order"))

    # -- deep fragments ----------------------------------------------------

    def _table_list(self, builder: _StepBuilder, tables: Sequence[str]) -> None:
        for i, name in enumerate(tables):
            if i:
                builder.add(" and " if i == len(tables) - 1 else ", ")
            stored = self.catalog.table(name).name
            builder.add("the ")
            builder.add(f"{pretty_name(stored)} table", kind="schema_mention",
                        role="table", name=stored)

    def _colref(self, builder: _StepBuilder, ref: ColumnRef, qualified: bool) -> None:
        if ref.is_star:
            builder.add("all entries")
            return
        builder.add(pretty_name(ref.column), kind="schema_mention", role="column",
                    name=f"{ref.table}.{ref.column}")
        if qualified and ref.table is not None:
            builder.add(" of the ")
            builder.add(f"{pretty_name(ref.table)} table", kind="schema_mention",
                        role="table", name=ref.table)

    def _sel(self, builder: _StepBuilder, sel: SelExpr, qualified: bool) -> None:
        if isinstance(sel.expr, ColumnExpr):
            ref = sel.expr.ref
            if sel.agg is not None:
                if sel.agg is AggOp.COUNT and ref.is_star:
                    builder.add("the number of records")
                    return
                builder.add(self.deep_word(R_AGG[sel.agg]) + " ")
                if sel.distinct:
                    builder.add(self.deep_word(14) + " ")
                self._colref(builder, ref, qualified)
            else:
                self._colref(builder, ref, qualified)
            return
        expr: ArithExpr = sel.expr
        if sel.agg is not None:
            builder.add(self.deep_word(R_AGG[sel.agg]) + " ")
        self._operand(builder, expr.left, qualified)
        builder.add(f" {self.deep_word(R_ARITH[expr.op])} ")
        self._operand(builder, expr.right, qualified)

    def _operand(self, builder: _StepBuilder, operand: Operand, qualified: bool) -> None:
        if operand.agg is not None:
            builder.add(self.deep_word(R_AGG[operand.agg]) + " ")
        self._colref(builder, operand.ref, qualified)

    def _cond(self, builder: _StepBuilder, cond: Condition, qualified: bool) -> None:
        if isinstance(cond, AndCond):
            self._cond(builder, cond.left, qualified)
            builder.add(" and ")
            self._cond(builder, cond.right, qualified)
        elif isinstance(cond, OrCond):
            self._cond(builder, cond.left, qualified)
            builder.add(" or ")
            self._cond(builder, cond.right, qualified)
        elif isinstance(cond, Compare):
            self._sel(builder, cond.left, qualified)
            builder.add(f" {self.deep_word(R_CMP[cond.op])} ")
            rhs = cond.right
            if isinstance(rhs, LiteralRhs):
                builder.add(_literal_display(rhs.literal, cond.op), kind="value_note")
            elif isinstance(rhs, ColumnRhs):
                self._colref(builder, rhs.ref, qualified)
            else:
                step = self._deep_sub_steps.get(id(rhs.query))
                if step is None:
                    raise ExplainError("subquery was not rendered before its reference")
                builder.add(f"the results of step {step}")
        elif isinstance(cond, Between):
            self._sel(builder, cond.left, qualified)
            builder.add(" is between ")
            builder.add(_literal_display(cond.low), kind="value_note")
            builder.add(" and ")
            builder.add(_literal_display(cond.high), kind="value_note")
        else:
            raise ExplainError(f"unknown condition node {type(cond).__name__}")

def _slot_order(plc: str) -> tuple:
    kind, idx = plc.rsplit("_", 1)
    return (0 if kind == "P" else 1, int(idx))


def _op_for_literal(derivation: Derivation, plc: str) -> Optional[CmpOp]:
    # the only op context a shallow literal can have is its predicate's WOps
    env = derivation.env
    bound = env.get(plc)
    block = derivation.query.body if derivation.rule.lhs == "P" else None
    if block is None or not isinstance(bound, Literal):
        return None
    found: list[CmpOp] = []

    def walk(cond):
        if cond is None:
            return
        if isinstance(cond, (AndCond, OrCond)):
            walk(cond.left)
            walk(cond.right)
        elif isinstance(cond, Compare):
            if isinstance(cond.right, LiteralRhs) and cond.right.literal is bound:
                found.append(cond.op)

    walk(block.where)
    walk(block.having)
    return found[0] if found else None


def _block_subqueries(block) -> list[QueryAst]:
    out: list[QueryAst] = []

    def walk(cond):
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


# -- value notes ------------------------------------------------------------


def build_value_notes(resolutions: Sequence[ValueResolution]) -> list[str]:
    notes = []
    for res in resolutions:
        if not res.changed:
            continue
        display = res.display_value()
        quoted = display if _is_plain_number(display) else f'"{display}"'
        if res.copied_span is None:
            if res.matched_column is not None:
                col = res.matched_column
                notes.append(
                    f"no value is mentioned in the question; {quoted} is used "
                    f"by default for {pretty_name(col.column)} of the "
                    f"{pretty_name(col.table)} table."
                )
            else:
                notes.append(
                    f"no value is mentioned in the question; {quoted} is used by default."
                )
        elif res.method is ResolutionMethod.LIKE_PATTERN:
            notes.append(
                f'"{res.copied_span}" in the question is used as the pattern "{res.resolved}".'
            )
        elif res.method is ResolutionMethod.CONTENT_FUZZY or (
            res.method is ResolutionMethod.VERBATIM and res.matched_column is not None
        ):
            column_name = res.matched_column.column if res.matched_column else "?"
            notes.append(
                f'"{res.copied_span}" in the question is matched to "{res.resolved}" '
                f"which appears in the column {column_name}."
            )
        else:
            notes.append(
                f'"{res.copied_span}" in the question is converted to {quoted}.'
            )
    return notes


def _is_plain_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


# -- entry point ---------------------------------------------------------------


def explain(
    ast: QueryAst,
    resolutions: Sequence[ValueResolution],
    catalog: SchemaCatalog,
    ruleset: Optional[ScfgRuleset] = None,
) -> ExplanationDoc:
    """Explain a (resolved) query: shallow grammar when it fits, deep
    otherwise. Value-change sentences are appended per differing resolution."""
    ruleset = ruleset or default_scfg()
    renderer = _Renderer(catalog, ruleset)
    derivation = parse_under_scfg(ast, "shallow", ruleset)
    if derivation is not None:
        tier = "shallow"
        renderer.render_shallow(derivation)
    else:
        tier = "deep"
        try:
            renderer.render_deep(ast)
        except ExplainError:
            raise
        except Exception as exc:  # deep must never fail silently
            raise ExplainError(f"deep explanation failed: {exc}") from exc
    return ExplanationDoc(
        steps=renderer.steps,
        tier_used=tier,
        value_notes=build_value_notes(resolutions),
    )


# -- cross-hypothesis diffing -----------------------------------------------------


_TOKEN_RE = re.compile(r"\S+")


def _lcs_pairs(a: list[tuple], b: list[tuple]) -> dict[int, int]:
    n, m = len(a), len(b)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                dp[i][j] = dp[i + 1][j + 1] + 1
            else:
                dp[i][j] = max(dp[i + 1][j], dp[i][j + 1])
    pairs: dict[int, int] = {}
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs[i] = j
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def diff_explanations(docs: Sequence[ExplanationDoc]) -> list[ExplanationDoc]:
    """Mark, per document, the parts absent from at least one sibling.

    Steps align across documents by longest common subsequence over step
    signatures; aligned steps diff token by token (multiset), unaligned
    steps are marked whole. A single document comes back unmarked.
    """
    out = [_copy.deepcopy(doc) for doc in docs]
    if len(docs) <= 1:
        return out
    signatures = [[s.signature for s in doc.steps] for doc in docs]
    for i, doc in enumerate(out):
        marks: list[dict[int, set[int]]] = [dict() for _ in doc.steps]
        whole: list[set[int]] = [set() for _ in doc.steps]
        for j, other in enumerate(docs):
            if j == i:
                continue
            pairs = _lcs_pairs(signatures[i], signatures[j])
            for k, step in enumerate(doc.steps):
                if k not in pairs:
                    whole[k].add(j)
                    continue
                partner = other.steps[pairs[k]]
                partner_counts: dict[str, int] = {}
                for tok in _TOKEN_RE.findall(partner.text):
                    partner_counts[tok] = partner_counts.get(tok, 0) + 1
                seen: dict[str, int] = {}
                for t_idx, m in enumerate(_TOKEN_RE.finditer(step.text)):
                    tok = m.group()
                    seen[tok] = seen.get(tok, 0) + 1
                    if seen[tok] > partner_counts.get(tok, 0):
                        marks[k].setdefault(t_idx, set()).add(j)
        for k, step in enumerate(doc.steps):
            if whole[k]:
                step.spans.append(
                    Span(0, len(step.text), "diff", others=sorted(whole[k]))
                )
            token_matches = list(_TOKEN_RE.finditer(step.text))
            for t_idx, others in sorted(marks[k].items()):
                m = token_matches[t_idx]
                step.spans.append(
                    Span(m.start(), m.end(), "diff", others=sorted(others))
                )
    return out


# -- mention compression ---------------------------------------------------------


_QUALIFIER_RE = re.compile(r" of the ([a-z0-9_ ]+?) table")


def compress_mentions(doc: ExplanationDoc, catalog: SchemaCatalog) -> ExplanationDoc:
    """Drop repeated "of the X table" qualifiers within a step when a single
    table is in scope and no mentioned column name is shared across the
    document's tables (the ambiguity guard)."""
    doc = _copy.deepcopy(doc)
    scope_tables: set[str] = set()
    for step in doc.steps:
        for span in step.spans:
            if span.kind == "schema_mention" and span.role == "table":
                scope_tables.add(span.name.lower())
    if len(scope_tables) > 1 and _shared_column_names(scope_tables, catalog):
        return doc
    for step in doc.steps:
        qualifiers = list(_QUALIFIER_RE.finditer(step.text))
        tables = {m.group(1) for m in qualifiers}
        if len(tables) != 1 or len(qualifiers) < 2:
            continue
        removals = [(m.start(), m.end()) for m in qualifiers[1:]]
        step.text, step.spans = _remove_ranges(step.text, step.spans, removals)
    return doc


def _shared_column_names(scope_tables: set[str], catalog: SchemaCatalog) -> bool:
    seen: dict[str, str] = {}
    for table in catalog.tables:
        if table.name.lower() not in scope_tables:
            continue
        for col in table.columns:
            owner = seen.get(col.name.lower())
            if owner is not None and owner != table.name.lower():
                return True
            seen[col.name.lower()] = table.name.lower()
    return False


def _remove_ranges(
    text: str, spans: list[Span], removals: list[tuple[int, int]]
) -> tuple[str, list[Span]]:
    new_text = text
    new_spans = spans
    for start, end in sorted(removals, reverse=True):
        new_text = new_text[:start] + new_text[end:]
        shift = end - start
        kept = []
        for span in new_spans:
            if span.start >= end:
                span.start -= shift
                span.end -= shift
                kept.append(span)
            elif span.end <= start:
                kept.append(span)
            # spans inside the removed range are dropped
        new_spans = kept
    return new_text, new_spans
