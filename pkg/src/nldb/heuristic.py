"""Keyword-driven step scorer for demo use without a trained parser.

Scores legal actions by matching question tokens against schema names,
column content, aggregate/comparison cue words, and foreign-key structure.
It is deliberately simple; its job is to produce a plausible, diverse beam
on fixture databases, not benchmark accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .catalog import Affinity, SchemaCatalog
from .grammar import Action, ActionKind, DecodeState, FrameKind, advance, default_grammar, initial_state
from .sqlast import AggOp
from .transitions import (
    R_AGG,
    R_AND,
    R_BETWEEN,
    R_CMP,
    R_COMPARE,
    R_DIR,
    R_DISTINCT,
    R_GROUP_ITEM,
    R_LIMIT,
    R_OPERAND,
    R_OPERAND_AGG,
    R_OR,
    R_ORDER,
    R_ORDER_KEY,
    R_RHS_COL,
    R_RHS_QUERY,
    R_RHS_VAL,
    R_SEL_AGG,
    R_SEL_PLAIN,
    R_SET,
    R_VAL_ARITH,
    R_VAL_COL,
    TokenizedQuestion,
)
from .values import similarity, words_to_number

_AGG_CUES = {
    AggOp.COUNT: ("how many", "number of", "count", "total number"),
    AggOp.AVG: ("average", "mean"),
    AggOp.MAX: ("maximum", "highest", "largest", "most", "oldest", "biggest", "latest"),
    AggOp.MIN: ("minimum", "lowest", "smallest", "fewest", "youngest", "earliest"),
    AggOp.SUM: ("total", "sum of", "combined"),
}

_CMP_CUES = {
    "GT": ("more than", "greater than", "older than", "higher than", "over",
           "above", "larger than", "after", "at least one"),
    "LT": ("less than", "fewer than", "younger than", "lower than", "under",
           "below", "smaller than", "before"),
    "GE": ("at least", "or more", "or older"),
    "LE": ("at most", "or less", "no more than"),
    "NE": ("not", "other than", "excluding", "except for"),
    "LIKE": ("contain", "containing", "contains", "start with", "starts with",
             "end with", "ends with", "include", "substring"),
}

_CUE_RULE = {"GT": 36, "LT": 34, "GE": 37, "LE": 35, "NE": 33, "LIKE": 38}

_WHERE_CUES = (
    "whose", "with", "that", "who", "which", "where", "than", "between",
    "equal", "named", "called", "from", "in the", "have", "has",
)

_GROUP_CUES = ("each", "per", "for every", "group")
_ORDER_CUES = ("sort", "order", "descending", "ascending", "alphabetical",
               "top", "first", "last")
_DISTINCT_CUES = ("different", "distinct", "unique")


def _pretty(name: str) -> str:
    return name.replace("_", " ").lower()


@dataclass
class _Analysis:
    lowered: str
    tokens: list[str]
    agg_scores: dict[AggOp, float]
    wants_where: bool
    wants_group: bool
    wants_order: bool
    wants_distinct: bool
    cmp_scores: dict[int, float]
    has_value_evidence: bool


class HeuristicScorer:
    """StepScorer over the default grammar driven by question keywords."""

    def __init__(self, catalog: SchemaCatalog):
        self.catalog = catalog
        self.grammar = default_grammar()
        self.flat = catalog.flat_columns()
        self._analysis_cache: dict[str, _Analysis] = {}
        # columns of content values mentioning each token are found lazily
        self._content_cache: dict[str, float] = {}

    # -- question analysis -------------------------------------------------

    def _analyze(self, question: TokenizedQuestion) -> _Analysis:
        key = question.raw
        cached = self._analysis_cache.get(key)
        if cached is not None:
            return cached
        lowered = " " + " ".join(t.surface.lower() for t in question.tokens) + " "
        tokens = [t.surface.lower() for t in question.tokens]
        agg_scores = {}
        for agg, cues in _AGG_CUES.items():
            agg_scores[agg] = sum(1.0 for cue in cues if f" {cue} " in lowered or lowered.strip().startswith(cue))
        cmp_scores = {}
        for name, cues in _CMP_CUES.items():
            hits = sum(1.0 for cue in cues if cue in lowered)
            if hits:
                cmp_scores[_CUE_RULE[name]] = hits
        has_value = any(
            t.isdigit() or words_to_number(t) is not None or (t[:1].isupper() and i > 0)
            for i, t in enumerate(t.surface for t in question.tokens)
        )
        analysis = _Analysis(
            lowered=lowered,
            tokens=tokens,
            agg_scores=agg_scores,
            wants_where=any(f" {cue} " in lowered for cue in _WHERE_CUES),
            wants_group=any(cue in lowered for cue in _GROUP_CUES),
            wants_order=any(cue in lowered for cue in _ORDER_CUES),
            wants_distinct=any(cue in lowered for cue in _DISTINCT_CUES),
            cmp_scores=cmp_scores,
            has_value_evidence=has_value,
        )
        self._analysis_cache[key] = analysis
        return analysis

    def _table_mentioned(self, table: str, analysis: _Analysis) -> float:
        pretty = _pretty(table)
        best = 0.0
        for tok in analysis.tokens:
            best = max(best, similarity(tok, pretty), similarity(tok.rstrip("s"), pretty),
                       similarity(tok, pretty + "s"))
        if pretty in analysis.lowered:
            best = max(best, 1.0)
        return best

    def _column_score(self, table: str, column: str, analysis: _Analysis) -> float:
        if column == "*":
            # stars stand in for whole tables; mentioned tables score high
            return 0.35 + 0.65 * self._table_mentioned(table, analysis)
        pretty = _pretty(column)
        score = 0.0
        if pretty in analysis.lowered:
            score = 1.0
        else:
            for tok in analysis.tokens:
                score = max(score, similarity(tok, pretty))
        coldef = self.catalog.column(table, column)
        if coldef.affinity is Affinity.TEXT:
            for tok in analysis.tokens:
                if len(tok) >= 3 and any(
                    tok == v.casefold() for v in coldef.distinct_values[:200]
                ):
                    score = max(score, 0.8)
        # small nudge toward columns of mentioned tables
        score += 0.15 * self._table_mentioned(table, analysis)
        return score

    # -- scoring -------------------------------------------------------------

    def __call__(
        self,
        question: TokenizedQuestion,
        catalog: SchemaCatalog,
        prefix: Sequence[Action],
        legal: Sequence[Action],
    ) -> dict[Action, float]:
        analysis = self._analyze(question)
        weights: dict[Action, float] = {}
        in_subquery = self._inside_subquery(prefix)
        for action in legal:
            weights[action] = max(
                self._action_weight(action, prefix, analysis, in_subquery), 1e-6
            )
        total = sum(weights.values())
        return {a: math.log(w / total) for a, w in weights.items()}

    def _inside_subquery(self, prefix: Sequence[Action]) -> bool:
        state = self._frontier(prefix)
        return state is not None and not state.finished and state.stack[0].depth > 1

    def _seen_rules(self, prefix: Sequence[Action]) -> list[int]:
        return [a.arg for a in prefix if a.kind is ActionKind.APPLY_RULE]

    def _action_weight(
        self,
        action: Action,
        prefix: Sequence[Action],
        analysis: _Analysis,
        in_subquery: bool,
    ) -> float:
        seen = self._seen_rules(prefix)
        agg_wanted = max(analysis.agg_scores.values()) > 0

        if action.kind is ActionKind.SELECT_COLUMN:
            table, column = self.flat[action.arg]
            agg_ctx = self._agg_context(prefix)
            role = self._column_role(prefix)
            if column == "*":
                mention = self._table_mentioned(table, analysis)
                if agg_ctx is AggOp.COUNT:
                    return 0.55 + 0.65 * mention
                if agg_ctx is not None or role in ("group", "pred_left", "order"):
                    return 0.01  # avg(*), GROUP BY *, WHERE * ... are junk
                return 0.15 + 0.25 * mention
            base = self._column_score(table, column, analysis)
            if agg_ctx is AggOp.COUNT:
                base *= 0.5  # counting a bare column usually means count(*)
            used = self._used_tables(prefix)
            if in_subquery and role == "projection":
                # the point of a subquery is linking out: prefer the FK column
                # of a fresh table whose partner column is already in play
                if self._fk_links_back(table, column, used):
                    base += 1.2
            elif role == "pred_left":
                if self._is_fk_column(table, column) and self._other_table_mentioned(
                    analysis, prefix
                ):
                    base += 0.6
                if table.lower() not in used:
                    base *= 0.4  # constrain selected tables, reach others via subqueries
            return 0.05 + base

        if action.kind is ActionKind.COPY_TOKEN:
            return self._copy_weight(action, prefix, analysis)
        if action.kind is ActionKind.COPY_STOP:
            copying = prefix and prefix[-1].kind is ActionKind.COPY_TOKEN
            return 1.2 if copying else 0.6

        if action.kind is ActionKind.REDUCE:
            return self._reduce_weight(prefix, analysis, seen)

        rule_id = action.arg
        if rule_id == R_SEL_AGG:
            if self._in_projection_list(prefix):
                if self._projection_done(prefix):
                    return 0.15
                if in_subquery:
                    return 0.3  # subqueries mostly project the linking column
                return 2.5 if agg_wanted else 0.15
            return 0.6  # predicate left sides and order keys aggregate sometimes
        if rule_id == R_SEL_PLAIN:
            if self._in_projection_list(prefix):
                if self._projection_done(prefix):
                    return 0.3
                if in_subquery:
                    return 2.2
                return 0.4 if agg_wanted else 2.0
            return 2.0
        if rule_id in R_AGG.values():
            agg = {v: k for k, v in R_AGG.items()}[rule_id]
            return 0.2 + 2.0 * analysis.agg_scores.get(agg, 0.0)
        if rule_id == R_DISTINCT:
            return 1.5 if analysis.wants_distinct else 0.08
        if rule_id == R_VAL_COL:
            return 3.0
        if rule_id == R_VAL_ARITH:
            return 0.03
        if rule_id in (R_OPERAND, R_OPERAND_AGG):
            return 1.0
        if rule_id in (R_AND, R_OR, R_COMPARE, R_BETWEEN):
            junk_having = (
                self._cond_context(prefix) == "having" and R_GROUP_ITEM not in seen
            )
            if junk_having:
                return 0.03  # HAVING without GROUP BY never executes
            if rule_id == R_AND:
                return 0.12
            if rule_id == R_OR:
                return 0.05
            if rule_id == R_COMPARE:
                return 2.2 if analysis.wants_where else 1.5
            return 1.0 if "between" in analysis.lowered else 0.05
        if rule_id in R_CMP.values():
            cue = analysis.cmp_scores.get(rule_id, 0.0)
            base = 0.6 if rule_id == R_CMP_EQ else 0.3
            if rule_id in (R_CMP_IN, R_CMP_NOTIN):
                base = 0.9 if self._other_table_mentioned(analysis, prefix) else 0.1
                if rule_id == R_CMP_NOTIN:
                    base *= 0.4
            return base + 1.2 * cue
        if rule_id == R_RHS_VAL:
            return 1.6 if analysis.has_value_evidence else 0.8
        if rule_id == R_RHS_COL:
            return 0.05
        if rule_id == R_RHS_QUERY:
            return 2.0 if self._other_table_mentioned(analysis, prefix) else 0.12
        if rule_id in R_SET.values():
            return 0.02
        if rule_id == R_ORDER:
            return 1.2 if analysis.wants_order else 0.06
        if rule_id == R_ORDER_KEY:
            return 1.2 if not self._order_key_done(prefix) else 0.1
        if rule_id in R_DIR.values():
            desc = rule_id == R_DIR["desc"]
            wants_desc = any(w in analysis.lowered for w in
                             ("descending", "most", "highest", "largest", "top", "latest"))
            return 1.2 if desc == wants_desc else 0.5
        if rule_id == R_LIMIT:
            wants_limit = any(w in analysis.lowered for w in ("top", "first", "last")) or \
                any(words_to_number(t) is not None for t in analysis.tokens)
            return 1.0 if wants_limit else 0.25
        if rule_id == R_GROUP_ITEM:
            return 1.4 if analysis.wants_group and not self._group_done(prefix) else 0.08
        return 1.0

    def _copy_weight(self, action: Action, prefix: Sequence[Action], analysis: _Analysis) -> float:
        token = analysis.tokens[action.arg]
        continuing = prefix and prefix[-1].kind is ActionKind.COPY_TOKEN
        if continuing:
            # continuation of a multi-token span: favour capitalized runs
            return 0.5 if token[:1].isalpha() else 0.2
        if token.replace(".", "").isdigit():
            return 3.0
        if words_to_number(token) is not None:
            return 2.0
        if token[:1].isupper():
            return 1.5
        # schema words and stop words make poor value spans
        return 0.1

    def _reduce_weight(self, prefix: Sequence[Action], analysis: _Analysis, seen: list[int]) -> float:
        state = self._frontier(prefix)
        if state is None or state.finished:
            return 1.0
        top = state.stack[0]
        if top.kind is FrameKind.LIST and top.name == "sel_expr":
            more = " and the " in analysis.lowered or ", the" in analysis.lowered
            return 0.6 if more and top.arg < 2 else 3.0
        if top.kind is FrameKind.LIST and top.name == "group_item":
            return 0.4 if analysis.wants_group and top.arg == 0 else 3.0
        if top.kind is FrameKind.LIST and top.name == "order_key":
            return 0.3 if top.arg == 0 else 3.0
        if top.kind is FrameKind.OPT and top.name == "cond":
            if self._cond_context(prefix) == "having" and R_GROUP_ITEM not in seen:
                return 4.0
            if self._inside_subquery(prefix):
                return 3.0
            where_done = R_COMPARE in seen or R_BETWEEN in seen
            if analysis.wants_where and not where_done:
                return 0.8
            return 2.5
        if top.kind is FrameKind.OPT and top.name == "set_clause":
            return 4.0
        if top.kind is FrameKind.OPT and top.name == "order_clause":
            return 0.7 if analysis.wants_order else 3.5
        if top.kind is FrameKind.OPT and top.name == "limit":
            return 2.0
        if top.kind is FrameKind.OPT and top.name == "distinct":
            return 0.4 if analysis.wants_distinct else 3.0
        if top.kind is FrameKind.OPT and top.name == "agg_distinct":
            return 0.8 if analysis.wants_distinct else 3.5
        return 2.0

    def _agg_context(self, prefix: Sequence[Action]):
        """Aggregate wrapping the column slot being filled, if any; the
        string "group" marks a GROUP BY item slot."""
        i = len(prefix) - 1
        if i < 0 or prefix[i].kind is not ActionKind.APPLY_RULE:
            return None
        agg_rules = set(R_AGG.values())
        last = prefix[i].arg
        if last == R_GROUP_ITEM:
            return "group"
        if last in agg_rules and i >= 1:
            prev = prefix[i - 1]
            if prev.kind is ActionKind.APPLY_RULE and prev.arg == R_OPERAND_AGG:
                return _AGG_BY_RULE[last]
        if last != R_VAL_COL:
            return None
        j = i - 1
        while j >= 0 and (
            prefix[j].kind is ActionKind.REDUCE
            or (prefix[j].kind is ActionKind.APPLY_RULE and prefix[j].arg == 14)
        ):
            j -= 1
        if j >= 0 and prefix[j].kind is ActionKind.APPLY_RULE and prefix[j].arg in agg_rules:
            k = j - 1
            if k >= 0 and prefix[k].kind is ActionKind.APPLY_RULE and prefix[k].arg == R_SEL_AGG:
                return _AGG_BY_RULE[prefix[j].arg]
        return None

    def _frontier(self, prefix: Sequence[Action]) -> Optional[DecodeState]:
        state = initial_state(self.grammar)
        try:
            for action in prefix:
                state = advance(state, action, self.grammar,
                                len(self.flat), 10_000)
        except ValueError:
            return None
        return state

    def _column_role(self, prefix: Sequence[Action]) -> Optional[str]:
        """What the column slot on the frontier is for, read off the frame
        right underneath it."""
        state = self._frontier(prefix)
        if state is None or state.finished or state.stack[0].kind is not FrameKind.COL:
            return None
        if len(state.stack) < 2:
            return None
        below = state.stack[1]
        if below.kind is FrameKind.EXPAND and below.name == "rhs":
            return "pred_left"
        if below.kind is FrameKind.LIST and below.name == "sel_expr":
            return "projection"
        if below.kind is FrameKind.LIST and below.name == "group_item":
            return "group"
        if below.kind is FrameKind.EXPAND and below.name == "dir":
            return "order"
        return "rhs"

    def _used_tables(self, prefix: Sequence[Action]) -> set[str]:
        used = set()
        for action in prefix:
            if action.kind is ActionKind.SELECT_COLUMN:
                used.add(self.flat[action.arg][0].lower())
        return used

    def _cond_context(self, prefix: Sequence[Action]) -> Optional[str]:
        """Whether the condition slot being decided is a WHERE or a HAVING."""
        state = self._frontier(prefix)
        if state is None or state.finished:
            return None
        top = state.stack[0]
        if not (top.kind is FrameKind.OPT and top.name == "cond"):
            return None
        for frame in state.stack[1:]:
            if frame.kind is FrameKind.LIST and frame.name == "group_item":
                return "where"
        return "having"

    def _in_projection_list(self, prefix: Sequence[Action]) -> bool:
        state = self._frontier(prefix)
        if state is None or state.finished:
            return False
        top = state.stack[0]
        return top.kind is FrameKind.LIST and top.name == "sel_expr"

    def _projection_done(self, prefix: Sequence[Action]) -> bool:
        state = self._frontier(prefix)
        if state is None:
            return False
        for frame in state.stack:
            if frame.kind is FrameKind.LIST and frame.name == "sel_expr":
                return frame.arg >= 1
        return True

    def _group_done(self, prefix: Sequence[Action]) -> bool:
        state = self._frontier(prefix)
        if state is None:
            return False
        for frame in state.stack:
            if frame.kind is FrameKind.LIST and frame.name == "group_item":
                return frame.arg >= 1
        return True

    def _order_key_done(self, prefix: Sequence[Action]) -> bool:
        state = self._frontier(prefix)
        if state is None:
            return False
        for frame in state.stack:
            if frame.kind is FrameKind.LIST and frame.name == "order_key":
                return frame.arg >= 1
        return True

    def _is_fk_column(self, table: str, column: str) -> bool:
        for src, dst in self.catalog.fk_edges():
            if (src[0].lower(), src[1].lower()) == (table.lower(), column.lower()):
                return True
            if (dst[0].lower(), dst[1].lower()) == (table.lower(), column.lower()):
                return True
        return False

    def _fk_links_back(self, table: str, column: str, used: set[str]) -> bool:
        """FK column of an unused table whose partner table is already used."""
        if table.lower() in used:
            return False
        key = (table.lower(), column.lower())
        for src, dst in self.catalog.fk_edges():
            if (src[0].lower(), src[1].lower()) == key and dst[0].lower() in used:
                return True
            if (dst[0].lower(), dst[1].lower()) == key and src[0].lower() in used:
                return True
        return False

    def _other_table_mentioned(self, analysis: _Analysis, prefix: Sequence[Action]) -> bool:
        used = set()
        for action in prefix:
            if action.kind is ActionKind.SELECT_COLUMN:
                used.add(self.flat[action.arg][0].lower())
        for table in self.catalog.tables:
            if table.name.lower() in used:
                continue
            if self._table_mentioned(table.name, analysis) >= 0.8:
                return True
        return False


R_CMP_EQ = R_CMP[next(k for k in R_CMP if k.value == "=")]
R_CMP_IN = R_CMP[next(k for k in R_CMP if k.value == "IN")]
R_CMP_NOTIN = R_CMP[next(k for k in R_CMP if k.value == "NOT IN")]
_AGG_BY_RULE = {v: k for k, v in R_AGG.items()}


def heuristic_scorer(catalog: SchemaCatalog) -> HeuristicScorer:
    return HeuristicScorer(catalog)
