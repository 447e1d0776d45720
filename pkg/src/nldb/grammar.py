"""Tree-construction grammar and its decoding automaton.

The grammar ships as a versioned text file so rule ids stay stable for
precomputed hypothesis files. The automaton tracks a frontier stack of
pending fields and answers two questions at every step: which actions are
legal, and what state follows an action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Iterable, Optional

MAX_QUERY_DEPTH = 3


class GrammarError(ValueError):
    pass


class SymKind(Enum):
    NONTERM = "nonterm"
    COL = "col"
    VAL = "val"
    MARKER = "marker"


class Card(Enum):
    ONE = ""
    OPT = "?"
    MANY = "*"
    MANY1 = "+"


@dataclass(frozen=True)
class Symbol:
    kind: SymKind
    name: str
    card: Card = Card.ONE


@dataclass(frozen=True)
class GrammarRule:
    rule_id: int
    head: str
    rhs: tuple[Symbol, ...]

    @property
    def markers(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.rhs if s.kind is SymKind.MARKER)


class Grammar:
    def __init__(self, rules: list[GrammarRule], root: str = "query"):
        ids = sorted(r.rule_id for r in rules)
        if ids != list(range(len(rules))):
            raise GrammarError("rule ids must be dense from 0")
        self.rules: dict[int, GrammarRule] = {r.rule_id: r for r in rules}
        self.by_head: dict[str, list[GrammarRule]] = {}
        for r in sorted(rules, key=lambda r: r.rule_id):
            self.by_head.setdefault(r.head, []).append(r)
        self.root = root
        for r in rules:
            for sym in r.rhs:
                if sym.kind is SymKind.NONTERM and sym.name not in self.by_head:
                    raise GrammarError(f"rule {r.rule_id}: unknown nonterminal {sym.name}")

    def rule(self, rule_id: int) -> GrammarRule:
        try:
            return self.rules[rule_id]
        except KeyError:
            raise GrammarError(f"unknown rule id {rule_id}") from None

    def rules_for(self, head: str) -> list[GrammarRule]:
        return self.by_head.get(head, [])

    def __len__(self) -> int:
        return len(self.rules)


def _parse_symbol(token: str) -> Symbol:
    card = Card.ONE
    if token.endswith(("?", "*", "+")):
        card = Card(token[-1])
        token = token[:-1]
    if token == "COL":
        return Symbol(SymKind.COL, "COL", card)
    if token == "VAL":
        return Symbol(SymKind.VAL, "VAL", card)
    if token.isupper():
        return Symbol(SymKind.MARKER, token, card)
    return Symbol(SymKind.NONTERM, token, card)


def load_grammar_text(text: str) -> Grammar:
    rules = []
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            id_part, rest = line.split("\t", 1)
            head, rhs_part = rest.split("->", 1)
        except ValueError:
            raise GrammarError(f"line {line_no}: malformed rule") from None
        symbols = tuple(_parse_symbol(tok) for tok in rhs_part.split())
        rules.append(GrammarRule(int(id_part), head.strip(), symbols))
    if not rules:
        raise GrammarError("empty grammar")
    return Grammar(rules)


_cached: Optional[Grammar] = None


def default_grammar() -> Grammar:
    global _cached
    if _cached is None:
        text = resources.files("nldb.data").joinpath("transition_grammar.txt").read_text("utf-8")
        _cached = load_grammar_text(text)
    return _cached


# -- actions ---------------------------------------------------------------


class ActionKind(Enum):
    APPLY_RULE = "AR"
    REDUCE = "RD"
    SELECT_COLUMN = "SC"
    COPY_TOKEN = "CT"
    COPY_STOP = "CS"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    arg: int = -1  # rule id, flat column index, or question token index

    def __repr__(self) -> str:
        if self.kind in (ActionKind.REDUCE, ActionKind.COPY_STOP):
            return self.kind.value
        return f"{self.kind.value}:{self.arg}"


def apply_rule(rule_id: int) -> Action:
    return Action(ActionKind.APPLY_RULE, rule_id)


def reduce_action() -> Action:
    return Action(ActionKind.REDUCE)


def select_column(index: int) -> Action:
    return Action(ActionKind.SELECT_COLUMN, index)


def copy_token(index: int) -> Action:
    return Action(ActionKind.COPY_TOKEN, index)


def copy_stop() -> Action:
    return Action(ActionKind.COPY_STOP)


# -- automaton ---------------------------------------------------------------


class FrameKind(Enum):
    EXPAND = "expand"     # mandatory nonterminal: ApplyRule only
    OPT = "opt"           # optional nonterminal: ApplyRule or Reduce
    LIST = "list"         # list field: ApplyRule to add, Reduce to close
    COL = "col"           # SelectColumn
    VAL_START = "val"     # CopyToken(any) or CopyStop
    VAL_CONT = "val+"     # CopyToken(arg+1) or CopyStop


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    name: str = ""
    arg: int = 0    # list: elements so far / VAL_CONT: last copied index
    depth: int = 1  # query-nesting depth this frame belongs to


class IllegalActionError(ValueError):
    def __init__(self, msg: str, step: int = -1, expected: Optional[list[str]] = None):
        if step >= 0:
            msg = f"step {step}: {msg}"
        if expected:
            msg += f" (expected one of: {', '.join(sorted(set(expected)))})"
        super().__init__(msg)
        self.step = step
        self.expected = expected or []


@dataclass(frozen=True)
class DecodeState:
    """Immutable automaton state: a stack of pending work frames."""

    stack: tuple[Frame, ...]

    @property
    def finished(self) -> bool:
        return not self.stack

    @property
    def depth(self) -> int:
        return self.stack[0].depth if self.stack else 1


def initial_state(grammar: Grammar) -> DecodeState:
    return DecodeState(stack=(Frame(FrameKind.EXPAND, grammar.root, depth=1),))


def _push_rhs(
    stack: tuple[Frame, ...], rule: GrammarRule, depth: int, root: str
) -> tuple[Frame, ...]:
    frames: list[Frame] = []
    for sym in rule.rhs:
        if sym.kind is SymKind.MARKER:
            continue
        # a nested query's frames live one level deeper; popping them
        # restores the enclosing depth automatically
        child_depth = depth + 1 if (sym.kind is SymKind.NONTERM and sym.name == root) else depth
        if sym.kind is SymKind.COL:
            frames.append(Frame(FrameKind.COL, depth=depth))
        elif sym.kind is SymKind.VAL:
            frames.append(Frame(FrameKind.VAL_START, depth=depth))
        elif sym.card is Card.ONE:
            frames.append(Frame(FrameKind.EXPAND, sym.name, depth=child_depth))
        elif sym.card is Card.OPT:
            frames.append(Frame(FrameKind.OPT, sym.name, depth=child_depth))
        else:
            start = 0 if sym.card is Card.MANY else -1  # -1 marks min-one pending
            frames.append(Frame(FrameKind.LIST, sym.name, start, depth=child_depth))
    return tuple(frames) + stack


def legal_actions(
    state: DecodeState, grammar: Grammar, n_columns: int, n_tokens: int
) -> list[Action]:
    """Concrete legal next actions; empty only when the state is terminal."""
    if state.finished:
        return []
    top = state.stack[0]
    if top.kind is FrameKind.COL:
        return [select_column(i) for i in range(n_columns)]
    if top.kind is FrameKind.VAL_START:
        return [copy_token(i) for i in range(n_tokens)] + [copy_stop()]
    if top.kind is FrameKind.VAL_CONT:
        nxt = top.arg + 1
        out = [copy_token(nxt)] if nxt < n_tokens else []
        return out + [copy_stop()]
    rules = grammar.rules_for(top.name)
    out = []
    for rule in rules:
        if _expands_query(rule, grammar) and top.depth >= MAX_QUERY_DEPTH:
            continue
        out.append(apply_rule(rule.rule_id))
    if top.kind is FrameKind.OPT or (top.kind is FrameKind.LIST and top.arg >= 0):
        out.append(reduce_action())
    return out


def _expands_query(rule: GrammarRule, grammar: Grammar) -> bool:
    return any(
        s.kind is SymKind.NONTERM and s.name == grammar.root for s in rule.rhs
    )


def advance(
    state: DecodeState,
    action: Action,
    grammar: Grammar,
    n_columns: int,
    n_tokens: int,
    step: int = -1,
) -> DecodeState:
    """Apply one action, raising ``IllegalActionError`` if it is not legal."""
    if state.finished:
        raise IllegalActionError("sequence continues past the terminal state", step)
    top, rest = state.stack[0], state.stack[1:]
    expected = _expected_kinds(top)

    if top.kind is FrameKind.COL:
        if action.kind is not ActionKind.SELECT_COLUMN:
            raise IllegalActionError(f"got {action!r}", step, expected)
        if not 0 <= action.arg < n_columns:
            raise IllegalActionError(f"illegal column index {action.arg}", step, expected)
        return DecodeState(rest)

    if top.kind in (FrameKind.VAL_START, FrameKind.VAL_CONT):
        if action.kind is ActionKind.COPY_STOP:
            return DecodeState(rest)
        if action.kind is not ActionKind.COPY_TOKEN:
            raise IllegalActionError(f"got {action!r}", step, expected)
        if not 0 <= action.arg < n_tokens:
            raise IllegalActionError(f"illegal token index {action.arg}", step, expected)
        if top.kind is FrameKind.VAL_CONT and action.arg != top.arg + 1:
            raise IllegalActionError(
                f"copy must continue at token {top.arg + 1}, got {action.arg}", step, expected
            )
        return DecodeState(
            (Frame(FrameKind.VAL_CONT, arg=action.arg, depth=top.depth),) + rest
        )

    # nonterminal frames
    if action.kind is ActionKind.REDUCE:
        if top.kind is FrameKind.OPT:
            return DecodeState(rest)
        if top.kind is FrameKind.LIST and top.arg >= 0:
            return DecodeState(rest)
        raise IllegalActionError("Reduce is not legal here", step, expected)
    if action.kind is not ActionKind.APPLY_RULE:
        raise IllegalActionError(f"got {action!r}", step, expected)
    rule = grammar.rule(action.arg)
    if rule.head != top.name:
        raise IllegalActionError(
            f"rule {rule.rule_id} expands {rule.head!r}, frontier wants {top.name!r}",
            step,
            expected,
        )
    if _expands_query(rule, grammar) and top.depth >= MAX_QUERY_DEPTH:
        raise IllegalActionError("subquery nesting limit reached", step, expected)
    if top.kind is FrameKind.LIST:
        count = 1 if top.arg < 0 else top.arg + 1
        rest = (Frame(FrameKind.LIST, top.name, count, depth=top.depth),) + rest
    return DecodeState(_push_rhs(rest, rule, top.depth, grammar.root))


def _expected_kinds(top: Frame) -> list[str]:
    if top.kind is FrameKind.COL:
        return ["SelectColumn"]
    if top.kind is FrameKind.VAL_START:
        return ["CopyToken", "CopyStop"]
    if top.kind is FrameKind.VAL_CONT:
        return ["CopyToken(next)", "CopyStop"]
    if top.kind is FrameKind.OPT:
        return ["ApplyRule", "Reduce"]
    if top.kind is FrameKind.LIST:
        return ["ApplyRule", "Reduce"]
    return ["ApplyRule"]


def replay(
    actions: Iterable[Action],
    grammar: Grammar,
    n_columns: int,
    n_tokens: int,
) -> DecodeState:
    state = initial_state(grammar)
    for step, action in enumerate(actions):
        state = advance(state, action, grammar, n_columns, n_tokens, step=step)
    return state
