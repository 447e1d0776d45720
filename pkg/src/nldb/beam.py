"""Scored SQL hypotheses: weighted beam search over a pluggable step scorer,
precomputed hypothesis files, remote parser sources, and scoring utilities.

The search itself is model-agnostic: a StepScorer maps (question, catalog,
action prefix) to normalized log-probabilities over the legal next actions.
Ranking weighs column-selection steps up and value-copy steps down, which
is where cross-domain parsers go wrong most.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from .catalog import SchemaCatalog
from .grammar import (
    Action,
    ActionKind,
    Grammar,
    DecodeState,
    advance,
    default_grammar,
    initial_state,
    legal_actions,
)
from .linker import JoinInferenceError
from .printer import print_sql
from .sqlast import QueryAst
from .transitions import (
    ActionSequenceError,
    TokenizedQuestion,
    actions_to_ast,
    format_actions,
    parse_actions,
)

LOGP_TOLERANCE = 1e-6


class ScorerContractError(ValueError):
    """A scorer returned an unnormalized or out-of-domain distribution."""


class BeamSearchError(RuntimeError):
    pass


class StepScorer(Protocol):
    def __call__(
        self,
        question: TokenizedQuestion,
        catalog: SchemaCatalog,
        prefix: Sequence[Action],
        legal: Sequence[Action],
    ) -> dict[Action, float]:
        """Log-probability for every legal next action (and nothing else)."""
        ...


@dataclass
class BeamConfig:
    beam_size: int = 5
    alpha: float = 3.0        # weight on column-selection steps
    beta: float = 0.1         # weight on value-copy steps
    max_steps: int = 200
    rerank_only: bool = False # weights applied after search instead of during

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError("beam_size must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def step_weight(action: Action, config: BeamConfig) -> float:
    if action.kind is ActionKind.SELECT_COLUMN:
        return config.alpha
    if action.kind in (ActionKind.COPY_TOKEN, ActionKind.COPY_STOP):
        return config.beta
    return 1.0


@dataclass
class Hypothesis:
    actions: list[Action]
    step_logps: list[float]
    raw_score: float
    weighted_score: float
    ast: Optional[QueryAst] = None
    sql: str = ""
    resolved_values: list = field(default_factory=list)
    valid: bool = True
    validity_reason: Optional[str] = None

    def serialized(self, catalog: SchemaCatalog) -> list[str]:
        return format_actions(self.actions, catalog)


def _weighted_sum(actions: Sequence[Action], logps: Sequence[float], config: BeamConfig) -> float:
    return sum(step_weight(a, config) * lp for a, lp in zip(actions, logps))


def action_key(action: Action) -> tuple[str, int]:
    return (action.kind.value, action.arg)


def sequence_key(actions: Sequence[Action]) -> tuple[tuple[str, int], ...]:
    return tuple(action_key(a) for a in actions)


def _check_scorer_output(legal: Sequence[Action], scored: dict[Action, float]) -> None:
    extra = set(scored) - set(legal)
    if extra:
        names = sorted(repr(a) for a in extra)[:3]
        raise ScorerContractError(f"scorer produced illegal actions: {names}")
    missing = set(legal) - set(scored)
    if missing:
        names = sorted(repr(a) for a in missing)[:3]
        raise ScorerContractError(f"scorer left legal actions unscored: {names}")
    total = math.log(sum(math.exp(lp) for lp in scored.values()) or 1e-300)
    if total > LOGP_TOLERANCE:
        raise ScorerContractError(f"scorer log-probs sum to exp({total:.3g}) > 1")


@dataclass
class _Partial:
    actions: tuple[Action, ...]
    logps: tuple[float, ...]
    state: DecodeState
    raw: float
    weighted: float


def _sort_key(item: _Partial, config: BeamConfig):
    rank = item.raw if config.rerank_only else item.weighted
    return (-rank, -item.raw, sequence_key(item.actions))


def beam_search(
    question: TokenizedQuestion,
    catalog: SchemaCatalog,
    scorer: StepScorer,
    config: BeamConfig = BeamConfig(),
    grammar: Optional[Grammar] = None,
) -> list[Hypothesis]:
    """Weighted beam search; hypotheses returned by descending weighted score.

    The ranking score of a (partial or complete) sequence is the weighted
    sum of per-step log-probabilities; ties break by raw score, then by the
    lexicographic action serialization. Completed hypotheses carry their
    rebuilt AST and printed SQL.
    """
    grammar = grammar or default_grammar()
    n_cols = catalog.column_count
    n_toks = len(question.tokens)

    # completed sequences retire without consuming a beam slot, so longer
    # structures (joins, subqueries) keep exploring next to early finishers
    beam: list[_Partial] = [
        _Partial((), (), initial_state(grammar), 0.0, 0.0)
    ]
    done: list[_Partial] = []
    for _ in range(config.max_steps):
        if not beam:
            break
        pool: list[_Partial] = []
        for item in beam:
            legal = legal_actions(item.state, grammar, n_cols, n_toks)
            if not legal:
                done.append(item)
                continue
            scored = scorer(question, catalog, item.actions, legal)
            _check_scorer_output(legal, scored)
            for action, logp in scored.items():
                nxt = advance(item.state, action, grammar, n_cols, n_toks)
                pool.append(
                    _Partial(
                        actions=item.actions + (action,),
                        logps=item.logps + (logp,),
                        state=nxt,
                        raw=item.raw + logp,
                        weighted=item.weighted + step_weight(action, config) * logp,
                    )
                )
        if not pool:
            break
        pool.sort(key=lambda p: _sort_key(p, config))
        beam = []
        for item in pool:
            if item.state.finished:
                done.append(item)
            elif len(beam) < config.beam_size:
                beam.append(item)
            if len(beam) >= config.beam_size:
                break
        if len(done) >= config.beam_size and beam:
            # scores only decrease with length; stop once no active partial
            # can still enter the current top set
            floor = sorted(
                (d.raw if config.rerank_only else d.weighted) for d in done
            )[-config.beam_size]
            best_active = max(
                i.raw if config.rerank_only else i.weighted for i in beam
            )
            if best_active <= floor:
                break

    if not done:
        raise BeamSearchError(
            f"no hypothesis completed within max_steps={config.max_steps}"
        )
    done.sort(key=lambda p: (-p.weighted, -p.raw, sequence_key(p.actions)))
    out = []
    for item in done[: config.beam_size]:
        out.append(_finish(item, catalog, question, config))
    return out


def _finish(
    item: _Partial, catalog: SchemaCatalog, question: TokenizedQuestion, config: BeamConfig
) -> Hypothesis:
    hyp = Hypothesis(
        actions=list(item.actions),
        step_logps=list(item.logps),
        raw_score=item.raw,
        weighted_score=_weighted_sum(item.actions, item.logps, config),
    )
    try:
        hyp.ast = actions_to_ast(item.actions, catalog, question)
        hyp.sql = print_sql(hyp.ast)
    except (ActionSequenceError, JoinInferenceError, ValueError) as exc:
        hyp.valid = False
        hyp.validity_reason = str(exc)
    return hyp


# -- label smoothing -----------------------------------------------------------


def column_label_smoothing_loss(
    logp: Sequence[float], gold: int, epsilon: float
) -> float:
    """Smoothed negative log-likelihood for a column-selection step.

    ``logp`` is a normalized log-distribution over the K columns of a
    schema; the loss mixes the gold column with a uniform component over
    all K columns. With epsilon=0 this is exactly cross-entropy.
    """
    k = len(logp)
    if k == 0:
        raise ValueError("empty distribution (K=0)")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    if not 0 <= gold < k:
        raise ValueError(f"gold index {gold} out of range for K={k}")
    total = math.log(sum(math.exp(lp) for lp in logp))
    if abs(total) > LOGP_TOLERANCE:
        raise ValueError(f"distribution is not normalized (logsumexp={total:.3g})")
    objective = (1.0 - epsilon) * logp[gold] + (epsilon / k) * sum(logp)
    return -objective


# -- built-in sources ------------------------------------------------------------


def uniform_scorer() -> StepScorer:
    def score(question, catalog, prefix, legal):
        lp = -math.log(len(legal))
        return {a: lp for a in legal}

    return score


def random_scorer(seed: int) -> StepScorer:
    """Deterministic pseudo-random scorer; useful for search property tests."""
    import random as _random

    def score(question, catalog, prefix, legal):
        rng = _random.Random(f"{seed}|{sequence_key(prefix)}")
        weights = [rng.random() + 1e-9 for _ in legal]
        total = sum(weights)
        return {a: math.log(w / total) for a, w in zip(legal, weights)}

    return score


def load_beam_file(
    path: str,
    catalog: SchemaCatalog,
    question: TokenizedQuestion,
    config: BeamConfig = BeamConfig(),
    grammar: Optional[Grammar] = None,
) -> list[Hypothesis]:
    """Read precomputed hypotheses (one ``{"actions": [...], "logps": [...]}``
    JSON object per line); rows that violate the grammar automaton come back
    with ``valid=False`` and a reason instead of being dropped."""
    grammar = grammar or default_grammar()
    hyps = []
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                tokens = row["actions"]
                logps = [float(x) for x in row["logps"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{row_no}: malformed row ({exc})") from exc
            hyps.append(
                hypothesis_from_row(tokens, logps, catalog, question, config, grammar)
            )
    return hyps


def hypothesis_from_row(
    tokens: Sequence[str],
    logps: Sequence[float],
    catalog: SchemaCatalog,
    question: TokenizedQuestion,
    config: BeamConfig = BeamConfig(),
    grammar: Optional[Grammar] = None,
) -> Hypothesis:
    grammar = grammar or default_grammar()
    try:
        actions = parse_actions(tokens, catalog)
    except (ActionSequenceError, KeyError, ValueError) as exc:
        reason = "illegal column index" if "column" in str(exc).lower() else str(exc)
        return Hypothesis(
            actions=[], step_logps=list(logps), raw_score=sum(logps),
            weighted_score=sum(logps), valid=False, validity_reason=reason,
        )
    if len(logps) != len(actions):
        logps = list(logps)[: len(actions)] + [0.0] * (len(actions) - len(logps))
    hyp = Hypothesis(
        actions=actions,
        step_logps=list(logps),
        raw_score=sum(logps),
        weighted_score=_weighted_sum(actions, logps, config),
    )
    state = initial_state(grammar)
    for step, action in enumerate(actions):
        try:
            state = advance(state, action, grammar, catalog.column_count,
                            len(question.tokens), step=step)
        except ValueError as exc:
            hyp.valid = False
            hyp.validity_reason = (
                "illegal column index" if "column index" in str(exc) else str(exc)
            )
            return hyp
    if not state.finished:
        hyp.valid = False
        hyp.validity_reason = "premature end of sequence"
        return hyp
    try:
        hyp.ast = actions_to_ast(actions, catalog, question)
        hyp.sql = print_sql(hyp.ast)
    except (ActionSequenceError, JoinInferenceError, ValueError) as exc:
        hyp.valid = False
        hyp.validity_reason = str(exc)
    return hyp


def filter_and_dedupe(
    hyps: Sequence[Hypothesis],
    run_sql: Callable[[str], None],
) -> list[Hypothesis]:
    """Drop hypotheses whose SQL fails to execute (marking the reason) and
    collapse identical canonical SQL, keeping the highest-scored survivor.

    ``run_sql`` executes a query for effect and raises on failure.
    """
    survivors: dict[str, Hypothesis] = {}
    order: list[str] = []
    for hyp in hyps:
        if not hyp.valid:
            continue
        try:
            run_sql(hyp.sql)
        except Exception as exc:
            hyp.valid = False
            hyp.validity_reason = f"execution error: {exc}"
            continue
        key = hyp.sql
        if key not in survivors:
            survivors[key] = hyp
            order.append(key)
        elif hyp.weighted_score > survivors[key].weighted_score:
            survivors[key] = hyp
    out = [survivors[k] for k in order]
    out.sort(key=lambda h: -h.weighted_score)
    return out
