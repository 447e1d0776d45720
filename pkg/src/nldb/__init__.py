"""Natural-language database interface engine.

Question -> scored SQL hypotheses -> deterministic value resolution ->
step-by-step English explanations with highlighted differences -> guarded
execution of the hypothesis a human selects.
"""

from .beam import BeamConfig, Hypothesis, beam_search, column_label_smoothing_loss
from .catalog import SchemaCatalog, content_preview, load_from_database, load_from_spider_tables
from .execution import ExecutionResult, exec_match, execute
from .explain import ExplanationDoc, compress_mentions, diff_explanations, explain
from .heuristic import heuristic_scorer
from .linker import infer_tables
from .parser import parse_sql
from .printer import print_sql
from .scfg import parse_under_scfg
from .transitions import (
    TokenizedQuestion,
    actions_to_ast,
    ast_to_actions,
    tag_value_span,
    tokenize,
)
from .values import fuzzy_match, resolve_values

__version__ = "0.1.0"
