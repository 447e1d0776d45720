"""Deterministic value resolution: copied question spans -> executable literals.

Resolution looks at the column type (number, text, time), the operation
type, and the aggregation type of each literal site, then normalizes the
copied span accordingly — numeric parsing and number words, time-format
normalization to the column's dominant stored format, fuzzy search over
column content for text equality, LIKE wrapping, and documented defaults
when nothing was copied. Every changed value records provenance so the
explainer can state the change.
"""

from __future__ import annotations

import copy as _copy
import re
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Iterable, Optional, Sequence

from .catalog import Affinity, ColumnDef, SchemaCatalog
from .sqlast import (
    AggOp,
    ColumnRef,
    Literal,
    LiteralKind,
    LiteralSite,
    QueryAst,
    iter_literals,
)

SIMILARITY_THRESHOLD = 0.75
PREFIX_BONUS = 0.1
INITIALISM_SCORE = 0.9


class ValueResolutionError(ValueError):
    pass


class ResolutionMethod(str, Enum):
    VERBATIM = "verbatim"
    NUMERIC = "numeric_normalization"
    NUMBER_WORD = "number_word"
    TIME = "time_normalization"
    CONTENT_FUZZY = "content_fuzzy_match"
    DEFAULT_YES = "default_binary_yes"
    DEFAULT_MOST_FREQUENT = "default_most_frequent"
    LIKE_PATTERN = "like_pattern"


@dataclass
class ValueResolution:
    literal_site: str               # path string locating the literal in the AST
    copied_span: Optional[str]      # question surface, None when nothing was copied
    span_range: Optional[tuple[int, int]]
    resolved: str | int | float
    method: ResolutionMethod
    matched_column: Optional[ColumnRef]
    via_term_map: bool = False

    def display_value(self) -> str:
        """Human form of the resolved value: integral floats lose the
        trailing .0, everything else is str()."""
        v = self.resolved
        if isinstance(v, float) and v.is_integer():
            return str(int(v))
        return str(v)

    def sql_raw(self) -> str:
        """Raw text of the resolved value as it appears in executable SQL."""
        v = self.resolved
        if isinstance(v, float):
            return repr(v)
        return str(v)

    @property
    def changed(self) -> bool:
        """True when the executable value differs from the copied surface."""
        return self.copied_span is None or self.sql_raw() != self.copied_span


# -- string similarity -------------------------------------------------------

_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


def _normalize(text: str) -> str:
    text = _PUNCT_RE.sub(" ", text.casefold())
    return " ".join(text.split())


def _levenshtein(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        row = [i]
        for j, cb in enumerate(b, 1):
            row.append(min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = row
    return prev[-1]


def similarity(span: str, candidate: str) -> float:
    """Normalized Levenshtein similarity with a prefix-equality bonus and an
    initialism rule; both sides are casefolded, punctuation-stripped, and
    whitespace-collapsed first."""
    a, b = _normalize(span), _normalize(candidate)
    if not a or not b:
        return 1.0 if a == b else 0.0
    dist = _levenshtein(a, b)
    score = 1.0 - dist / max(len(a), len(b))
    if a != b and (a.startswith(b) or b.startswith(a)):
        score = min(1.0, score + PREFIX_BONUS)
    initials = "".join(w[0] for w in a.split())
    if initials and initials == b.replace(" ", ""):
        score = max(score, INITIALISM_SCORE)
    return score


def fuzzy_match(
    span: str, candidates: Sequence[str], threshold: float = SIMILARITY_THRESHOLD
) -> Optional[tuple[str, float]]:
    """Best candidate by similarity, or None below the threshold.

    Ties keep the earliest candidate; catalogs order values most frequent
    first, so that is the documented frequency-then-lexicographic rule.
    """
    best: Optional[str] = None
    best_score = 0.0
    for cand in candidates:
        score = similarity(span, cand)
        if score > best_score + 1e-12:
            best, best_score = cand, score
    if best is None or best_score < threshold:
        return None
    return best, best_score


# -- number words -------------------------------------------------------------

_UNITS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
]
_TENS = {"thirty": 30, "forty": 40, "fifty": 50, "sixty": 60, "seventy": 70,
         "eighty": 80, "ninety": 90, "hundred": 100}
_ORDINAL_UNITS = [
    None, "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth", "twentieth",
]
_ORDINAL_TENS = {"thirtieth": 30, "fortieth": 40, "fiftieth": 50, "sixtieth": 60,
                 "seventieth": 70, "eightieth": 80, "ninetieth": 90, "hundredth": 100}

_NUMBER_WORDS: dict[str, int] = {}
for _i, _w in enumerate(_UNITS):
    _NUMBER_WORDS[_w] = _i
for _w, _v in _TENS.items():
    _NUMBER_WORDS[_w] = _v
for _i, _w in enumerate(_ORDINAL_UNITS):
    if _w:
        _NUMBER_WORDS[_w] = _i
for _w, _v in _ORDINAL_TENS.items():
    _NUMBER_WORDS[_w] = _v


def words_to_number(text: str) -> Optional[int]:
    """`one`..`twenty`, tens up to `hundred`, and their ordinal forms."""
    return _NUMBER_WORDS.get(_normalize(text))


def _parse_numeral(text: str) -> Optional[float]:
    cleaned = text.strip().replace(",", "")
    try:
        return float(cleaned)
    except ValueError:
        return None


# -- time normalization ---------------------------------------------------------

_TIME_PATTERNS: list[tuple[str, re.Pattern]] = [
    ("%Y-%m-%d", re.compile(r"^\d{4}-\d{2}-\d{2}$")),
    ("%Y/%m/%d", re.compile(r"^\d{4}/\d{2}/\d{2}$")),
    ("%m/%d/%Y", re.compile(r"^\d{1,2}/\d{1,2}/\d{4}$")),
    ("%Y-%m-%d %H:%M:%S", re.compile(r"^\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}$")),
    ("%Y", re.compile(r"^\d{4}$")),
]

_SPAN_TIME_FORMATS = [
    "%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%d/%m/%Y",
    "%B %d, %Y", "%B %d %Y", "%d %B %Y", "%B %Y", "%Y",
]


def _modal_time_format(values: Sequence[str]) -> Optional[str]:
    counts: dict[str, int] = {}
    for v in values:
        for fmt, pattern in _TIME_PATTERNS:
            if pattern.match(v.strip()):
                counts[fmt] = counts.get(fmt, 0) + 1
                break
    if not counts:
        return None
    return max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]


def _parse_time_span(span: str, month_first: bool) -> Optional[datetime]:
    text = span.strip()
    formats = list(_SPAN_TIME_FORMATS)
    if not month_first:
        formats.remove("%m/%d/%Y")
        formats.insert(formats.index("%d/%m/%Y"), "%m/%d/%Y")
        formats.remove("%d/%m/%Y")
        formats.insert(2, "%d/%m/%Y")
    for fmt in formats:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    return None


# -- term maps --------------------------------------------------------------------


@dataclass(frozen=True)
class TermMapEntry:
    column: ColumnRef
    term: str
    value: str


def load_term_map(path: str) -> list[TermMapEntry]:
    """Term-map file: ``table.column<TAB>term<TAB>value`` lines, UTF-8."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueResolutionError(f"{path}:{line_no}: expected 3 tab-separated fields")
            colref, term, value = parts
            if "." not in colref:
                raise ValueResolutionError(f"{path}:{line_no}: column must be table.column")
            table, column = colref.rsplit(".", 1)
            entries.append(TermMapEntry(ColumnRef(table, column), term, value))
    return entries


def validate_term_map(entries: Iterable[TermMapEntry], catalog: SchemaCatalog) -> None:
    for entry in entries:
        try:
            catalog.column(entry.column.table, entry.column.column)
        except KeyError:
            raise ValueResolutionError(
                f"term map references unknown column {entry.column}"
            ) from None


# -- resolution --------------------------------------------------------------------


class _Resolver:
    def __init__(
        self,
        catalog: SchemaCatalog,
        term_map: Sequence[TermMapEntry],
        month_first: bool,
    ):
        self.catalog = catalog
        self.month_first = month_first
        self.terms: dict[tuple[str, str, str], str] = {}
        for entry in term_map:
            key = (entry.column.table.lower(), entry.column.column.lower(),
                   entry.term.casefold())
            self.terms[key] = entry.value
        self.resolutions: list[ValueResolution] = []

    def resolve_literal(self, literal: Literal, site: LiteralSite, path: str) -> None:
        span = literal.raw if literal.raw != "" else None
        column = site.column if (site.column and not site.column.is_star) else None
        coldef = self.catalog.column(column.table, column.column) if column else None
        wants_integer = site.agg is AggOp.COUNT or site.role == "limit"
        is_between = site.role in ("between_low", "between_high")

        via_map = False
        if span is None:
            resolved, method = self._default_value(coldef, site, path)
        elif site.op is not None and site.op.value in ("LIKE", "NOT LIKE"):
            resolved, method = self._like_pattern(span)
        elif wants_integer or (coldef is not None and coldef.affinity is Affinity.NUMBER):
            resolved, method, via_map = self._numeric(span, column, coldef, wants_integer, path)
        elif coldef is not None and coldef.affinity is Affinity.TIME:
            resolved, method, via_map = self._time(span, column, coldef)
        elif is_between:
            resolved, method, via_map = self._numeric(span, column, coldef, False, path)
        else:
            resolved, method, via_map = self._text(span, column, coldef)

        resolution = ValueResolution(
            literal_site=path,
            copied_span=span,
            span_range=literal.span,
            resolved=resolved,
            method=method,
            matched_column=column,
            via_term_map=via_map,
        )
        self.resolutions.append(resolution)
        literal.raw = resolution.sql_raw()
        literal.kind = (
            LiteralKind.NUMBER if isinstance(resolved, (int, float)) else _text_kind(coldef)
        )

    def _term_hit(self, span: Optional[str], column: Optional[ColumnRef]) -> Optional[str]:
        if span is None or column is None:
            return None
        return self.terms.get(
            (column.table.lower(), column.column.lower(), span.casefold())
        )

    def _default_value(self, coldef, site, path):
        if site.agg is AggOp.COUNT or site.role == "limit":
            # bare "more than one", "at least some": compare counts against 1
            return 1, ResolutionMethod.DEFAULT_MOST_FREQUENT
        if coldef is None or not coldef.distinct_values:
            raise ValueResolutionError(
                f"{path}: no copied span and the column has no values to default to"
            )
        lowered = {v.casefold() for v in coldef.distinct_values}
        if lowered == {"yes", "no"}:
            stored = next(v for v in coldef.distinct_values if v.casefold() == "yes")
            return stored, ResolutionMethod.DEFAULT_YES
        return coldef.most_frequent, ResolutionMethod.DEFAULT_MOST_FREQUENT

    def _like_pattern(self, span: str):
        if "%" in span or "_" in span:
            return span, ResolutionMethod.LIKE_PATTERN
        return f"%{span}%", ResolutionMethod.LIKE_PATTERN

    def _numeric(self, span: str, column, coldef, wants_integer: bool, path: str):
        word = words_to_number(span)
        if word is not None:
            value = word if wants_integer else float(word)
            return value, ResolutionMethod.NUMBER_WORD, False
        number = _parse_numeral(span)
        if number is not None:
            if wants_integer:
                return int(number), ResolutionMethod.NUMERIC, False
            return float(number), ResolutionMethod.NUMERIC, False
        hit_text, via_map = self._content_search(span, column, coldef)
        if hit_text is not None and _parse_numeral(hit_text) is not None:
            value = _parse_numeral(hit_text)
            return (int(value) if wants_integer else value), ResolutionMethod.CONTENT_FUZZY, via_map
        raise ValueResolutionError(
            f"{path}: span {span!r} is not numeric and matches no numeric content"
        )

    def _time(self, span: str, column, coldef):
        target = _modal_time_format(coldef.distinct_values)
        if target == "%Y":
            # year columns are stored numerically; keep comparisons numeric
            word = words_to_number(span)
            if word is not None:
                return word, ResolutionMethod.NUMBER_WORD, False
            number = _parse_numeral(span)
            if number is not None:
                return int(number), ResolutionMethod.VERBATIM, False
        if span in coldef.distinct_values:
            return span, ResolutionMethod.VERBATIM, False
        term = self._term_hit(span, column)
        if term is not None:
            return term, ResolutionMethod.CONTENT_FUZZY, True
        parsed = _parse_time_span(span, self.month_first)
        if target is not None and parsed is not None:
            rendered = parsed.strftime(target)
            method = ResolutionMethod.TIME if rendered != span else ResolutionMethod.VERBATIM
            return rendered, method, False
        hit = fuzzy_match(span, coldef.distinct_values)
        if hit is not None:
            return hit[0], ResolutionMethod.CONTENT_FUZZY, False
        return span, ResolutionMethod.VERBATIM, False

    def _text(self, span: str, column, coldef):
        if coldef is not None:
            # an exact stored value (modulo case) wins over everything
            for stored in coldef.distinct_values:
                if stored.casefold() == span.casefold():
                    return stored, ResolutionMethod.VERBATIM, False
        hit_text, via_map = self._content_search(span, column, coldef)
        if hit_text is not None:
            return hit_text, ResolutionMethod.CONTENT_FUZZY, via_map
        return span, ResolutionMethod.VERBATIM, False

    def _content_search(self, span, column, coldef) -> tuple[Optional[str], bool]:
        """Term-map hits take precedence over fuzzy content search."""
        term = self._term_hit(span, column)
        if term is not None:
            return term, True
        if coldef is not None:
            hit = fuzzy_match(span, coldef.distinct_values)
            if hit is not None:
                return hit[0], False
        return None, False


def _text_kind(coldef: Optional[ColumnDef]) -> LiteralKind:
    if coldef is not None and coldef.affinity is Affinity.TIME:
        return LiteralKind.TIME
    return LiteralKind.TEXT


def resolve_values(
    ast: QueryAst,
    catalog: SchemaCatalog,
    term_map: Sequence[TermMapEntry] = (),
    month_first: bool = True,
) -> tuple[QueryAst, list[ValueResolution]]:
    """Resolve every literal of ``ast`` into an executable value.

    Returns a new AST (input is not mutated) plus one ValueResolution per
    literal site, in linearization order. Resolution never changes the
    tree shape, only literal payloads.
    """
    validate_term_map(term_map, catalog)
    resolved_ast = _copy.deepcopy(ast)
    resolver = _Resolver(catalog, term_map, month_first)
    for index, (literal, site) in enumerate(iter_literals(resolved_ast)):
        resolver.resolve_literal(literal, site, f"literal[{index}]")
    return resolved_ast, resolver.resolutions
