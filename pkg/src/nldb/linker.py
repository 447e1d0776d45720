"""Join-path inference: rebuild a FROM clause from the columns a query uses.

Tables are never predicted directly; the minimal connected subgraph of the
foreign-key graph covering all owning tables determines both the table set
and the join conditions. Ties are broken deterministically so the same
column set always yields the same clause.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .catalog import SchemaCatalog
from .sqlast import ColumnRef, FromClause, JoinCond


class JoinInferenceError(ValueError):
    def __init__(self, msg: str, components: list[list[str]] | None = None):
        super().__init__(msg)
        self.components = components or []


def infer_tables(columns: Iterable[ColumnRef], catalog: SchemaCatalog) -> FromClause:
    """Minimal FK-connected FROM clause covering every owning table.

    Deterministic tie-break: fewest tables, then the lexicographically
    smallest sorted table-name sequence. Join conditions are the FK edges of
    a canonical spanning tree of the chosen subgraph. Raises
    ``JoinInferenceError`` when the owners are not FK-connected, reporting
    the disconnected partition.
    """
    owners: list[str] = []
    seen = set()
    for ref in columns:
        if ref.table is None:
            continue
        name = catalog.table(ref.table).name
        if name.lower() not in seen:
            seen.add(name.lower())
            owners.append(name)
    if not owners:
        raise JoinInferenceError("no owning tables: column set is empty")

    order = {t.name: i for i, t in enumerate(catalog.tables)}
    owners.sort(key=lambda n: order[n])
    if len(owners) == 1:
        return FromClause(tables=owners, joins=[])

    adj: dict[str, set[str]] = {t.name: set() for t in catalog.tables}
    edges: dict[frozenset[str], list[tuple[tuple[str, str], tuple[str, str]]]] = {}
    for src, dst in catalog.fk_edges():
        a, b = src[0], dst[0]
        if a == b:
            continue
        adj[a].add(b)
        adj[b].add(a)
        edges.setdefault(frozenset((a, b)), []).append((src, dst))

    chosen = _minimal_connected_superset(owners, adj, order)
    if chosen is None:
        components = _partition(owners, adj)
        raise JoinInferenceError(
            "tables are not connected in the foreign-key graph: "
            + " | ".join(",".join(c) for c in components),
            components=components,
        )

    ranked = sorted(chosen, key=lambda n: order[n])
    joins: list[JoinCond] = []
    placed = [ranked[0]]
    remaining = ranked[1:]
    while remaining:
        # attach the first remaining table adjacent to an already placed one;
        # the placement order becomes the FROM order so every JOIN chains
        for i, cand in enumerate(remaining):
            anchors = [p for p in placed if cand in adj[p]]
            if anchors:
                anchor = anchors[0]
                key = frozenset((anchor, cand))
                src, dst = sorted(
                    edges[key], key=lambda e: (e[0][0], e[0][1], e[1][0], e[1][1])
                )[0]
                if src[0] == anchor:
                    joins.append(
                        JoinCond(ColumnRef(src[0], src[1]), ColumnRef(dst[0], dst[1]))
                    )
                else:
                    joins.append(
                        JoinCond(ColumnRef(dst[0], dst[1]), ColumnRef(src[0], src[1]))
                    )
                placed.append(cand)
                del remaining[i]
                break
        else:  # pragma: no cover - chosen set is connected by construction
            raise JoinInferenceError("internal: chosen table set not connected")
    return FromClause(tables=placed, joins=joins)


def _minimal_connected_superset(
    owners: Sequence[str], adj: dict[str, set[str]], order: dict[str, int]
) -> set[str] | None:
    """Smallest table set containing all owners that is connected in the FK
    graph; exhaustive over extra tables (schemas are small)."""
    pool = [t for t in sorted(adj, key=lambda n: order[n]) if t not in owners]
    base = set(owners)
    max_extra = min(len(pool), max(2, len(owners)))
    for extra in range(0, max_extra + 1):
        best: set[str] | None = None
        best_key: tuple | None = None
        for combo in combinations(pool, extra):
            cand = base | set(combo)
            if _connected(cand, adj):
                key = tuple(sorted(cand))
                if best_key is None or key < best_key:
                    best, best_key = cand, key
        if best is not None:
            return best
    return None


def _connected(tables: set[str], adj: dict[str, set[str]]) -> bool:
    start = next(iter(tables))
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adj[stack.pop()] & tables:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen == tables


def _partition(owners: Sequence[str], adj: dict[str, set[str]]) -> list[list[str]]:
    """Group owners by connected component of the full FK graph."""
    comps: list[list[str]] = []
    assigned: dict[str, int] = {}
    for owner in owners:
        if owner in assigned:
            continue
        seen = {owner}
        stack = [owner]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        idx = len(comps)
        comps.append([])
        for member in owners:
            if member in seen:
                assigned[member] = idx
    for owner in owners:
        comps[assigned[owner]].append(owner)
    return [c for c in comps if c]
