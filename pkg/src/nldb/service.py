"""HTTP service: database browsing, question -> explained hypotheses, and
execution of a selected hypothesis.

Catalogs are cached per database file and refreshed when the file changes,
so databases dropped into the configured directory appear on the next
request. Hypothesis sources are pluggable per database: the built-in
keyword scorer, precomputed beam files, or a remote parser endpoint.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import httpx
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .beam import BeamConfig, Hypothesis, beam_search, filter_and_dedupe, hypothesis_from_row
from .catalog import CatalogError, SchemaCatalog, content_preview, load_from_database
from .execution import (
    ExecutionError,
    ExecutionTimeout,
    ReadOnlyViolation,
    execute,
)
from .explain import diff_explanations, explain
from .heuristic import heuristic_scorer
from .printer import print_sql
from .transitions import tokenize
from .values import ValueResolutionError, load_term_map, resolve_values

DEFAULT_REMOTE_TIMEOUT = 5.0


@dataclass
class ServiceConfig:
    database_dir: Path
    beam: BeamConfig = field(default_factory=BeamConfig)
    sources: dict = field(default_factory=dict)      # db_id or "default" -> spec
    term_maps: dict = field(default_factory=dict)    # db_id -> path
    row_cap: int = 10_000
    exec_timeout: float = 5.0
    month_first: bool = True


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    beam_raw = raw.get("beam", {})
    beam = BeamConfig(
        beam_size=int(beam_raw.get("size", 5)),
        alpha=float(beam_raw.get("alpha", 3.0)),
        beta=float(beam_raw.get("beta", 0.1)),
        max_steps=int(beam_raw.get("max_steps", 200)),
        rerank_only=bool(beam_raw.get("rerank_only", False)),
    )
    term_maps = {
        db: str((base / p)) for db, p in raw.get("term_maps", {}).items()
    }
    return ServiceConfig(
        database_dir=(base / raw["database_dir"]).resolve(),
        beam=beam,
        sources=raw.get("sources", {"default": "heuristic"}),
        term_maps=term_maps,
        row_cap=int(raw.get("row_cap", 10_000)),
        exec_timeout=float(raw.get("exec_timeout", 5.0)),
        month_first=bool(raw.get("month_first", True)),
    )


class _Registry:
    """Catalog cache keyed by file path and modification time."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._catalogs: dict[str, tuple[float, SchemaCatalog]] = {}
        self._term_maps: dict[str, tuple[float, list]] = {}
        self._scorers: dict[str, object] = {}

    def database_paths(self) -> dict[str, Path]:
        out: dict[str, Path] = {}
        directory = self.config.database_dir
        if not directory.is_dir():
            return out
        for path in sorted(directory.iterdir()):
            if path.suffix in (".sqlite", ".db"):
                out[path.stem] = path
        return out

    def catalog(self, db_id: str) -> tuple[SchemaCatalog, Path]:
        paths = self.database_paths()
        if db_id not in paths:
            raise HTTPException(status_code=404, detail=f"unknown database {db_id!r}")
        path = paths[db_id]
        mtime = path.stat().st_mtime
        cached = self._catalogs.get(db_id)
        if cached is None or cached[0] != mtime:
            try:
                self._catalogs[db_id] = (mtime, load_from_database(path))
            except CatalogError as exc:
                raise HTTPException(status_code=500, detail=str(exc)) from exc
            self._scorers.pop(db_id, None)
        return self._catalogs[db_id][1], path

    def term_map(self, db_id: str) -> list:
        path = self.config.term_maps.get(db_id)
        if path is None or not Path(path).exists():
            return []
        mtime = Path(path).stat().st_mtime
        cached = self._term_maps.get(db_id)
        if cached is None or cached[0] != mtime:
            self._term_maps[db_id] = (mtime, load_term_map(path))
        return self._term_maps[db_id][1]

    def scorer(self, db_id: str, catalog: SchemaCatalog):
        if db_id not in self._scorers:
            self._scorers[db_id] = heuristic_scorer(catalog)
        return self._scorers[db_id]


class QueryRequest(BaseModel):
    db_id: str
    question: str
    beam_size: Optional[int] = None
    source: Optional[str] = None


class ExecuteRequest(BaseModel):
    db_id: str
    hypothesis_sql: str


class SourceError(RuntimeError):
    pass


def _source_hypotheses(
    registry: _Registry,
    db_id: str,
    catalog: SchemaCatalog,
    question_text: str,
    config: BeamConfig,
    source_override: Optional[str],
) -> list[Hypothesis]:
    spec = source_override or registry.config.sources.get(
        db_id, registry.config.sources.get("default", "heuristic")
    )
    question = tokenize(question_text)
    if spec == "heuristic" or spec is None:
        return beam_search(question, catalog, registry.scorer(db_id, catalog), config)
    if isinstance(spec, dict) and spec.get("type") == "beam_dir":
        base = Path(spec["path"])
        index_path = base / "index.json"
        if not index_path.exists():
            raise SourceError(f"beam source index missing: {index_path}")
        index = json.loads(index_path.read_text(encoding="utf-8"))
        name = index.get(question_text)
        if name is None:
            raise SourceError("beam source has no entry for this question")
        from .beam import load_beam_file

        return load_beam_file(str(base / name), catalog, question, config)
    if isinstance(spec, dict) and spec.get("type") == "remote":
        url = spec["url"]
        timeout = float(spec.get("timeout", DEFAULT_REMOTE_TIMEOUT))
        try:
            response = httpx.post(
                url,
                json={
                    "db_id": db_id,
                    "question": question_text,
                    "beam_size": config.beam_size,
                },
                timeout=timeout,
            )
        except httpx.HTTPError as exc:
            raise SourceError(f"remote parser unreachable: {exc}") from exc
        if response.status_code != 200:
            raise SourceError(f"remote parser returned {response.status_code}")
        try:
            rows = response.json()["hypotheses"]
        except (KeyError, ValueError) as exc:
            raise SourceError(f"remote parser sent a malformed response: {exc}") from exc
        return [
            hypothesis_from_row(row["actions"], row["logps"], catalog, question, config)
            for row in rows
        ]
    raise SourceError(f"unknown hypothesis source {spec!r}")


def create_app(config: ServiceConfig, frontend_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="nldb", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = _Registry(config)
    app.state.registry = registry

    @app.get("/api/databases")
    def list_databases():
        out = []
        for db_id in registry.database_paths():
            catalog, _ = registry.catalog(db_id)
            out.append({"db_id": db_id, "table_count": len(catalog.tables)})
        return out

    @app.get("/api/databases/{db_id}/schema")
    def get_schema(db_id: str):
        catalog, _ = registry.catalog(db_id)
        return catalog.to_payload()

    @app.get("/api/databases/{db_id}/tables/{table}")
    def get_table(db_id: str, table: str, limit: int = 20):
        catalog, _ = registry.catalog(db_id)
        try:
            page = content_preview(catalog, table, limit)
        except CatalogError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return page.to_payload()

    @app.post("/api/query")
    def query(request: QueryRequest):
        if not request.question.strip():
            raise HTTPException(status_code=422, detail="question must not be empty")
        catalog, db_path = registry.catalog(request.db_id)
        beam = config.beam
        if request.beam_size:
            beam = BeamConfig(
                beam_size=request.beam_size,
                alpha=beam.alpha,
                beta=beam.beta,
                max_steps=beam.max_steps,
                rerank_only=beam.rerank_only,
            )
        try:
            hyps = _source_hypotheses(
                registry, request.db_id, catalog, request.question, beam, request.source
            )
        except SourceError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc

        term_map = registry.term_map(request.db_id)
        for hyp in hyps:
            if not hyp.valid:
                continue
            try:
                resolved_ast, resolutions = resolve_values(
                    hyp.ast, catalog, term_map, month_first=config.month_first
                )
            except ValueResolutionError as exc:
                hyp.valid = False
                hyp.validity_reason = f"value resolution failed: {exc}"
                continue
            hyp.ast = resolved_ast
            hyp.resolved_values = resolutions
            hyp.sql = print_sql(resolved_ast)

        conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True)
        try:
            survivors = filter_and_dedupe(
                hyps, lambda sql: execute(sql, conn, row_cap=5, timeout=config.exec_timeout)
            )
        finally:
            conn.close()

        docs = [explain(h.ast, h.resolved_values, catalog) for h in survivors]
        docs = diff_explanations(docs)
        tier_stats = {"shallow": 0, "deep": 0}
        for doc in docs:
            tier_stats[doc.tier_used] += 1
        hypotheses = []
        for idx, (hyp, doc) in enumerate(zip(survivors, docs)):
            hypotheses.append(
                {
                    "id": idx,
                    "sql": hyp.sql,
                    "weighted_score": hyp.weighted_score,
                    "valid": hyp.valid,
                    "explanation": doc.to_payload(),
                    "value_notes": doc.value_notes,
                    "default_display": idx < 3,
                }
            )
        return {
            "question": request.question,
            "hypotheses": hypotheses,
            "tier_stats": tier_stats,
        }

    @app.post("/api/execute")
    def run(request: ExecuteRequest):
        _, db_path = registry.catalog(request.db_id)
        try:
            result = execute(
                request.hypothesis_sql,
                str(db_path),
                row_cap=config.row_cap,
                timeout=config.exec_timeout,
            )
        except ExecutionTimeout as exc:
            raise HTTPException(status_code=408, detail=str(exc)) from exc
        except (ReadOnlyViolation, ExecutionError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return result.to_payload()

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")
    return app
