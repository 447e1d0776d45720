"""Command-line harness: evaluation, round-trip checks, grammar coverage,
one-shot explanation, fixture generation, and the HTTP service."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .beam import BeamConfig, load_beam_file
from .catalog import load_from_database
from .execution import exec_match, execute
from .explain import explain
from .parser import SqlParseError, parse_sql
from .printer import print_sql
from .scfg import parse_under_scfg
from .transitions import actions_to_ast, ast_to_actions, tokenize
from .values import resolve_values


def _load_gold(path: Path) -> list[dict]:
    rows = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(rows, list) or not rows:
        raise SystemExit(f"{path}: empty or malformed gold file")
    for row in rows:
        for key in ("db_id", "question", "query"):
            if key not in row:
                raise SystemExit(f"{path}: gold rows need db_id/question/query")
    return rows


class _Catalogs:
    def __init__(self, db_dir: Path):
        self.db_dir = db_dir
        self.cache = {}

    def get(self, db_id: str):
        if db_id not in self.cache:
            path = self.db_dir / f"{db_id}.sqlite"
            if not path.exists():
                path = self.db_dir / f"{db_id}.db"
            if not path.exists():
                raise SystemExit(f"missing database for {db_id} under {self.db_dir}")
            self.cache[db_id] = (load_from_database(path), str(path))
        return self.cache[db_id]


def _emit(report: dict, machine: bool) -> None:
    if machine:
        print(json.dumps(report, indent=1))
        return
    for line in report["lines"]:
        print(line)


# -- eval ---------------------------------------------------------------------


def cmd_eval(args) -> int:
    gold = _load_gold(Path(args.gold))
    catalogs = _Catalogs(Path(args.db_dir))
    k_list = sorted(int(k) for k in args.k.split(","))
    pred_dir = Path(args.pred)
    config = BeamConfig()
    strict = bool(getattr(args, "strict", False))

    def judge(index_row):
        index, row = index_row
        catalog, db_path = catalogs.get(row["db_id"])
        beam_path = pred_dir / f"{index}.jsonl"
        if not beam_path.exists():
            raise SystemExit(f"missing beam file for example {index}: {beam_path}")
        question = tokenize(row["question"])
        hyps = load_beam_file(str(beam_path), catalog, question, config)
        hyps.sort(key=lambda h: -h.weighted_score)
        gold_ast = parse_sql(row["query"], catalog)
        ordered = gold_ast.order_limit is not None and bool(gold_ast.order_limit.keys)
        gold_result = execute(row["query"], db_path)
        matches = []
        invalid = 0
        for hyp in hyps:
            ok = False
            if not hyp.valid:
                invalid += 1
            else:
                try:
                    resolved, _ = resolve_values(hyp.ast, catalog)
                    result = execute(print_sql(resolved), db_path)
                    ok = exec_match(gold_result, result, ordered=ordered, strict=strict)
                except Exception:
                    ok = False
            matches.append(ok)
        return matches, invalid

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(judge, enumerate(gold)))

    total = len(gold)
    correct = {k: 0 for k in k_list}
    invalid_total = sum(inv for _, inv in results)
    for matches, _ in results:
        for k in k_list:
            if any(matches[:k]):
                correct[k] += 1
    report = {
        "examples": total,
        "invalid_hypotheses": invalid_total,
        "exec_at": {str(k): correct[k] / total for k in k_list},
        "lines": [f"examples: {total}", f"invalid hypotheses: {invalid_total}"]
        + [f"Exec top-{k}: {correct[k] / total:.3f} ({correct[k]}/{total})" for k in k_list],
    }
    _emit(report, args.machine)
    accs = [correct[k] for k in k_list]
    return 0 if accs == sorted(accs) else 1


# -- roundtrip -------------------------------------------------------------------


def cmd_roundtrip(args) -> int:
    gold = _load_gold(Path(args.gold))
    catalogs = _Catalogs(Path(args.db_dir))

    def run(row):
        catalog, db_path = catalogs.get(row["db_id"])
        stage = "parse"
        try:
            ast = parse_sql(row["query"], catalog)
            stage = "actions"
            question = tokenize(row["question"])
            replayed = actions_to_ast(
                ast_to_actions(ast, catalog, question), catalog, question
            )
            stage = "resolve"
            resolved, _ = resolve_values(replayed, catalog)
            stage = "execute"
            ordered = ast.order_limit is not None and bool(ast.order_limit.keys)
            want = execute(row["query"], db_path)
            got = execute(print_sql(resolved), db_path)
            if not exec_match(want, got, ordered=ordered):
                return "execute: result mismatch"
            return None
        except Exception as exc:
            return f"{stage}: {exc}"

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        failures = [
            (i, err) for i, err in enumerate(pool.map(run, gold)) if err is not None
        ]
    share = (len(gold) - len(failures)) / len(gold)
    lines = [f"round trip: {len(gold) - len(failures)}/{len(gold)} ({share:.1%})"]
    for i, err in failures:
        lines.append(f"  example {i} [{gold[i]['db_id']}]: {err}")
    report = {
        "examples": len(gold),
        "passed": len(gold) - len(failures),
        "failures": [{"example": i, "error": err} for i, err in failures],
        "lines": lines,
    }
    _emit(report, args.machine)
    return 0 if not failures else 1


# -- coverage --------------------------------------------------------------------


def cmd_coverage(args) -> int:
    gold = _load_gold(Path(args.gold))
    catalogs = _Catalogs(Path(args.db_dir))
    shallow = 0
    hits: dict[int, int] = {}
    for row in gold:
        catalog, _ = catalogs.get(row["db_id"])
        ast = parse_sql(row["query"], catalog)
        derivation = parse_under_scfg(ast, "shallow")
        if derivation is not None:
            shallow += 1
            stack = [derivation]
            while stack:
                node = stack.pop()
                if node.rule is not None:
                    hits[node.rule.rule_id] = hits.get(node.rule.rule_id, 0) + 1
                stack.extend(node.children.values())
    total = len(gold)
    shallow_share = shallow / total
    deep_share = (total - shallow) / total
    lines = [
        f"shallow share: {shallow_share:.3f} ({shallow}/{total})",
        f"deep share: {deep_share:.3f} ({total - shallow}/{total})",
        "rule hits:",
    ] + [f"  rule {rid}: {count}" for rid, count in sorted(hits.items())]
    report = {
        "shallow_share": shallow_share,
        "deep_share": deep_share,
        "rule_hits": {str(k): v for k, v in sorted(hits.items())},
        "lines": lines,
    }
    _emit(report, args.machine)
    return 0 if abs(shallow_share + deep_share - 1.0) < 1e-9 else 1


# -- explain ----------------------------------------------------------------------


def cmd_explain(args) -> int:
    catalog = load_from_database(args.db)
    try:
        ast = parse_sql(args.sql, catalog)
    except SqlParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    if args.question:
        question = tokenize(args.question)
        ast = actions_to_ast(
            ast_to_actions(ast, catalog, question), catalog, question
        )
    resolved, resolutions = resolve_values(ast, catalog)
    doc = explain(resolved, resolutions, catalog)
    print(doc.plain_text())
    return 0


# -- fixtures and serve -------------------------------------------------------------


def cmd_fixtures(args) -> int:
    from .fixtures import build_corpus

    dest = build_corpus(args.dest)
    print(f"fixture corpus written to {dest}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    config = load_config(args.config)
    if args.rerank_only:
        config.beam.rerank_only = True
    app = create_app(config, frontend_dir=args.frontend)
    import os

    port = args.port or int(os.environ.get("NLDB_PORT", "8095"))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nldb", description="natural-language database interface toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="execution-match accuracy of beam files")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True, help="directory of <index>.jsonl beam files")
    p.add_argument("--db-dir", required=True)
    p.add_argument("--k", default="1,3,5")
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--machine", action="store_true")
    p.add_argument("--strict", action="store_true",
                   help="exact cell comparison, no numeric tolerance or column alignment")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roundtrip", help="oracle pipeline reproduces gold execution")
    p.add_argument("--gold", required=True)
    p.add_argument("--db-dir", required=True)
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("coverage", help="grammar-tier share over a gold file")
    p.add_argument("--gold", required=True)
    p.add_argument("--db-dir", required=True)
    p.add_argument("--machine", action="store_true")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("explain", help="explain one SQL query")
    p.add_argument("--sql", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--question", help="question text for value-change notes")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("fixtures", help="materialize the bundled demo corpus")
    p.add_argument("--dest", required=True)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.add_argument("--frontend", help="static directory to serve at /")
    p.add_argument("--rerank-only", action="store_true",
                   help="apply step-type weights after search instead of during")
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
