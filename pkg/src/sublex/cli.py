"""Command line entry points.

  sublex run          batch pipeline over a corpus, artifacts to --out
  sublex serve        HTTP service for interactive review
  sublex suggestions  list review items from the store
  sublex decide       accept or reject one suggestion
  sublex decide-all   bulk-decide by filter (bootstrap loops)
  sublex group        record an accepted value group
  sublex compact      fold the store's event log
  sublex export-store / import-store   XML archival round-trip

Exit codes: 0 ok, 2 unusable config or corpus, 3 pipeline stage failure,
4 store conflicts (unknown id, already decided).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .docmodel import EmptyCorpus
from .pipeline import ConfigError, PipelineConfig, STAGES, StageFailure, run_pipeline
from .store import AlreadyDecided, KnowledgeStore, StoreError, UnknownId
from .xmlio import export_store_xml, import_store_xml

logger = logging.getLogger(__name__)


def _store_for(config: PipelineConfig) -> KnowledgeStore:
    return KnowledgeStore(config.store)


def render_payload(sugg) -> str:
    kind = sugg.kind.value
    p = sugg.payload
    if kind == "LEXICON":
        return "%s %s %s %s %s (%s)" % (
            p.surface, p.cls.value,
            p.features.format_component("cas"),
            p.features.format_component("num"),
            p.features.format_component("gen"),
            p.origin.value,
        )
    if kind == "ONTOLOGY":
        return p.render()
    return "%s = {%s}%s" % (
        p.label, ", ".join(p.values), " [%s]" % p.entity if p.entity else ""
    )


def cmd_run(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    result = run_pipeline(config, store,
                          out_dir=args.out, until=args.until)
    cov = result.coverage
    print("run %s: %d segments, %d full parses, %d partial, %d pattern-matched"
          % (result.run_id, cov["segments"], cov["full"], cov["partial"],
             cov["matched"]))
    print("unknown (XXX) tokens: %d; full-parse ratio: %.4f"
          % (cov["xxx_tokens"], cov["full_ratio"]))
    if result.table is not None:
        print("relations: %d entities, %d (entity, value) pairs, total count %d"
              % (len(result.table.rows), sum(1 for _ in result.table.pairs()),
                 result.table.total_count()))
    if result.new_suggestions:
        print("new suggestions: %d" % len(result.new_suggestions))
    for path in result.written:
        print("wrote %s" % path)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    app = create_app(config, store, run_on_startup=not args.no_initial_run)
    if args.ui:
        # same-origin static hosting for the review UI; API routes win
        from starlette.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.ui, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_suggestions(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    items = store.suggestions(kind=args.kind, status=args.status,
                              entity=args.entity)
    for sugg in items:
        refs = " ".join("%s:%d" % (e.doc, e.segment) for e in sugg.evidence)
        print("%s  %-11s %-9s x%-3d %s  [%s]"
              % (sugg.id, sugg.kind.value, sugg.status.value, sugg.count,
                 render_payload(sugg), refs))
    print("%d suggestion(s)" % len(items))
    return 0


def cmd_decide(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    store.decide(args.id, args.verdict, args.who)
    sugg = store.get(args.id)
    print("%s -> %s" % (sugg.id, sugg.status.value))
    return 0


def cmd_decide_all(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    items = store.suggestions(kind=args.kind, status="SUGGESTED",
                              entity=args.entity)
    for sugg in items:
        store.decide(sugg.id, args.verdict, args.who)
    print("decided %d suggestion(s): %s" % (len(items), args.verdict))
    return 0


def cmd_group(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    sugg = store.add_value_group(args.label, args.values, args.entity or "",
                                 args.who)
    print("%s -> %s" % (sugg.id, sugg.status.value))
    return 0


def cmd_compact(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    store.compact()
    print("compacted %s" % store.path)
    return 0


def cmd_export_store(args) -> int:
    config = PipelineConfig.load(args.config)
    store = _store_for(config)
    text = export_store_xml(store)
    out = Path(args.out)
    out.write_text(text, encoding="utf-8")
    print("wrote %s" % out)
    return 0


def cmd_import_store(args) -> int:
    target = Path(args.target)
    if target.exists():
        print("refusing to overwrite existing store %s" % target, file=sys.stderr)
        return 4
    text = Path(args.archive).read_text(encoding="utf-8")
    store = import_store_xml(text, target)
    print("restored %d suggestion(s) into %s"
          % (len(store.suggestions()), target))
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="sublex",
        description="Corpus bootstrapping workbench for telegraphic findings text.",
    )
    top.add_argument("-v", "--verbose", action="count", default=0,
                     help="-v info, -vv debug")
    sub = top.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        return p

    p = with_config(sub.add_parser("run", help="batch pipeline run"))
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--until", choices=STAGES, default="suggest",
                   help="last stage to execute")
    p.set_defaults(func=cmd_run)

    p = with_config(sub.add_parser("serve", help="HTTP review service"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--no-initial-run", action="store_true",
                   help="start without running the pipeline first")
    p.add_argument("--ui", help="directory with a built review UI to host at /")
    p.set_defaults(func=cmd_serve)

    p = with_config(sub.add_parser("suggestions", help="list review items"))
    p.add_argument("--kind", choices=("LEXICON", "ONTOLOGY", "VALUE_GROUP"))
    p.add_argument("--status", choices=("SUGGESTED", "ACCEPTED", "REJECTED"))
    p.add_argument("--entity", help="substring filter on the subject")
    p.set_defaults(func=cmd_suggestions)

    p = with_config(sub.add_parser("decide", help="decide one suggestion"))
    p.add_argument("id")
    p.add_argument("verdict", choices=("ACCEPT", "REJECT"))
    p.add_argument("--who", default="cli")
    p.set_defaults(func=cmd_decide)

    p = with_config(sub.add_parser("decide-all", help="bulk decide by filter"))
    p.add_argument("--kind", choices=("LEXICON", "ONTOLOGY", "VALUE_GROUP"))
    p.add_argument("--entity")
    p.add_argument("--verdict", choices=("ACCEPT", "REJECT"), required=True)
    p.add_argument("--who", default="cli")
    p.set_defaults(func=cmd_decide_all)

    p = with_config(sub.add_parser("group", help="record an accepted value group"))
    p.add_argument("label")
    p.add_argument("values", nargs="+")
    p.add_argument("--entity")
    p.add_argument("--who", default="cli")
    p.set_defaults(func=cmd_group)

    p = with_config(sub.add_parser("compact", help="fold the store event log"))
    p.set_defaults(func=cmd_compact)

    p = with_config(sub.add_parser("export-store", help="archive the store as XML"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_store)

    p = sub.add_parser("import-store", help="restore a store from an XML archive")
    p.add_argument("archive")
    p.add_argument("target")
    p.set_defaults(func=cmd_import_store)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, EmptyCorpus) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except StageFailure as exc:
        print("pipeline error: %s" % exc, file=sys.stderr)
        return 3
    except (UnknownId, AlreadyDecided, StoreError) as exc:
        print("store error: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
