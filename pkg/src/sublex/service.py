"""HTTP review service: the pipeline's results plus the suggestion
lifecycle, for the browser UI and scripts.

Read-mostly; the only mutations are deciding suggestions, recording value
groups, and triggering a whole-corpus re-run (one in flight at a time, a
concurrent trigger gets 409). Every list response carries evidence
references (doc, segment) that resolve through GET /segments to the
segment text with one segment of context either side.

The JSON schema is the OpenAPI document FastAPI serves at /openapi.json.
XML artifacts are available unchanged under /export/.
"""

from __future__ import annotations

import logging
import threading

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .cooccurrence import UnknownEntity, UnknownSeed, property_inventory, zigzag_closure
from .pipeline import PipelineConfig, RunResult, run_pipeline
from .store import (
    AlreadyDecided,
    KnowledgeStore,
    StoreError,
    UnknownId,
    payload_to_jsonable,
)
from .xmlio import (
    export_clusters_xml,
    export_inventories_xml,
    export_ontology_xml,
    export_relations_xml,
    export_store_xml,
)

logger = logging.getLogger(__name__)


class DecideBody(BaseModel):
    verdict: str = Field(pattern="^(ACCEPT|REJECT)$")
    who: str = "reviewer"


class ValueGroupBody(BaseModel):
    label: str = Field(min_length=1)
    values: list[str] = Field(min_length=1)
    entity: str = ""
    who: str = "reviewer"


def _render_suggestion(sugg) -> dict:
    from .cli import render_payload

    return {
        "id": sugg.id,
        "kind": sugg.kind.value,
        "status": sugg.status.value,
        "count": sugg.count,
        "created_run": sugg.created_run,
        "decided_by": sugg.decided_by,
        "payload": payload_to_jsonable(sugg.kind, sugg.payload),
        "rendered": render_payload(sugg),
        "evidence": [{"doc": e.doc, "segment": e.segment} for e in sugg.evidence],
    }


def create_app(
    config: PipelineConfig,
    store: KnowledgeStore,
    run_on_startup: bool = True,
) -> FastAPI:
    app = FastAPI(title="sublex review service", version="1.0")
    state = {"result": None}
    run_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def result_or_409() -> RunResult:
        result = state["result"]
        if result is None:
            raise HTTPException(status_code=409, detail="no run data; POST /rerun first")
        return result

    def do_run() -> RunResult:
        result = run_pipeline(config, store)
        state["result"] = result
        return result

    if run_on_startup:
        do_run()

    @app.get("/suggestions")
    def suggestions(kind: str | None = None, status: str | None = None,
                    entity: str | None = None):
        items = store.suggestions(kind=kind, status=status, entity=entity)
        return {"items": [_render_suggestion(s) for s in items]}

    @app.post("/suggestions/{sid}/decide")
    def decide(sid: str, body: DecideBody):
        try:
            sugg = store.decide(sid, body.verdict, body.who)
        except UnknownId:
            raise HTTPException(status_code=404, detail="unknown suggestion %s" % sid)
        except AlreadyDecided as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _render_suggestion(sugg)

    @app.get("/relations")
    def relations():
        result = result_or_409()
        rows = [
            {
                "entity": row.entity,
                "values": [{"value": v, "count": c} for v, c in row.values.items()],
                "evidence": [{"doc": e.doc, "segment": e.segment}
                             for e in row.evidence],
            }
            for row in result.table.rows.values()
        ]
        return {"rows": rows}

    @app.get("/clusters")
    def clusters(seed: str | None = None, kind: str = "value"):
        result = result_or_409()
        if seed is None:
            return {"clusters": [
                {"seed": c.seed, "kind": c.seed_kind, "rounds": c.rounds,
                 "entities": list(c.entities), "values": list(c.values)}
                for c in result.clusters
            ]}
        try:
            c = zigzag_closure(result.matrix, seed, seed_kind=kind)
        except UnknownSeed:
            raise HTTPException(status_code=404, detail="unknown seed %r" % seed)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"seed": c.seed, "kind": c.seed_kind, "rounds": c.rounds,
                "entities": list(c.entities), "values": list(c.values)}

    @app.get("/inventory")
    def inventory(entity: str):
        result = result_or_409()
        try:
            rows = property_inventory(result.matrix, entity, config.min_count)
        except UnknownEntity:
            raise HTTPException(status_code=404, detail="unknown entity %r" % entity)
        return {"entity": entity,
                "values": [{"value": v, "count": c} for v, c in rows]}

    @app.get("/ontology")
    def ontology(status: str | None = None):
        items = store.suggestions(kind="ONTOLOGY", status=status)
        return {"items": [_render_suggestion(s) for s in items]}

    @app.get("/coverage")
    def coverage():
        result = state["result"]
        return {
            "current": result.coverage if result else None,
            "runs": [
                {"id": r.id, "coverage": r.coverage, "closed": r.closed,
                 "suggestions": r.suggestion_counts}
                for r in store.runs()
            ],
        }

    @app.get("/runs")
    def runs():
        return {"runs": [
            {"id": r.id, "corpus": r.corpus_hash, "config": r.config_hash,
             "opened_at": r.opened_at, "closed_at": r.closed_at,
             "coverage": r.coverage, "suggestions": r.suggestion_counts}
            for r in store.runs()
        ]}

    @app.get("/segments")
    def segments(doc: str, index: int, context: int = 1):
        result = result_or_409()
        for analysis in result.analyses:
            if analysis.doc.source != doc:
                continue
            segs = analysis.doc.segments
            if not 0 <= index < len(segs):
                break
            lo = max(0, index - context)
            hi = min(len(segs), index + context + 1)
            window = [
                {
                    "index": s.index,
                    "label": s.label,
                    "kind": s.kind.value,
                    "text": analysis.doc.text[s.start:s.end],
                    "focus": s.index == index,
                }
                for s in segs[lo:hi]
            ]
            return {"doc": doc, "segments": window}
        raise HTTPException(status_code=404,
                            detail="unknown segment %s:%d" % (doc, index))

    @app.post("/rerun")
    def rerun():
        if not run_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a run is already in flight")
        try:
            result = do_run()
        finally:
            run_lock.release()
        return {"run_id": result.run_id, "coverage": result.coverage}

    @app.post("/value-groups")
    def value_groups(body: ValueGroupBody):
        try:
            sugg = store.add_value_group(body.label, body.values, body.entity,
                                         body.who)
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _render_suggestion(sugg)

    @app.get("/value-groups")
    def list_value_groups(status: str | None = "ACCEPTED"):
        return {"items": [_render_suggestion(s)
                          for s in store.value_groups(status)]}

    def _xml(text: str) -> Response:
        return Response(content=text, media_type="application/xml")

    @app.get("/export/relations.xml")
    def export_relations():
        return _xml(export_relations_xml(result_or_409().table))

    @app.get("/export/clusters.xml")
    def export_clusters():
        return _xml(export_clusters_xml(result_or_409().clusters))

    @app.get("/export/inventories.xml")
    def export_inventories():
        return _xml(export_inventories_xml(result_or_409().inventories))

    @app.get("/export/ontology.xml")
    def export_ontology():
        return _xml(export_ontology_xml(result_or_409().ontology_rows))

    @app.get("/export/store.xml")
    def export_store():
        return _xml(export_store_xml(store))

    return app
