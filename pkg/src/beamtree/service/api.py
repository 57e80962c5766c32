"""Versioned HTTP API under /v1: the sole integration point for clients.

Every failure returns the uniform envelope {code, message, detail}; the
HTTP status is derived from the error code so callers can branch on either.
GET /v1/trees/{id} returns the canonical tree document, byte-compatible
with the export endpoint and the on-disk file.
"""

from __future__ import annotations

import json
import socket
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response, StreamingResponse

from ..backends import FineTuneConfig
from ..backends.wire import error_to_wire
from ..decode import ComparativeSpec, PredictionParams
from ..errors import (
    BeamTreeError,
    ConflictError,
    InvalidParameterError,
    ReadOnlyError,
)
from .jobs import JobManager
from .workspace import Workspace

API_VERSION = 1

# envelope codes that deserve a more specific status than plain 400
STATUS_BY_CODE = {
    "not-found": 404,
    "conflict": 409,
    "read-only": 403,
    "backend-unavailable": 502,
    "workspace-locked": 423,
    "internal-error": 500,
}


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str
    host: str = "127.0.0.1"
    port: int = 8765
    backend_configs: tuple = field(default_factory=tuple)
    read_only: bool = False


def _params_from(payload: dict | None) -> PredictionParams:
    return PredictionParams.from_dict(dict(payload or {}))


def _tree_document(workspace: Workspace, tree_id: str) -> dict:
    return json.loads(workspace.tree_bytes(tree_id).decode())


def _tree_summary(workspace: Workspace, tree_id: str) -> dict:
    tree = workspace.get_tree(tree_id)
    return {
        "tree_id": tree.tree_id,
        "prompt": tree.prompt,
        "backend_id": tree.backend_id,
        "node_count": len(tree.nodes),
        "head": tree.head,
        "replacement": tree.replacement,
    }


def _descriptor_payload(workspace: Workspace, backend_id: str) -> dict:
    from ..backends.wire import descriptor_to_wire

    return descriptor_to_wire(workspace.get_backend(backend_id).describe())


def build_app(
    workspace: Workspace,
    read_only: bool = False,
    jobs: JobManager | None = None,
) -> FastAPI:
    app = FastAPI(title="beamtree service", docs_url=None, redoc_url=None)
    manager = jobs or JobManager(workspace)
    app.state.workspace = workspace
    app.state.jobs = manager

    def guard_mutation() -> None:
        if read_only:
            raise ReadOnlyError("service is running in read-only mode")

    @app.exception_handler(BeamTreeError)
    async def _envelope(request: Request, exc: BeamTreeError):
        status = STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content=error_to_wire(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "invalid-parameter",
                "message": "request body failed validation",
                "detail": json.loads(json.dumps(exc.errors(), default=str)),
            },
        )

    # --- workspace ---

    @app.get("/v1/health")
    def health():
        return {"ok": True, "api_version": API_VERSION, "read_only": read_only}

    @app.get("/v1/workspace")
    def workspace_summary():
        return {
            "trees": workspace.tree_ids(),
            "backends": workspace.backend_ids(),
            "wordlists": workspace.wordlist_names(),
            "snapshots": [s["snapshot_id"] for s in workspace.snapshots()],
            "read_only": read_only,
        }

    @app.get("/v1/fixtures")
    def fixtures():
        return {
            "anchors": {
                "coords": [[float(x), float(y)] for x, y in workspace.anchors.coords],
                "neighbor_count": workspace.anchors.neighbor_count,
            },
            "colormap": {
                "name": workspace.colormap.name,
                "grid": [[list(rgb) for rgb in row] for row in workspace.colormap.grid],
            },
        }

    # --- trees ---

    @app.get("/v1/trees")
    def list_trees():
        return {"trees": [_tree_summary(workspace, tid) for tid in workspace.tree_ids()]}

    @app.post("/v1/trees")
    def create_tree(payload: dict = Body(...)):
        guard_mutation()
        prompt = payload.get("prompt")
        if not isinstance(prompt, str):
            raise InvalidParameterError("prompt must be a string")
        tree = workspace.create_tree(
            prompt,
            backend_id=payload.get("backend_id"),
            tree_id=payload.get("tree_id"),
        )
        return _tree_document(workspace, tree.tree_id)

    @app.get("/v1/trees/{tree_id}")
    def get_tree(tree_id: str):
        return _tree_document(workspace, tree_id)

    @app.delete("/v1/trees/{tree_id}")
    def delete_tree(tree_id: str):
        guard_mutation()
        workspace.delete_tree(tree_id)
        return {"deleted": tree_id}

    @app.get("/v1/trees/{tree_id}/export")
    def export_tree(tree_id: str):
        return Response(
            content=workspace.tree_bytes(tree_id), media_type="application/json"
        )

    @app.post("/v1/trees/import")
    async def import_tree(request: Request):
        guard_mutation()
        tree = workspace.import_tree(await request.body())
        return _tree_document(workspace, tree.tree_id)

    @app.get("/v1/trees/{tree_id}/text")
    def tree_text(tree_id: str, node_id: int | None = Query(default=None)):
        return {"text": workspace.text(tree_id, node_id)}

    # --- decoding ---

    @app.post("/v1/trees/{tree_id}/predict")
    def predict(tree_id: str, payload: dict = Body(default={})):
        guard_mutation()
        params = _params_from(payload.get("params"))
        created = workspace.predict(tree_id, payload.get("node_id"), params)
        tree = workspace.get_tree(tree_id)
        return {
            "created": created,
            "head": tree.head,
            "tree": _tree_document(workspace, tree_id),
        }

    @app.post("/v1/trees/{tree_id}/auto-predict")
    def auto_predict_start(tree_id: str, payload: dict = Body(default={})):
        guard_mutation()
        params = _params_from(payload.get("params"))
        max_steps = payload.get("max_steps")
        if max_steps is not None and (not isinstance(max_steps, int) or max_steps < 1):
            raise InvalidParameterError("max_steps must be a positive integer")
        job = manager.start_auto_predict(tree_id, params, max_steps)
        return job.status()

    @app.get("/v1/jobs")
    def list_jobs():
        return {"jobs": [job.status() for job in manager.jobs()]}

    @app.get("/v1/jobs/{job_id}")
    def job_status(job_id: str):
        return manager.get(job_id).status()

    @app.get("/v1/jobs/{job_id}/events")
    def job_events(
        job_id: str,
        after: int = Query(default=0, ge=0),
        wait: float = Query(default=0.0, ge=0.0, le=30.0),
    ):
        job = manager.get(job_id)
        if wait > 0:
            events, cursor, done = job.wait_events(after, timeout=wait)
        else:
            events, cursor, done = job.events_after(after)
        return {
            "events": [e.to_payload() for e in events],
            "cursor": cursor,
            "finished": done,
        }

    @app.get("/v1/jobs/{job_id}/stream")
    def job_stream(job_id: str, after: int = Query(default=0, ge=0)):
        job = manager.get(job_id)

        def sse():
            cursor = after
            while True:
                events, cursor, done = job.wait_events(cursor, timeout=0.5)
                for event in events:
                    data = json.dumps(event.to_payload(), separators=(",", ":"))
                    yield f"event: {event.kind}\ndata: {data}\n\n"
                if done and not events:
                    return

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.post("/v1/jobs/{job_id}/stop")
    def job_stop(job_id: str):
        guard_mutation()
        job = manager.stop(job_id)
        return job.status()

    # --- nodes ---

    @app.post("/v1/trees/{tree_id}/nodes/{node_id}/edit")
    def edit(tree_id: str, node_id: int, payload: dict = Body(...)):
        guard_mutation()
        text = payload.get("text")
        if not isinstance(text, str):
            raise InvalidParameterError("text must be a string")
        workspace.edit(tree_id, node_id, text)
        return _tree_document(workspace, tree_id)

    @app.delete("/v1/trees/{tree_id}/nodes/{node_id}")
    def remove(tree_id: str, node_id: int):
        guard_mutation()
        workspace.remove(tree_id, node_id)
        return _tree_document(workspace, tree_id)

    @app.post("/v1/trees/{tree_id}/start")
    def set_start(tree_id: str, payload: dict = Body(...)):
        guard_mutation()
        workspace.set_start(tree_id, payload.get("node_id"))
        return _tree_document(workspace, tree_id)

    @app.post("/v1/trees/{tree_id}/end")
    def set_end(tree_id: str, payload: dict = Body(...)):
        guard_mutation()
        workspace.set_end(tree_id, payload.get("node_id"))
        return _tree_document(workspace, tree_id)

    @app.get("/v1/trees/{tree_id}/nodes/{node_id}/suggestions")
    def suggestions(
        tree_id: str,
        node_id: int,
        surface: str | None = Query(default=None),
        domains: str | None = Query(default=None),
    ):
        extra = [d for d in (domains or "").split(",") if d] or None
        return workspace.suggestions_payload(
            tree_id, node_id, extra_domains=extra, surface=surface
        )

    # --- annotation ---

    @app.post("/v1/trees/{tree_id}/annotate")
    def annotate(tree_id: str):
        guard_mutation()
        warnings = workspace.annotate(tree_id)
        return {
            "warnings": [{"node_id": nid, "code": code} for nid, code in warnings],
            "tree": _tree_document(workspace, tree_id),
        }

    @app.get("/v1/trees/{tree_id}/ontology")
    def ontology(tree_id: str):
        return workspace.ontology_payload(tree_id)

    # --- comparative ---

    @app.post("/v1/comparative")
    def comparative(payload: dict = Body(...)):
        guard_mutation()
        template = payload.get("template")
        replacements = payload.get("replacements")
        if not isinstance(template, str):
            raise InvalidParameterError("template must be a string")
        if not isinstance(replacements, list) or not all(
            isinstance(r, str) for r in replacements
        ):
            raise InvalidParameterError("replacements must be a list of strings")
        spec = ComparativeSpec(
            template=template,
            replacements=tuple(replacements),
            params=_params_from(payload.get("params")),
        )
        trees = workspace.comparative(spec)
        return {
            "tree_ids": [t.tree_id for t in trees],
            "trees": [_tree_document(workspace, t.tree_id) for t in trees],
        }

    def _ids_and_lists(payload: dict) -> tuple[list[str], list[str]]:
        tree_ids = payload.get("tree_ids")
        lists = payload.get("lists")
        if not isinstance(tree_ids, list) or not tree_ids:
            raise InvalidParameterError("tree_ids must be a non-empty list")
        if not isinstance(lists, list) or not lists:
            raise InvalidParameterError("lists must be a non-empty list")
        return tree_ids, lists

    @app.post("/v1/upset")
    def upset_report(payload: dict = Body(...)):
        tree_ids, lists = _ids_and_lists(payload)
        return workspace.upset_payload(tree_ids, lists)

    @app.post("/v1/badges")
    def badges(payload: dict = Body(...)):
        tree_ids, lists = _ids_and_lists(payload)
        return {"badges": workspace.badges_payload(tree_ids, lists)}

    # --- wordlists ---

    @app.get("/v1/wordlists")
    def wordlists():
        return {
            "wordlists": [
                {"name": name, "size": len(workspace.get_wordlist(name).words)}
                for name in workspace.wordlist_names()
            ]
        }

    @app.get("/v1/wordlists/{name}")
    def get_wordlist(name: str):
        wl = workspace.get_wordlist(name)
        return {"name": wl.name, "words": sorted(wl.words)}

    @app.put("/v1/wordlists/{name}")
    def put_wordlist(name: str, payload: dict = Body(...)):
        guard_mutation()
        words = payload.get("words")
        if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
            raise InvalidParameterError("words must be a list of strings")
        wl = workspace.put_wordlist(name, words)
        return {"name": wl.name, "words": sorted(wl.words)}

    @app.delete("/v1/wordlists/{name}")
    def delete_wordlist(name: str):
        guard_mutation()
        workspace.delete_wordlist(name)
        return {"deleted": name}

    # --- model ---

    @app.get("/v1/backends")
    def backends():
        return {
            "backends": [
                _descriptor_payload(workspace, bid) for bid in workspace.backend_ids()
            ]
        }

    @app.get("/v1/backends/{backend_id}")
    def backend(backend_id: str):
        return _descriptor_payload(workspace, backend_id)

    @app.delete("/v1/backends/{backend_id}")
    def delete_backend(backend_id: str):
        guard_mutation()
        workspace.delete_backend(backend_id)
        return {"deleted": backend_id}

    @app.post("/v1/backends/{backend_id}/fine-tune-to-node")
    def fine_tune(backend_id: str, payload: dict = Body(...)):
        guard_mutation()
        tree_id = payload.get("tree_id")
        node_id = payload.get("node_id")
        if not isinstance(tree_id, str):
            raise InvalidParameterError("tree_id must be a string")
        if not isinstance(node_id, int) or isinstance(node_id, bool):
            raise InvalidParameterError("node_id must be an integer")
        config = FineTuneConfig(
            learning_rate=float(payload.get("learning_rate", FineTuneConfig().learning_rate)),
            steps=int(payload.get("steps", 1)),
        )
        losses = workspace.fine_tune_to_node(backend_id, tree_id, node_id, config)
        return {"losses": losses}

    @app.post("/v1/snapshots")
    def create_snapshot(payload: dict = Body(...)):
        guard_mutation()
        backend_id = payload.get("backend_id")
        if not isinstance(backend_id, str):
            raise InvalidParameterError("backend_id must be a string")
        label = payload.get("label", "")
        if not isinstance(label, str):
            raise InvalidParameterError("label must be a string")
        return workspace.create_snapshot(backend_id, label)

    @app.get("/v1/snapshots")
    def snapshots():
        return {"snapshots": workspace.snapshots()}

    @app.post("/v1/snapshots/{snapshot_id}/restore")
    def restore_snapshot(snapshot_id: str):
        guard_mutation()
        return workspace.restore_snapshot(snapshot_id)

    return app


def check_port_free(host: str, port: int) -> None:
    """Bind-test the address; a conflict refuses startup with a clear error."""
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise ConflictError(f"port {port} on {host} is already in use: {exc}") from exc
    finally:
        probe.close()


def serve(config: ServiceConfig) -> None:
    """Run the service in the foreground until interrupted.

    Startup order: workspace lock and load (refusing on corrupt data),
    port probe, then the server loop; the lock is always released.
    """
    import uvicorn

    workspace = Workspace(
        config.data_dir, backend_configs=list(config.backend_configs) or None
    )
    try:
        check_port_free(config.host, config.port)
        app = build_app(workspace, read_only=config.read_only)
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        workspace.close()
