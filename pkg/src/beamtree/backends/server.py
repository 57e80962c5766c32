"""HTTP stub server exposing one backend under ``/backend/v1``.

The app is a thin RPC shim: each endpoint decodes a JSON body, calls the
wrapped backend, and encodes the result.  Failures surface as HTTP 400
with the {code, message, detail} envelope so clients can re-raise the
original exception class.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from ..errors import BeamTreeError, InvalidParameterError
from .base import Backend
from .wire import (
    descriptor_to_wire,
    distribution_to_wire,
    error_to_wire,
    fine_tune_config_from_wire,
    masked_config_from_wire,
    snapshot_to_wire,
    tokens_from_wire,
    tokens_to_wire,
)


def _field(payload: dict, key: str):
    if not isinstance(payload, dict) or key not in payload:
        raise InvalidParameterError(f"request body is missing field {key!r}")
    return payload[key]


def _decode_blob(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InvalidParameterError(f"state is not valid base64: {exc}") from exc


def build_backend_app(backend: Backend) -> FastAPI:
    """Wrap ``backend`` in an ASGI app speaking the versioned wire protocol."""
    app = FastAPI(title="beamtree backend", docs_url=None, redoc_url=None)

    @app.exception_handler(BeamTreeError)
    async def _beamtree_error(request, exc: BeamTreeError):
        return JSONResponse(status_code=400, content=error_to_wire(exc))

    @app.get("/backend/v1/describe")
    def describe():
        return descriptor_to_wire(backend.describe())

    @app.post("/backend/v1/tokenize")
    def tokenize(payload: dict = Body(...)):
        text = _field(payload, "text")
        if not isinstance(text, str):
            raise InvalidParameterError("text must be a string")
        return {"tokens": tokens_to_wire(backend.tokenize(text))}

    @app.post("/backend/v1/detokenize")
    def detokenize(payload: dict = Body(...)):
        tokens = tokens_from_wire(_field(payload, "tokens"))
        return {"text": backend.detokenize(tokens)}

    @app.post("/backend/v1/next-distribution")
    def next_distribution(payload: dict = Body(...)):
        context = tokens_from_wire(_field(payload, "context"))
        return distribution_to_wire(backend.next_distribution(context))

    @app.post("/backend/v1/embeddings")
    def embeddings(payload: dict = Body(...)):
        tokens = tokens_from_wire(_field(payload, "tokens"))
        layer = _field(payload, "layer")
        if not isinstance(layer, int) or isinstance(layer, bool):
            raise InvalidParameterError("layer must be an integer")
        return {"vectors": backend.token_embeddings(tokens, layer)}

    @app.post("/backend/v1/masked-top-k")
    def masked_top_k(payload: dict = Body(...)):
        prefix = tokens_from_wire(_field(payload, "prefix"))
        suffix = tokens_from_wire(_field(payload, "suffix"))
        config = masked_config_from_wire(_field(payload, "config"))
        return distribution_to_wire(backend.masked_top_k(prefix, suffix, config))

    @app.post("/backend/v1/fine-tune")
    def fine_tune(payload: dict = Body(...)):
        sequence = tokens_from_wire(_field(payload, "sequence"))
        config = fine_tune_config_from_wire(_field(payload, "config"))
        return {"losses": backend.fine_tune(sequence, config)}

    @app.post("/backend/v1/snapshot")
    def snapshot(payload: dict = Body(...)):
        label = payload.get("label", "") if isinstance(payload, dict) else ""
        if not isinstance(label, str):
            raise InvalidParameterError("label must be a string")
        return snapshot_to_wire(backend.snapshot(label))

    @app.post("/backend/v1/restore")
    def restore(payload: dict = Body(...)):
        snapshot_id = _field(payload, "snapshot_id")
        if not isinstance(snapshot_id, str):
            raise InvalidParameterError("snapshot_id must be a string")
        backend.restore(snapshot_id)
        return {"ok": True}

    @app.get("/backend/v1/snapshots/{snapshot_id}/state")
    def snapshot_state(snapshot_id: str):
        blob = backend.snapshot_bytes(snapshot_id)
        return {"state": base64.b64encode(blob).decode("ascii")}

    @app.get("/backend/v1/state")
    def get_state():
        return {"state": base64.b64encode(backend.state_bytes()).decode("ascii")}

    @app.post("/backend/v1/state")
    def put_state(payload: dict = Body(...)):
        blob = _decode_blob(str(_field(payload, "state")))
        backend.load_state_bytes(blob)
        return {"ok": True}

    return app


def serve_backend(backend: Backend, host: str = "127.0.0.1", port: int = 8791) -> None:
    """Run the stub server in the foreground (development helper)."""
    import uvicorn

    uvicorn.run(build_backend_app(backend), host=host, port=port, log_level="warning")
