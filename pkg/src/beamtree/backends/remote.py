"""HTTP client presenting a remote stub server as a local Backend.

All numeric payloads are JSON doubles, so probabilities and embeddings
round-trip bit-exactly; the conformance suite holds the remote client to
equality with the in-process backend it wraps.
"""

from __future__ import annotations

import base64
from dataclasses import replace
from typing import Sequence

import httpx

from ..errors import BackendUnavailableError
from .base import (
    Backend,
    BackendDescriptor,
    FineTuneConfig,
    MaskedQueryConfig,
    ModelSnapshot,
    Token,
    TokenDistribution,
)
from .wire import (
    descriptor_from_wire,
    distribution_from_wire,
    fine_tune_config_to_wire,
    masked_config_to_wire,
    raise_from_wire,
    snapshot_from_wire,
    tokens_from_wire,
    tokens_to_wire,
)

DEFAULT_TIMEOUT = 30.0


class RemoteBackend(Backend):
    """Speaks the ``/backend/v1`` wire protocol over an injected httpx client.

    Pass ``transport`` (e.g. ``httpx.ASGITransport``) to talk to an in-process
    app; otherwise a plain network client is created.  The descriptor is
    fetched once and cached: backend identity is not expected to change over
    a connection's lifetime.
    """

    def __init__(
        self,
        base_url: str,
        backend_id: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ):
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"), timeout=timeout, transport=transport
        )
        self._backend_id = backend_id
        self._descriptor: BackendDescriptor | None = None

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # --- transport plumbing ---

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        try:
            if method == "GET":
                response = self._client.get(path)
            else:
                response = self._client.post(path, json=payload)
        except httpx.TimeoutException as exc:
            raise BackendUnavailableError(f"backend timed out: {exc}") from exc
        except httpx.TransportError as exc:
            raise BackendUnavailableError(f"backend unreachable: {exc}") from exc
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                body = None
            if isinstance(body, dict) and "code" in body:
                raise_from_wire(body)
            raise BackendUnavailableError(
                f"backend returned HTTP {response.status_code}",
                detail=response.text[:500],
            )
        return response.json()

    # --- Backend interface ---

    def describe(self) -> BackendDescriptor:
        if self._descriptor is None:
            desc = descriptor_from_wire(self._request("GET", "/backend/v1/describe"))
            if self._backend_id is not None:
                desc = replace(desc, backend_id=self._backend_id)
            self._descriptor = desc
        return self._descriptor

    def tokenize(self, text: str) -> list[Token]:
        data = self._request("POST", "/backend/v1/tokenize", {"text": text})
        return tokens_from_wire(data["tokens"])

    def detokenize(self, tokens: Sequence[Token]) -> str:
        data = self._request(
            "POST", "/backend/v1/detokenize", {"tokens": tokens_to_wire(tokens)}
        )
        return data["text"]

    def next_distribution(self, context: Sequence[Token]) -> TokenDistribution:
        data = self._request(
            "POST", "/backend/v1/next-distribution",
            {"context": tokens_to_wire(context)},
        )
        return distribution_from_wire(data)

    def token_embeddings(self, tokens: Sequence[Token], layer: int) -> list[list[float]]:
        data = self._request(
            "POST", "/backend/v1/embeddings",
            {"tokens": tokens_to_wire(tokens), "layer": layer},
        )
        return [[float(x) for x in row] for row in data["vectors"]]

    def masked_top_k(
        self,
        prefix: Sequence[Token],
        suffix: Sequence[Token],
        config: MaskedQueryConfig,
    ) -> TokenDistribution:
        data = self._request(
            "POST", "/backend/v1/masked-top-k",
            {
                "prefix": tokens_to_wire(prefix),
                "suffix": tokens_to_wire(suffix),
                "config": masked_config_to_wire(config),
            },
        )
        return distribution_from_wire(data)

    def fine_tune(self, sequence: Sequence[Token], config: FineTuneConfig) -> list[float]:
        data = self._request(
            "POST", "/backend/v1/fine-tune",
            {
                "sequence": tokens_to_wire(sequence),
                "config": fine_tune_config_to_wire(config),
            },
        )
        return [float(x) for x in data["losses"]]

    def snapshot(self, label: str = "") -> ModelSnapshot:
        data = self._request("POST", "/backend/v1/snapshot", {"label": label})
        return snapshot_from_wire(data)

    def restore(self, snapshot_id: str) -> None:
        self._request("POST", "/backend/v1/restore", {"snapshot_id": snapshot_id})

    def snapshot_bytes(self, snapshot_id: str) -> bytes:
        data = self._request("GET", f"/backend/v1/snapshots/{snapshot_id}/state")
        return base64.b64decode(data["state"])

    def state_bytes(self) -> bytes:
        data = self._request("GET", "/backend/v1/state")
        return base64.b64decode(data["state"])

    def load_state_bytes(self, blob: bytes) -> None:
        self._request(
            "POST", "/backend/v1/state",
            {"state": base64.b64encode(blob).decode("ascii")},
        )
