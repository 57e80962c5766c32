"""Wire encoding shared by the remote-backend client and stub server.

Bodies are versioned JSON.  Probabilities, embeddings, and losses travel
as plain JSON numbers: IEEE-754 doubles in shortest-repr form, which
round-trip bit-exactly through any conforming JSON codec.  Errors travel
as {code, message, detail} and map back onto the exception hierarchy.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import BeamTreeError, error_class_for_code
from .base import (
    BackendCapabilities,
    BackendDescriptor,
    BackendLimits,
    FineTuneConfig,
    MaskedQueryConfig,
    ModelSnapshot,
    Token,
    TokenDistribution,
)

WIRE_FORMAT = "beamtree.backend-rpc"
WIRE_VERSION = 1


def token_to_wire(token: Token) -> dict:
    return {"id": token.id, "text": token.text}


def tokens_to_wire(tokens: Sequence[Token]) -> list[dict]:
    return [token_to_wire(t) for t in tokens]


def token_from_wire(data: dict) -> Token:
    return Token(id=int(data["id"]), text=str(data["text"]))


def tokens_from_wire(data: Sequence[dict]) -> list[Token]:
    return [token_from_wire(d) for d in data]


def distribution_to_wire(dist: TokenDistribution) -> dict:
    return {
        "entries": [
            {"token": token_to_wire(t), "p": float(p)} for t, p in dist.entries
        ]
    }


def distribution_from_wire(data: dict) -> TokenDistribution:
    return TokenDistribution(
        [(token_from_wire(e["token"]), float(e["p"])) for e in data["entries"]]
    )


def masked_config_to_wire(config: MaskedQueryConfig) -> dict:
    return {
        "mask_k": config.mask_k,
        "embed_length": config.embed_length,
        "layer_range": list(config.layer_range),
        "overlap_m": config.overlap_m,
    }


def masked_config_from_wire(data: dict) -> MaskedQueryConfig:
    return MaskedQueryConfig(
        mask_k=int(data["mask_k"]),
        embed_length=int(data["embed_length"]),
        layer_range=tuple(int(x) for x in data["layer_range"]),
        overlap_m=int(data.get("overlap_m", 10)),
    )


def fine_tune_config_to_wire(config: FineTuneConfig) -> dict:
    return {"learning_rate": config.learning_rate, "steps": config.steps}


def fine_tune_config_from_wire(data: dict) -> FineTuneConfig:
    return FineTuneConfig(
        learning_rate=float(data["learning_rate"]), steps=int(data["steps"])
    )


def descriptor_to_wire(desc: BackendDescriptor) -> dict:
    return {
        "format": WIRE_FORMAT,
        "version": WIRE_VERSION,
        "backend_id": desc.backend_id,
        "kind": desc.kind,
        "capabilities": {
            "generate": desc.capabilities.generate,
            "embed": desc.capabilities.embed,
            "masked": desc.capabilities.masked,
            "trainable": desc.capabilities.trainable,
        },
        "max_context": desc.limits.max_context,
        "embedding_dim": desc.embedding_dim,
        "layer_range": list(desc.layer_range),
        "texts_include_separators": desc.texts_include_separators,
        "vocab_size": desc.vocab_size,
    }


def descriptor_from_wire(data: dict) -> BackendDescriptor:
    caps = data["capabilities"]
    return BackendDescriptor(
        backend_id=str(data["backend_id"]),
        kind=str(data["kind"]),
        capabilities=BackendCapabilities(
            generate=bool(caps["generate"]),
            embed=bool(caps["embed"]),
            masked=bool(caps["masked"]),
            trainable=bool(caps["trainable"]),
        ),
        limits=BackendLimits(max_context=int(data["max_context"])),
        embedding_dim=int(data["embedding_dim"]),
        layer_range=tuple(int(x) for x in data["layer_range"]),
        texts_include_separators=bool(data["texts_include_separators"]),
        vocab_size=int(data["vocab_size"]),
    )


def snapshot_to_wire(snap: ModelSnapshot) -> dict:
    return {
        "snapshot_id": snap.snapshot_id,
        "created_at": snap.created_at,
        "parent_backend": snap.parent_backend,
        "label": snap.label,
    }


def snapshot_from_wire(data: dict) -> ModelSnapshot:
    return ModelSnapshot(
        snapshot_id=str(data["snapshot_id"]),
        created_at=str(data["created_at"]),
        parent_backend=str(data["parent_backend"]),
        label=str(data.get("label", "")),
    )


def error_to_wire(exc: BeamTreeError) -> dict:
    detail = exc.detail
    if detail is not None and not isinstance(detail, (str, int, float, bool, list, dict)):
        detail = repr(detail)
    return {"code": exc.code, "message": exc.message, "detail": detail}


def raise_from_wire(data: dict) -> None:
    cls = error_class_for_code(str(data.get("code", "internal-error")))
    raise cls(str(data.get("message", "remote error")), detail=data.get("detail"))
