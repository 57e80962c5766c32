"""Small crafted backends and instance generators shared across tests."""

from __future__ import annotations

import asyncio
import random
from typing import Sequence

import httpx

from beamtree.backends.base import (
    Backend,
    BackendCapabilities,
    BackendDescriptor,
    BackendLimits,
    Token,
    TokenDistribution,
)
from beamtree.errors import ContextEmptyError, UnknownTokenError


class TableBigramBackend(Backend):
    """Bigram with explicitly given conditional rows; rows must sum to ~1."""

    def __init__(self, vocab: Sequence[str], table: dict[int, Sequence[float]]):
        self.vocab = list(vocab)
        self.table = {k: list(v) for k, v in table.items()}
        self._ids = {w: i for i, w in enumerate(self.vocab)}

    def describe(self) -> BackendDescriptor:
        return BackendDescriptor(
            backend_id="table-bigram",
            kind="table",
            capabilities=BackendCapabilities(generate=True),
            limits=BackendLimits(),
            vocab_size=len(self.vocab),
        )

    def tokenize(self, text: str) -> list[Token]:
        out = []
        for w in text.split():
            if w not in self._ids:
                raise UnknownTokenError(f"unknown word {w!r}", detail=w)
            out.append(Token(self._ids[w], w))
        return out

    def detokenize(self, tokens: Sequence[Token]) -> str:
        return " ".join(t.text for t in tokens)

    def next_distribution(self, context: Sequence[Token]) -> TokenDistribution:
        if not context:
            raise ContextEmptyError("empty context")
        row = self.table[context[-1].id]
        return TokenDistribution(
            [(Token(i, self.vocab[i]), p) for i, p in enumerate(row)]
        )


class SyncASGITransport(httpx.BaseTransport):
    """Drive an ASGI app from a synchronous httpx.Client.

    httpx ships ASGITransport for async clients only; this adapter runs the
    async transport on a private event loop so blocking callers can hit an
    in-process app without opening a socket.
    """

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)
        self._loop = asyncio.new_event_loop()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call():
            response = await self._transport.handle_async_request(request)
            chunks = [chunk async for chunk in response.stream]
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=b"".join(chunks),
                request=request,
            )

        return self._loop.run_until_complete(call())

    def close(self) -> None:
        self._loop.run_until_complete(self._transport.aclose())
        self._loop.close()


def random_bigram_instance(rng: random.Random, max_vocab: int = 5):
    """(backend, prompt) with a random conditional table, |V| in 2..max_vocab."""
    v = rng.randint(2, max_vocab)
    vocab = [f"w{i}" for i in range(v)]
    table = {}
    for i in range(v):
        weights = [rng.random() + 1e-3 for _ in range(v)]
        total = sum(weights)
        table[i] = [w / total for w in weights]
    prompt = vocab[rng.randrange(v)]
    return TableBigramBackend(vocab, table), prompt


def chain_tree_with_texts(texts: Sequence[str]):
    """Root + one child per text, each prob 0.5, for loop-detection tests."""
    from beamtree.tree import append_children, create_tree

    tree = create_tree("root")
    parent = 0
    for i, text in enumerate(texts):
        [parent] = append_children(
            tree, parent, [(Token(i % 3, text.strip() or "t"), 0.5)], texts=[text]
        )
    return tree
